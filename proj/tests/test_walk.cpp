#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "triwalk/walk_engine.hpp"

using namespace triwalk;

namespace {

double max_diff(const WalkState& a, const WalkState& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.amplitudes().size(); ++k)
        m = std::max(m, std::abs(a.amplitudes()[k] - b.amplitudes()[k]));
    return m;
}

WalkState on_each_slot(WalkState st, double t, const std::function<Mat2(int, double, double, double)>& f) {
    for (int s = 0; s < 3; ++s)
        st = apply_edgewise(st, s, [&](double tt, double x, double y) { return f(s, tt, x, y); }, t);
    return st;
}

// The geodesic walk written out factor by factor: every U and shift on its
// own, R standing in for the shift of the current slot in every sector.
WalkState slow_double_step(WalkState st, const AngleSchedule& sch) {
    const double t = st.time_index() * sch.dt();
    for (int half : {0, 3}) {
        const Mat2 pre = half == 0 ? hadamard_H() : q_matrix();
        const Mat2 post = half == 0 ? hadamard_H() : q_matrix().adjoint();
        auto u = [&](int idx, double tt, double x, double y) { return rotation_U(sch.theta(half + idx, tt, x, y)); };
        st = apply_edgewise(st, std::nullopt, pre);
        for (int i = 0; i < 3; ++i) {
            st = on_each_slot(st, t, [&](int s, double tt, double x, double y) { return u(s, tt, x, y).adjoint(); });
            st = rotate(st);
            st = on_each_slot(st, t, [&](int s, double tt, double x, double y) { return u((s + 2) % 3, tt, x, y); });
        }
        for (int i = 0; i < 3; ++i) {
            st = on_each_slot(st, t, [&](int s, double tt, double x, double y) { return u(s, tt, x, y); });
            st = rotate(st);
            st = on_each_slot(st, t,
                              [&](int s, double tt, double x, double y) { return u((s + 2) % 3, tt, x, y).adjoint(); });
        }
        st = apply_edgewise(st, std::nullopt, post);
    }
    st.set_time_index(st.time_index() + 2);
    return st;
}

}  // namespace

TEST_CASE("edgewise operators must be unitary") {
    const TriangularGrid g(4, 4, 1.0);
    const WalkState s = make_initial_state(g, RandomSpec{1});
    CHECK_THROWS_AS(apply_edgewise(s, std::nullopt, Mat2{1.0, 1.0, 0.0, 1.0}), NonUnitaryError);
    CHECK_THROWS_AS(apply_edgewise(
                        s, 0, [](double, double x, double) { return x > 0 ? 2.0 * Mat2::identity() : Mat2::identity(); },
                        0.0),
                    NonUnitaryError);
    const WalkState r = apply_edgewise(s, std::nullopt, hadamard_H());
    CHECK(total_norm(r) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("slot filter restricts an edgewise operator") {
    const TriangularGrid g(4, 4, 1.0);
    const WalkState s = make_initial_state(g, RandomSpec{2});
    const WalkState r = apply_edgewise(s, 1, pauli_x());
    for (std::size_t id = 0; id < g.cell_count(); ++id)
        for (int slot = 0; slot < 3; ++slot) {
            const Spinor2 a = s.edge_spinor(g.cell_at(id), slot);
            const Spinor2 b = r.edge_spinor(g.cell_at(id), slot);
            if (slot == 1) {
                CHECK(a[0] == b[1]);
                CHECK(a[1] == b[0]);
            } else {
                CHECK(a[0] == b[0]);
                CHECK(a[1] == b[1]);
            }
        }
}

TEST_CASE("slot rotation and shifts") {
    const TriangularGrid g(5, 4, 0.5);
    const WalkState s = make_initial_state(g, RandomSpec{3});
    CHECK(max_diff(rotate(rotate(rotate(s))), s) == 0.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(max_diff(shift(shift(s, k), k), s) == 0.0);
        // on a state living on slot k alone, the shift is the rotation
        WalkState only(g);
        for (std::size_t id = 0; id < g.cell_count(); ++id)
            for (int label = 0; label < 2; ++label) only.at({g.cell_at(id), label, k}) = s.at({g.cell_at(id), label, k});
        CHECK(max_diff(shift(only, k), rotate(only)) == 0.0);
    }
    CHECK_THROWS_AS(shift(s, 3), std::out_of_range);
}

TEST_CASE("a shift moves component 0 by -delta u_k and component 1 by +delta u_k") {
    const double delta = 0.5;
    const TriangularGrid g(6, 6, delta);
    for (int k = 0; k < 3; ++k) {
        const Point2 u{std::cos(2.0 * k * std::numbers::pi / 3.0), std::sin(2.0 * k * std::numbers::pi / 3.0)};
        for (int comp = 0; comp < 2; ++comp) {
            WalkState s(g);
            s.at({{3, 3}, comp, k}) = 1.0;
            const Point2 from = g.edge_center({{3, 3}, comp, k});
            const WalkState r = shift(s, k);
            const Point2 to = g.edge_center({{3, 3}, comp, (k + 1) % 3});
            CHECK(r.at({{3, 3}, comp, (k + 1) % 3}) == cplx(1.0));
            const double sign = comp == 0 ? -1.0 : 1.0;
            CHECK(to.x - from.x == doctest::Approx(sign * delta * u.x).epsilon(1e-12));
            CHECK(to.y - from.y == doctest::Approx(sign * delta * u.y).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform step is coin then rotation, three times") {
    const TriangularGrid g(6, 4, 0.1);
    const WalkState s = make_initial_state(g, RandomSpec{4});
    WalkState ref = s;
    for (int i = 0; i < 3; ++i) ref = rotate(apply_edgewise(ref, std::nullopt, coin_prime()));
    const WalkState fast = dirac_step(s);
    CHECK(max_diff(fast, ref) < 1e-15);
    CHECK(fast.time_index() == 1);
}

TEST_CASE("a sector seeded on slot 0 sees the shifts S_u0, S_u1, S_u2 in turn") {
    const TriangularGrid g(6, 4, 0.1);
    WalkState s(g);
    const WalkState noise = make_initial_state(g, RandomSpec{5});
    for (std::size_t id = 0; id < g.cell_count(); ++id)
        for (int label = 0; label < 2; ++label) s.at({g.cell_at(id), label, 0}) = noise.at({g.cell_at(id), label, 0});
    s.normalize();
    WalkState ref = s;
    for (int k = 0; k < 3; ++k) ref = shift(apply_edgewise(ref, k, coin_prime()), k);
    CHECK(max_diff(dirac_step(s), ref) < 1e-15);
}

TEST_CASE("uniform walk is unitary and independent of worker count") {
    const TriangularGrid g(30, 20, 0.1);
    WalkState a = make_initial_state(g, RandomSpec{6});
    WalkState b = a;
    DiracWalk(UniformWalkParams{}, 1).run(a, 200);
    DiracWalk(UniformWalkParams{}, 3).run(b, 200);
    CHECK(std::abs(total_norm(a) - 1.0) < 1e-12);
    CHECK(a.amplitudes() == b.amplitudes());
    CHECK(a.time_index() == 200);
    CHECK_THROWS_AS(DiracWalk(UniformWalkParams{Mat2{1.0, 1.0, 1.0, 1.0}}), NonUnitaryError);
}

TEST_CASE("fused geodesic kernel matches the factor-by-factor walk") {
    const TriangularGrid g(6, 4, 0.25);
    const WalkState s = make_initial_state(g, RandomSpec{7});

    SUBCASE("sphere schedule") {
        const AngleSchedule sch = compile_schedule(sphere_deformation(), 0.0625);
        GeodesicWalk w(g, {sch}, 1);
        WalkState fast = s;
        WalkState slow = s;
        for (int n = 0; n < 3; ++n) {
            w.double_step(fast);
            slow = slow_double_step(slow, sch);
        }
        CHECK(max_diff(fast, slow) < 1e-12);
        CHECK(fast.time_index() == 6);
    }
    SUBCASE("time dependent schedule") {
        const DeformationField field(
            "wobble",
            [](double t, double x, double y) {
                return DeformationMatrix{1.0 + 0.3 * std::sin(x + t), 0.2 * y, 0.1 * std::cos(t), 0.8 + 0.1 * x * y};
            },
            Box{}, true);
        const AngleSchedule sch = compile_schedule(field, 0.05);
        GeodesicWalk w(g, {sch}, 2);
        WalkState fast = s;
        WalkState slow = s;
        for (int n = 0; n < 3; ++n) {
            w.double_step(fast);
            slow = slow_double_step(slow, sch);
        }
        CHECK(max_diff(fast, slow) < 1e-12);
    }
}

TEST_CASE("geodesic walk is unitary and independent of worker count") {
    const TriangularGrid g(20, 16, 0.1);
    const GQWParams p{compile_schedule(sphere_deformation(), 0.01)};
    WalkState a = make_initial_state(g, RandomSpec{8});
    WalkState b = a;
    GeodesicWalk(g, p, 1).run(a, 100);
    GeodesicWalk(g, p, 4).run(b, 100);
    CHECK(std::abs(total_norm(a) - 1.0) < 1e-12);
    CHECK(a.amplitudes() == b.amplitudes());
    const WalkState c = gqw_double_step(make_initial_state(g, RandomSpec{8}), p);
    CHECK(c.time_index() == 2);
}

TEST_CASE("schedule errors surface as ScheduleError") {
    const TriangularGrid g(10, 10, 1.0);
    GeodesicWalk w(g, {compile_schedule(sphere_deformation(2.0), 1.0)}, 1);
    WalkState s = make_initial_state(g, PointSpec{{5, 5}, 0, 0});
    CHECK_THROWS_AS(w.double_step(s), ScheduleError);

    const DeformationField broken("nan", [](double, double, double) {
        return DeformationMatrix{std::nan(""), 0.0, 0.0, 1.0};
    });
    GeodesicWalk wb(g, {compile_schedule(broken, 0.01)}, 1);
    CHECK_THROWS_AS(wb.double_step(s), ScheduleError);
}

TEST_CASE("worker count honours QW_THREADS") {
    CHECK(default_workers() >= 1);
}
