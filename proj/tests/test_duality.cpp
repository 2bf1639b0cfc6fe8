#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "triwalk/duality.hpp"

using namespace triwalk;

namespace {

const double kRoot3 = std::sqrt(3.0);

// The four printed relations, written out independently of the library.
DeformationMatrix printed_lambda(const LCoefficients& l) {
    return {-0.5 * (l[2] + l[1]) + l[0], -0.5 * (l[5] + l[4]) + l[3], -0.5 * kRoot3 * (l[2] - l[1]),
            -0.5 * kRoot3 * (l[5] - l[4])};
}

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

TEST_CASE("gauge-fixed l coefficients") {
    const DeformationMatrix m{1.2, 0.3, 0.1, 0.9};
    const LCoefficients l = lambda_to_l(m);
    CHECK(l[0] == 1.2);
    CHECK(l[1] == doctest::Approx(0.1 / kRoot3).epsilon(1e-15));
    CHECK(l[3] == 0.3);
    CHECK(l[4] == doctest::Approx(0.9 / kRoot3).epsilon(1e-15));
    CHECK(l[2] == -l[1]);
    CHECK(l[5] == -l[4]);
}

TEST_CASE("l_to_lambda evaluates the printed relations for any l") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int n = 0; n < 100; ++n) {
        LCoefficients l;
        for (int i = 0; i < 6; ++i) l[i] = g(rng);
        CHECK(l_to_lambda(l).max_abs_diff(printed_lambda(l)) < 1e-14);
    }
}

TEST_CASE("round trip over 1000 random matrices") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const DeformationMatrix m{u(rng), u(rng), u(rng), u(rng)};
        const LCoefficients l = lambda_to_l(m);
        worst = std::max(worst, l_to_lambda(l).max_abs_diff(m));
        CHECK(l[2] + l[1] == 0.0);
        CHECK(l[5] + l[4] == 0.0);
    }
    CHECK(worst < 1e-14);
}

TEST_CASE("stereographic projection lands on the unit sphere") {
    for (double x : {-3.0, -0.5, 0.0, 1.0, 2.5})
        for (double y : {-2.0, 0.0, 0.3, 4.0}) {
            CHECK(norm3(stereographic_point(x, y)) == doctest::Approx(1.0).epsilon(1e-14));
        }
    const auto south = stereographic_point(0.0, 0.0);
    CHECK(south[2] == doctest::Approx(-1.0));
}

TEST_CASE("sphere deformation is the reciprocal conformal factor") {
    const DeformationField sphere = sphere_deformation();
    const double h = 1e-5;
    for (double x : {-3.0, -1.0, 0.0, 0.7, 2.0})
        for (double y : {-2.5, 0.0, 0.4, 3.0}) {
            CAPTURE(x);
            CAPTURE(y);
            const auto dx = stereographic_dx(x, y);
            const auto dy = stereographic_dy(x, y);
            // component formulas against central differences of phi
            const auto px = stereographic_point(x + h, y), mx = stereographic_point(x - h, y);
            const auto py = stereographic_point(x, y + h), my = stereographic_point(x, y - h);
            for (int c = 0; c < 3; ++c) {
                CHECK(dx[c] == doctest::Approx((px[c] - mx[c]) / (2 * h)).epsilon(1e-8));
                CHECK(dy[c] == doctest::Approx((py[c] - my[c]) / (2 * h)).epsilon(1e-8));
            }
            const auto m = sphere(0.0, x, y);
            CHECK(m.l00 == doctest::Approx(1.0 / norm3(dx)).epsilon(1e-13));
            CHECK(m.l11 == doctest::Approx(1.0 / norm3(dy)).epsilon(1e-13));
            CHECK(m.l00 == doctest::Approx((x * x + y * y + 4.0) / 4.0).epsilon(1e-14));
            CHECK(m.l01 == 0.0);
            CHECK(m.l10 == 0.0);
        }
    CHECK(sphere(0.0, 0.0, 0.0).max_abs_diff(DeformationMatrix::identity()) == 0.0);
}

TEST_CASE("sphere exclusion radius") {
    const DeformationField s = sphere_deformation(3.0);
    CHECK_NOTHROW(s(0.0, 1.0, 1.0));
    CHECK_THROWS_AS(s(0.0, 2.5, 2.5), OutOfDomainError);
    CHECK_THROWS_AS(s(0.0, 10.0, 0.0), OutOfDomainError);
}

TEST_CASE("declared domain is enforced") {
    const DeformationField f("box", [](double, double, double) { return DeformationMatrix::identity(); },
                             Box{0.0, 1.0, 0.0, 1.0});
    CHECK_NOTHROW(f(0.0, 0.5, 1.0));
    CHECK_THROWS_AS(f(0.0, 1.5, 0.5), OutOfDomainError);
    CHECK_THROWS_AS(f(0.0, 0.5, -0.1), OutOfDomainError);
}

TEST_CASE("presets and named sources") {
    CHECK(resolve_field("zero")(0, 1, 2).max_abs_diff({}) == 0.0);
    CHECK(resolve_field("identity")(0, 1, 2).max_abs_diff(DeformationMatrix::identity()) == 0.0);
    CHECK(resolve_field("sphere")(0, 2, 0).l00 == doctest::Approx(2.0));
    const auto c = resolve_field("constant:1.2,0.3,0.1,0.9")(0.0, 5.0, -5.0);
    CHECK(c.max_abs_diff({1.2, 0.3, 0.1, 0.9}) == 0.0);
    CHECK_THROWS_AS(resolve_field("constant:1,2,3"), FieldFormatError);
    CHECK_THROWS_AS(resolve_field("constant:1,x,3,4"), FieldFormatError);
    CHECK_THROWS_AS(resolve_field("/nonexistent/field.txt"), FieldFormatError);
    CHECK_THROWS_AS(constant_deformation({std::nan(""), 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("sampled field files") {
    SUBCASE("bilinear data is reproduced exactly between samples") {
        const DeformationField src("bilinear", [](double t, double x, double y) {
            return DeformationMatrix{1.0 + x * y, 2.0 * x - y, 0.5 + t, 3.0 * y};
        });
        SampleGrid g{5, 4, 3, -1.0, -2.0, 0.5, 0.75, 0.25};
        std::stringstream ss;
        write_field_samples(ss, src, g);
        const DeformationField f = field_from_grid_stream(ss, "mem");
        CHECK(f.time_dependent());
        CHECK(f.domain().xmax == doctest::Approx(1.0));
        CHECK(f.domain().ymax == doctest::Approx(0.25));
        for (double x : {-1.0, -0.3, 0.0, 0.77, 1.0})
            for (double y : {-2.0, -1.1, 0.25})
                for (int k = 0; k < 3; ++k) {
                    const double t = 0.25 * k;
                    CHECK(f(t, x, y).max_abs_diff(src(t, x, y)) < 1e-12);
                    // nearest slice in time
                    CHECK(f(t + 0.1, x, y).max_abs_diff(src(t, x, y)) < 1e-12);
                }
        CHECK(f(10.0, 0.0, 0.0).max_abs_diff(src(0.5, 0.0, 0.0)) < 1e-12);
        CHECK_THROWS_AS(f(0.0, 1.1, 0.0), OutOfDomainError);
    }
    SUBCASE("dt is optional") {
        std::istringstream in("qwfield v1 1 1 2 0 0 1 1\n1 0 0 1\n2 0 0 2\n");
        const DeformationField f = field_from_grid_stream(in);
        CHECK(f(0.4, 0.0, 0.0).l00 == 1.0);
        CHECK(f(0.6, 0.0, 0.0).l00 == 2.0);
    }
    SUBCASE("errors name the offending record") {
        auto message = [](const std::string& text) -> std::string {
            std::istringstream in(text);
            try {
                field_from_grid_stream(in, "f.txt");
            } catch (const FieldFormatError& e) {
                return e.what();
            }
            return "";
        };
        CHECK(message("").find("empty") != std::string::npos);
        CHECK(message("qwfield v2 1 1 1 0 0 1 1\n").find("qwfield v1") != std::string::npos);
        CHECK(message("qwfield v1 1 1 1 0 0 1\n").find("header") != std::string::npos);
        CHECK(message("qwfield v1 0 1 1 0 0 1 1\n").find("positive") != std::string::npos);
        CHECK(message("qwfield v1 2 1 1 0 0 -1 1\n1 0 0 1\n1 0 0 1\n").find("positive") != std::string::npos);
        const std::string bad = message("qwfield v1 2 2 1 0 0 1 1\n1 0 0 1\n1 0 0 1\n1 0 oops 1\n1 0 0 1\n");
        CHECK(bad.find("record 2 (t=0, y=1, x=0, line 4)") != std::string::npos);
        CHECK(message("qwfield v1 2 1 1 0 0 1 1\n1 0 0 1\n1 0 1\n").find("expected 4 values") != std::string::npos);
        CHECK(message("qwfield v1 2 1 1 0 0 1 1\n1 0 0 1\n").find("truncated after record 1 of 2") !=
              std::string::npos);
        CHECK(message("qwfield v1 1 1 1 0 0 1 1\n1 0 0 1\n1 0 0 1\n").find("more records") != std::string::npos);
        CHECK(message("qwfield v1 1 1 1 0 0 1 1\ninf 0 0 1\n").find("record 0") != std::string::npos);
    }
}

TEST_CASE("compiled schedules") {
    SUBCASE("zero field gives right angles everywhere") {
        const AngleSchedule s = compile_schedule(zero_deformation(), 0.01);
        for (double th : s.thetas(0.3, 1.0, -2.0)) CHECK(th == std::numbers::pi / 2);
    }
    SUBCASE("identity at eps = 0.04 shifts theta_0 by 0.2") {
        const AngleSchedule s = compile_schedule(identity_deformation(), 0.04);
        CHECK(s.dx() == doctest::Approx(0.2));
        CHECK(s.dt() == 0.04);
        for (double x : {-1.0, 0.0, 3.0}) {
            const auto th = s.thetas(0.0, x, 2.0);
            CHECK(th[0] == doctest::Approx(std::numbers::pi / 2 + 0.2).epsilon(1e-15));
            CHECK(th[3] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
            CHECK(th[4] == doctest::Approx(std::numbers::pi / 2 + 0.2 / kRoot3).epsilon(1e-15));
        }
    }
    SUBCASE("epsilon must be positive") {
        CHECK_THROWS_AS(compile_schedule(identity_deformation(), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(compile_schedule(identity_deformation(), -1.0), std::invalid_argument);
    }
    SUBCASE("field errors propagate from evaluation") {
        const AngleSchedule s = compile_schedule(sphere_deformation(1.0), 0.01);
        CHECK_THROWS_AS(s.thetas(0.0, 5.0, 0.0), OutOfDomainError);
    }
}

TEST_CASE("duality verification") {
    const Box box{-3.0, 3.0, -3.0, 3.0};
    const auto pts = random_sample_points(box, 1000, 9, 1.0);
    CHECK(pts.size() == 1000);
    for (const auto& p : pts) {
        CHECK(box.contains(p.x, p.y));
        CHECK(p.t >= 0.0);
        CHECK(p.t <= 1.0);
    }
    const auto again = random_sample_points(box, 1000, 9, 1.0);
    CHECK(again.front().x == pts.front().x);

    for (const DeformationField& f : {sphere_deformation(), constant_deformation({1.2, 0.3, 0.1, 0.9})}) {
        const DualityReport r = verify_duality(compile_schedule(f, 1e-4), f, pts);
        CHECK(r.points == 1000);
        CHECK(r.passes());
        CHECK(r.gauge_residual < 1e-12);
    }
    // a schedule compiled for another field is caught
    const DualityReport wrong =
        verify_duality(compile_schedule(identity_deformation(), 1e-4), sphere_deformation(), pts);
    CHECK_FALSE(wrong.passes());
    CHECK(wrong.lambda_residual > 0.1);
    CHECK(wrong.eigen_residual < 1e-12);
}

TEST_CASE("schedule sample files") {
    const AngleSchedule s = compile_schedule(identity_deformation(), 0.04);
    std::stringstream ss;
    write_schedule_samples(ss, s, SampleGrid{3, 2, 1, 0.0, 0.0, 1.0, 1.0, 1.0});
    std::string header;
    std::getline(ss, header);
    CHECK(header == "qwschedule v1 3 2 1 0 0 1 1 1");
    int rows = 0;
    for (std::string line; std::getline(ss, line);) {
        std::istringstream ls(line);
        std::vector<double> v;
        for (double x; ls >> x;) v.push_back(x);
        CHECK(v.size() == 6);
        CHECK(v[0] == doctest::Approx(std::numbers::pi / 2 + 0.2).epsilon(1e-15));
        ++rows;
    }
    CHECK(rows == 6);
}
