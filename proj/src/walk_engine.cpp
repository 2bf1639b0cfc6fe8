#include "triwalk/walk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#include <omp.h>

#if defined(__SSE2__)
#include <immintrin.h>
#endif

namespace triwalk {

int default_workers() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("QW_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return std::max(1, n);
}

namespace {

// Flushes denormals to zero while alive, restoring the previous mode after.
// Spreading wave fronts leave huge regions of ~1e-300 amplitudes, and
// denormal arithmetic on them would halve the stepping speed.
class FlushDenormals {
public:
#if defined(__SSE2__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

int resolve_workers(int requested) { return requested > 0 ? requested : default_workers(); }

// Visits every edge once, slot by slot. Storage slots never move; R only
// advances `rot`, so physical slot s lives at storage slot (s - rot) mod 3.
// The edge index handed to `op` is s * cells + cell.
template <class Op>
void for_each_edge(std::vector<cplx>& amps, const TriangularGrid& g, int rot, int workers, Op&& op) {
    cplx* p = amps.data();
    const long cells = static_cast<long>(g.cell_count());
    for (int s = 0; s < 3; ++s) {
        const int st = ((s - rot) % 3 + 3) % 3;
        const std::size_t base = static_cast<std::size_t>(s) * cells;
        cplx* up_plane = p + st * cells;
        cplx* down_plane = p + (3 + st) * cells;
#pragma omp parallel num_threads(workers)
        {
            const FlushDenormals ftz;
#pragma omp for schedule(static)
            for (long c = 0; c < cells; ++c) {
                cplx& up = up_plane[c];
                cplx& down = down_plane[g.partner_cell(static_cast<std::size_t>(c), s)];
                op(base + c, s, up, down);
            }
        }
    }
}

inline void apply_rotation(double cs, double sn, cplx& a, cplx& b) {
    const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
    a = {cs * ar - sn * br, cs * ai - sn * bi};
    b = {sn * ar + cs * br, sn * ai + cs * bi};
}

// Plain complex arithmetic; keeps the inner loop free of library calls.
inline void apply_matrix(const double (&re)[4], const double (&im)[4], cplx& a, cplx& b) {
    const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
    a = {re[0] * ar - im[0] * ai + re[1] * br - im[1] * bi, re[0] * ai + im[0] * ar + re[1] * bi + im[1] * br};
    b = {re[2] * ar - im[2] * ai + re[3] * br - im[3] * bi, re[2] * ai + im[2] * ar + re[3] * bi + im[3] * br};
}

struct SplitMatrix {
    double re[4];
    double im[4];

    explicit SplitMatrix(const Mat2& m) {
        for (int k = 0; k < 4; ++k) {
            re[k] = m(k / 2, k % 2).real();
            im[k] = m(k / 2, k % 2).imag();
        }
    }
};

void check_unitary(const Mat2& m) {
    if (!m.is_unitary(1e-9)) throw NonUnitaryError("edgewise operator is not unitary");
}

bool selected(SlotFilter filter, int s) { return !filter || *filter == s; }

}  // namespace

WalkState apply_edgewise(const WalkState& state, SlotFilter slots, const Mat2& m) {
    check_unitary(m);
    WalkState out = state;
    const SplitMatrix sm(m);
    for_each_edge(out.amplitudes(), out.grid(), 0, 1, [&](std::size_t, int s, cplx& a, cplx& b) {
        if (selected(slots, s)) apply_matrix(sm.re, sm.im, a, b);
    });
    return out;
}

WalkState apply_edgewise(const WalkState& state, SlotFilter slots, const MatrixField& m, double t) {
    WalkState out = state;
    const TriangularGrid& g = out.grid();
    // Evaluate everything first so that a bad matrix throws outside the kernel.
    std::vector<SplitMatrix> mats;
    mats.reserve(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const int s = static_cast<int>(e / g.cell_count());
        if (!selected(slots, s)) {
            mats.emplace_back(Mat2::identity());
            continue;
        }
        const Point2 r = g.edge_center({g.cell_at(e % g.cell_count()), 0, s});
        const Mat2 mat = m(t, r.x, r.y);
        check_unitary(mat);
        mats.emplace_back(mat);
    }
    for_each_edge(out.amplitudes(), g, 0, 1, [&](std::size_t e, int s, cplx& a, cplx& b) {
        if (selected(slots, s)) apply_matrix(mats[e].re, mats[e].im, a, b);
    });
    return out;
}

WalkState rotate(const WalkState& state) {
    WalkState out = state;
    auto& amps = out.amplitudes();
    const auto& src = state.amplitudes();
    const std::size_t cells = state.grid().cell_count();
    for (int label = 0; label < 2; ++label)
        for (int s = 0; s < 3; ++s)
            std::copy_n(src.begin() + (3 * label + s) * cells, cells,
                        amps.begin() + (3 * label + (s + 1) % 3) * cells);
    return out;
}

WalkState shift(const WalkState& state, int slot) {
    if (slot < 0 || slot > 2) throw std::out_of_range("slot must be 0, 1 or 2");
    WalkState out = state;
    auto& amps = out.amplitudes();
    const int next = (slot + 1) % 3;
    const std::size_t cells = state.grid().cell_count();
    for (int label = 0; label < 2; ++label)
        std::swap_ranges(amps.begin() + (3 * label + slot) * cells, amps.begin() + (3 * label + slot + 1) * cells,
                         amps.begin() + (3 * label + next) * cells);
    return out;
}

DiracWalk::DiracWalk(UniformWalkParams params, int workers)
    : params_(params), workers_(resolve_workers(workers)) {
    check_unitary(params_.coin);
}

void DiracWalk::step(WalkState& state) const {
    const SplitMatrix coin(params_.coin);
    for (int rot = 0; rot < 3; ++rot) {
        for_each_edge(state.amplitudes(), state.grid(), rot, workers_,
                      [&](std::size_t, int, cplx& a, cplx& b) { apply_matrix(coin.re, coin.im, a, b); });
    }
    state.set_time_index(state.time_index() + 1);
}

void DiracWalk::run(WalkState& state, long steps) const {
    for (long n = 0; n < steps; ++n) step(state);
}

WalkState dirac_step(const WalkState& state, const UniformWalkParams& params) {
    WalkState out = state;
    DiracWalk(params).step(out);
    return out;
}

GeodesicWalk::GeodesicWalk(const TriangularGrid& grid, GQWParams params, int workers)
    : grid_(grid), params_(std::move(params)), workers_(resolve_workers(workers)) {}

void GeodesicWalk::build_table(double t) {
    const std::size_t cells = grid_.cell_count();
    for (auto& f : table_) f.resize(grid_.edge_count());
    const long edges = static_cast<long>(grid_.edge_count());
    std::exception_ptr error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(static) num_threads(workers_)
    for (long e = 0; e < edges; ++e) {
        const int s = static_cast<int>(static_cast<std::size_t>(e) / cells);
        const int prev = (s + 2) % 3;
        const std::size_t k = static_cast<std::size_t>(e);
        auto put = [&](Factor f, double angle) { table_[f][k] = {std::cos(angle), std::sin(angle)}; };
        try {
            const Point2 r = grid_.edge_center({grid_.cell_at(k % cells), 0, s});
            const auto th = params_.schedule.thetas(t, r.x, r.y);
            for (double v : {th[s], th[prev], th[s + 3], th[prev + 3]})
                if (!std::isfinite(v)) throw ScheduleError("non-finite angle in schedule");
            // U(theta) = R(-theta/2), U^dag = R(theta/2) with R the plane rotation
            put(kC, 0.5 * th[s]);
            put(kA, 0.5 * (th[s] - th[prev]));
            put(kB, -0.5 * (th[s] + th[prev]));
            put(kD, 0.5 * th[prev]);
            put(kC3, 0.5 * th[s + 3]);
            put(kA3, 0.5 * (th[s + 3] - th[prev + 3]));
            put(kB3, -0.5 * (th[s + 3] + th[prev + 3]));
            put(kD3, 0.5 * th[prev + 3]);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) {
        try {
            std::rethrow_exception(error);
        } catch (const ScheduleError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ScheduleError(std::string("schedule undefined on the grid: ") + ex.what());
        }
    }
    table_time_ = t;
}

void GeodesicWalk::double_step(WalkState& state) {
    const double t = static_cast<double>(state.time_index()) * params_.schedule.dt();
    if (!table_time_ || (params_.schedule.time_dependent() && *table_time_ != t)) build_table(t);

    const SplitMatrix h(hadamard_H());
    const SplitMatrix qh(q_matrix() * hadamard_H());
    const SplitMatrix qdag(q_matrix().adjoint());
    auto& amps = state.amplitudes();
    const int w = workers_;
    const Rotation* c = table_[kC].data();
    const Rotation* a = table_[kA].data();
    const Rotation* b = table_[kB].data();
    const Rotation* d = table_[kD].data();
    const Rotation* c3 = table_[kC3].data();
    const Rotation* a3 = table_[kA3].data();
    const Rotation* b3 = table_[kB3].data();
    const Rotation* d3 = table_[kD3].data();

    auto rotate_by = [&](const Rotation* f, int rot) {
        for_each_edge(amps, grid_, rot, w,
                      [f](std::size_t e, int, cplx& x, cplx& y) { apply_rotation(f[e].cs, f[e].sn, x, y); });
    };
    auto unrotate_by = [&](const Rotation* f, int rot) {
        for_each_edge(amps, grid_, rot, w,
                      [f](std::size_t e, int, cplx& x, cplx& y) { apply_rotation(f[e].cs, -f[e].sn, x, y); });
    };

    // Z1, V sweep then Vbar sweep; R sits between consecutive passes.
    for_each_edge(amps, grid_, 0, w, [&](std::size_t e, int, cplx& x, cplx& y) {
        apply_matrix(h.re, h.im, x, y);
        apply_rotation(c[e].cs, c[e].sn, x, y);
    });
    rotate_by(a, 1);
    rotate_by(a, 2);
    rotate_by(b, 0);
    unrotate_by(a, 1);
    unrotate_by(a, 2);
    // end of Z1 fused with the start of Z2
    for_each_edge(amps, grid_, 0, w, [&](std::size_t e, int, cplx& x, cplx& y) {
        apply_rotation(d[e].cs, d[e].sn, x, y);
        apply_matrix(qh.re, qh.im, x, y);
        apply_rotation(c3[e].cs, c3[e].sn, x, y);
    });
    rotate_by(a3, 1);
    rotate_by(a3, 2);
    rotate_by(b3, 0);
    unrotate_by(a3, 1);
    unrotate_by(a3, 2);
    for_each_edge(amps, grid_, 0, w, [&](std::size_t e, int, cplx& x, cplx& y) {
        apply_rotation(d3[e].cs, d3[e].sn, x, y);
        apply_matrix(qdag.re, qdag.im, x, y);
    });

    state.set_time_index(state.time_index() + 2);
}

void GeodesicWalk::run(WalkState& state, long double_steps) {
    for (long n = 0; n < double_steps; ++n) double_step(state);
}

WalkState gqw_double_step(const WalkState& state, const GQWParams& params) {
    WalkState out = state;
    GeodesicWalk(state.grid(), params).double_step(out);
    return out;
}

}  // namespace triwalk
