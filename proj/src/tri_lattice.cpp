#include "triwalk/tri_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace triwalk {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

int mod(int a, int n) { return ((a % n) + n) % n; }

// Horizontal index shift from an up triangle in row j to the down triangle
// across its bottom edge (row j-1).
int bottom_offset(int j) { return (j % 2 == 0) ? -1 : 0; }

}  // namespace

TriangularGrid::TriangularGrid(int width, int height, double delta)
    : width_(width), height_(height), delta_(delta) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("grid dimensions must be positive");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("lattice step must be a positive finite number");

    partner_.resize(edge_count());
    for (std::size_t id = 0; id < cell_count(); ++id) {
        const CellIndex c = cell_at(id);
        for (int s = 0; s < 3; ++s) {
            const TriangleRef n = neighbor({c, 0}, s);
            partner_[s * cell_count() + id] = static_cast<std::uint32_t>(cell_id(n.cell));
        }
    }
}

CellIndex TriangularGrid::wrap(CellIndex c) const {
    return {mod(c.i, width_), mod(c.j, height_)};
}

TriangleRef TriangularGrid::neighbor(TriangleRef v, int slot) const {
    const CellIndex c = wrap(v.cell);
    const int k = mod(slot, 3);
    if (v.label == 0) {
        switch (k) {
            case 0:
                return {c, 1};
            case 1:
                return {wrap({c.i - 1, c.j}), 1};
            default:
                return {wrap({c.i + bottom_offset(c.j), c.j - 1}), 1};
        }
    }
    switch (k) {
        case 0:
            return {c, 0};
        case 1:
            return {wrap({c.i + 1, c.j}), 0};
        default: {
            const int above = mod(c.j + 1, height_);
            return {wrap({c.i - bottom_offset(above), above}), 0};
        }
    }
}

Point2 TriangularGrid::cell_origin(CellIndex c) const {
    const CellIndex w = wrap(c);
    return {delta_ * (2.0 * w.i + (w.j % 2) - width_),
            kSqrt3 * delta_ * (w.j - 0.5 * height_)};
}

Point2 TriangularGrid::edge_center(const EdgeRef& e) const {
    static constexpr double up[3][2] = {{1.5, 0.5 * kSqrt3}, {0.5, 0.5 * kSqrt3}, {1.0, 0.0}};
    static constexpr double down[3][2] = {{1.5, 0.5 * kSqrt3}, {2.5, 0.5 * kSqrt3}, {2.0, kSqrt3}};
    const Point2 o = cell_origin(e.cell);
    const int k = mod(e.slot, 3);
    const auto& off = (e.label == 0) ? up[k] : down[k];
    return {o.x + delta_ * off[0], o.y + delta_ * off[1]};
}

Point2 TriangularGrid::triangle_center(TriangleRef v) const {
    const Point2 o = cell_origin(v.cell);
    if (v.label == 0) return {o.x + delta_, o.y + delta_ * kSqrt3 / 3.0};
    return {o.x + 2.0 * delta_, o.y + delta_ * 2.0 * kSqrt3 / 3.0};
}

Point2 TriangularGrid::period_b() const {
    return {-delta_ * (height_ % 2), kSqrt3 * delta_ * height_};
}

Point2 TriangularGrid::min_image(Point2 d) const {
    const Point2 a = period_a();
    const Point2 b = period_b();
    const double nb = std::round(d.y / b.y);
    d.x -= nb * b.x;
    d.y -= nb * b.y;
    const double na = std::round(d.x / a.x);
    d.x -= na * a.x;
    return d;
}

WalkState::WalkState(const TriangularGrid& grid)
    : grid_(grid), amps_(grid.amplitude_count(), cplx(0.0, 0.0)) {}

Spinor2 WalkState::edge_spinor(CellIndex cell, int slot) const {
    const TriangleRef partner = grid_.neighbor({cell, 0}, slot);
    return {{at({cell, 0, slot}), at({partner.cell, 1, slot})}};
}

void WalkState::set_edge_spinor(CellIndex cell, int slot, const Spinor2& s) {
    const TriangleRef partner = grid_.neighbor({cell, 0}, slot);
    at({cell, 0, slot}) = s[0];
    at({partner.cell, 1, slot}) = s[1];
}

void WalkState::normalize() {
    const double n = total_norm(*this);
    if (!(n > 0.0)) throw EmptySupportError("cannot normalize an all-zero state");
    const double scale = 1.0 / std::sqrt(n);
    for (auto& a : amps_) a *= scale;
}

double total_norm(const WalkState& state) {
    double sum = 0.0;
    for (const auto& a : state.amplitudes()) sum += std::norm(a);
    return sum;
}

std::vector<double> cell_density(const WalkState& state) {
    const auto& amps = state.amplitudes();
    const std::size_t cells = state.grid().cell_count();
    std::vector<double> out(cells, 0.0);
    for (std::size_t k = 0; k < amps.size(); ++k) out[k % cells] += std::norm(amps[k]);
    return out;
}

bool is_commensurate(const TriangularGrid& grid, double kx, double ky) {
    auto integral = [](double phase) {
        const double turns = phase / (2.0 * std::numbers::pi);
        return std::abs(turns - std::round(turns)) < 1e-9;
    };
    const Point2 a = grid.period_a();
    const Point2 b = grid.period_b();
    return integral(kx * a.x + ky * a.y) && integral(kx * b.x + ky * b.y);
}

namespace {

struct InitialBuilder {
    const TriangularGrid& grid;
    WalkState& state;

    void operator()(const PointSpec& p) const {
        if (p.label < 0 || p.label > 1 || p.slot < 0 || p.slot > 2)
            throw std::invalid_argument("point initial state needs label in {0,1} and slot in {0,1,2}");
        if (p.cell.i < 0 || p.cell.i >= grid.width() || p.cell.j < 0 || p.cell.j >= grid.height())
            throw EmptySupportError("point initial state lies outside the grid");
        state.at({p.cell, p.label, p.slot}) = 1.0;
    }

    void operator()(const RectangleSpec& r) const {
        if (!(r.fraction > 0.0) || r.fraction > 1.0 || r.slot < 0 || r.slot > 2)
            throw EmptySupportError("rectangle initial state needs 0 < fraction <= 1 and slot in {0,1,2}");
        const int nw = std::max(1, static_cast<int>(std::lround(r.fraction * grid.width())));
        const int nh = std::max(1, static_cast<int>(std::lround(r.fraction * grid.height())));
        const int i0 = (grid.width() - nw) / 2;
        const int j0 = (grid.height() - nh) / 2;
        for (int j = j0; j < j0 + nh; ++j)
            for (int i = i0; i < i0 + nw; ++i)
                for (int label = 0; label < 2; ++label) state.at({{i, j}, label, r.slot}) = 1.0;
    }

    void operator()(const PlaneWaveSpec& w) const {
        if (!is_commensurate(grid, w.kx, w.ky))
            throw std::invalid_argument("plane wave is not periodic on the grid");
        if (w.chi.norm2() == 0.0) throw EmptySupportError("plane wave with zero spinor");
        for (int j = 0; j < grid.height(); ++j)
            for (int i = 0; i < grid.width(); ++i) {
                const Point2 r = grid.edge_center({{i, j}, 0, 0});
                const cplx phase = std::polar(1.0, w.kx * r.x + w.ky * r.y);
                state.set_edge_spinor({i, j}, 0, {{w.chi[0] * phase, w.chi[1] * phase}});
            }
    }

    void operator()(const RandomSpec& r) const {
        std::mt19937_64 rng(r.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& a : state.amplitudes()) {
            const double re = normal(rng);
            const double im = normal(rng);
            a = cplx(re, im);
        }
    }
};

}  // namespace

WalkState make_initial_state(const TriangularGrid& grid, const InitialSpec& spec) {
    WalkState state(grid);
    std::visit(InitialBuilder{grid, state}, spec);
    state.normalize();
    return state;
}

}  // namespace triwalk
