#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "triwalk/spinor.hpp"

namespace triwalk {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct CellIndex {
    int i = 0;
    int j = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Label 0 is the up-pointing triangle of a cell, label 1 the down-pointing one.
struct TriangleRef {
    CellIndex cell;
    int label = 0;
    friend bool operator==(const TriangleRef&, const TriangleRef&) = default;
};

struct EdgeRef {
    CellIndex cell;
    int label = 0;
    int slot = 0;
    friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

/// Periodic triangular lattice of width x height rhombus cells.
///
/// Cell (i, j) has its up triangle at lower-left corner
/// o = (2 delta i + delta (j mod 2), sqrt3 delta j) (shifted so the grid is
/// centered on the origin); rows alternate their horizontal offset so that
/// an even number of rows tiles a rectangle. Slot k of a triangle names the
/// same physical edge from both sides:
///   up:   slot 0 right side, slot 1 left side, slot 2 bottom
///   down: slot 0 left side,  slot 1 right side, slot 2 top
/// With u_k = (cos 2k pi/3, sin 2k pi/3) the midpoints then satisfy
///   center(up, k)   - center(up, k+1)   = +delta u_k
///   center(down, k) - center(down, k+1) = -delta u_k
/// so a slot-k -> slot-(k+1) rotation moves component 0 by -delta u_k and
/// component 1 by +delta u_k.
///
/// Periods: (2 delta W, 0) and (-delta (H mod 2), sqrt3 delta H). Odd heights
/// close into a sheared torus; every height is a valid triangulation.
class TriangularGrid {
public:
    TriangularGrid(int width, int height, double delta);

    int width() const { return width_; }
    int height() const { return height_; }
    double delta() const { return delta_; }

    std::size_t cell_count() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t edge_count() const { return 3 * cell_count(); }
    std::size_t amplitude_count() const { return 6 * cell_count(); }

    std::size_t cell_id(CellIndex c) const {
        return static_cast<std::size_t>(c.j) * width_ + c.i;
    }
    CellIndex cell_at(std::size_t id) const {
        return {static_cast<int>(id % width_), static_cast<int>(id / width_)};
    }
    CellIndex wrap(CellIndex c) const;

    /// Storage index of the amplitude on (cell, label, slot). Amplitudes are
    /// kept in six planes, one per (label, slot), each in cell order.
    std::size_t amplitude_index(const EdgeRef& e) const {
        return static_cast<std::size_t>(3 * e.label + e.slot) * cell_count() + cell_id(e.cell);
    }

    /// e(k, v): the opposite-label triangle sharing slot k with v.
    TriangleRef neighbor(TriangleRef v, int slot) const;

    /// Cell of the down triangle that shares slot `slot` with the up
    /// triangle of `cell` (by id); the stepping kernels iterate edges this way.
    std::size_t partner_cell(std::size_t cell, int slot) const {
        return partner_[static_cast<std::size_t>(slot) * cell_count() + cell];
    }

    Point2 edge_center(const EdgeRef& e) const;
    Point2 triangle_center(TriangleRef v) const;

    Point2 period_a() const { return {2.0 * delta_ * width_, 0.0}; }
    Point2 period_b() const;

    /// Shortest representative of a displacement modulo the lattice periods.
    Point2 min_image(Point2 d) const;

private:
    Point2 cell_origin(CellIndex c) const;

    int width_;
    int height_;
    double delta_;
    std::vector<std::uint32_t> partner_;
};

/// Complex amplitude per (cell, label, slot) of a grid, plus a time index.
class WalkState {
public:
    explicit WalkState(const TriangularGrid& grid);

    const TriangularGrid& grid() const { return grid_; }

    std::vector<cplx>& amplitudes() { return amps_; }
    const std::vector<cplx>& amplitudes() const { return amps_; }

    cplx& at(const EdgeRef& e) { return amps_[grid_.amplitude_index(e)]; }
    const cplx& at(const EdgeRef& e) const { return amps_[grid_.amplitude_index(e)]; }

    /// The spinor on the edge of slot `slot` owned by the up triangle of `cell`.
    Spinor2 edge_spinor(CellIndex cell, int slot) const;
    void set_edge_spinor(CellIndex cell, int slot, const Spinor2& s);

    long time_index() const { return time_index_; }
    void set_time_index(long j) { time_index_ = j; }

    /// Scales to unit norm; throws if the state is identically zero.
    void normalize();

private:
    TriangularGrid grid_;
    std::vector<cplx> amps_;
    long time_index_ = 0;
};

double total_norm(const WalkState& state);

/// Per-cell probability: the sum of |amplitude|^2 over both triangles of a cell.
std::vector<double> cell_density(const WalkState& state);

struct PointSpec {
    CellIndex cell;
    int label = 0;
    int slot = 0;
};

/// Uniform amplitude on `slot` of every triangle inside a centered block
/// spanning `fraction` of each grid dimension.
struct RectangleSpec {
    double fraction = 0.2;
    int slot = 0;
};

/// chi e^{i k.r} sampled on the slot-0 edges (the sector whose continuum
/// limit the walks describe).
struct PlaneWaveSpec {
    double kx = 0.0;
    double ky = 0.0;
    Spinor2 chi{{1.0, 0.0}};
};

/// Independent standard normal real and imaginary parts on every amplitude.
struct RandomSpec {
    std::uint64_t seed = 0;
};

using InitialSpec = std::variant<PointSpec, RectangleSpec, PlaneWaveSpec, RandomSpec>;

class EmptySupportError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

WalkState make_initial_state(const TriangularGrid& grid, const InitialSpec& spec);

/// True if e^{i k.r} is periodic on the grid's torus (to 1e-9 in phase).
bool is_commensurate(const TriangularGrid& grid, double kx, double ky);

}  // namespace triwalk
