#pragma once

#include <stdexcept>
#include <vector>

#include "triwalk/duality.hpp"
#include "triwalk/spinor.hpp"
#include "triwalk/tri_lattice.hpp"

namespace triwalk {

class IncompatibleShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Periodic sampling pattern: sample (ix, iy) sits at
/// (x0 + ix dx + (iy odd ? row_shift : 0), y0 + iy dy). A zero row shift is a
/// plain rectangle; a shift of dx/2 reproduces the slot sublattice of the
/// triangular grid.
struct FieldGeometry {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = 1.0;
    double row_shift = 0.0;

    Point2 position(int ix, int iy) const {
        return {x0 + ix * dx + ((iy % 2) ? row_shift : 0.0), y0 + iy * dy};
    }
    double period_x() const { return nx * dx; }
    double period_y() const { return ny * dy; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

    static FieldGeometry rectangle(int nx, int ny, double x0, double y0, double dx, double dy) {
        return {nx, ny, x0, y0, dx, dy, 0.0};
    }
};

/// Samples of the slot-0 edges of a grid, one per cell, cell (i, j) at (i, j).
/// Needs an even grid height so the staggered rows close periodically.
FieldGeometry sector_geometry(const TriangularGrid& grid);

/// Two-component field Psi(t, x, y) on a periodic geometry.
struct SpinorField {
    FieldGeometry geom;
    double t = 0.0;
    std::vector<Spinor2> values;

    SpinorField() = default;
    SpinorField(const FieldGeometry& g, double time) : geom(g), t(time), values(g.size()) {}

    Spinor2& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * geom.nx + ix]; }
    const Spinor2& at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * geom.nx + ix]; }

    /// Quadrature L2 norm squared: sum |Psi|^2 dx dy.
    double norm2() const;
};

/// exp(i t (kx sigma_x + ky sigma_y)) chi0 e^{i k.r}: exact solution of
/// d_t Psi = (sigma_x d_x + sigma_y d_y) Psi. Throws if k is not periodic on g.
SpinorField flat_plane_wave(const FieldGeometry& g, double kx, double ky, const Spinor2& chi0, double t);

/// Exact plane-wave solution for constant Lambda of
///   d_t Psi = 1/2 sum_s (d_s B^s + B^s d_s) Psi,
///   B^x = l00 sigma_x + l01 sigma_y,  B^y = l10 sigma_x + l11 sigma_y,
/// i.e. exp(i t (kx B^x + ky B^y)) chi0 e^{i k.r}. Lambda = I gives the flat solution.
SpinorField constant_deformation_plane_wave(const FieldGeometry& g, const DeformationMatrix& m,
                                            double kx, double ky, const Spinor2& chi0, double t);

struct CurvedPDEProblem {
    DeformationField field;
    SpinorField initial;
};

struct FdResult {
    SpinorField field;
    long steps = 0;
    double norm_drift = 0.0;  // |norm(T) - norm(0)| / norm(0)
};

/// Largest admissible RK4 step for the centered scheme: dt <= c min(dx, dy) / max|Lambda|_F.
constexpr double kCflNumber = 1.0;

/// Integrates the symmetric curved Dirac equation above with second-order
/// centered differences in space and classical RK4 in time on a plain periodic
/// rectangle, up to time T in steps of at most `dt` (shortened to land on T).
/// Throws NumericalError for a CFL violation or a non-finite / exploding field.
FdResult curved_fd_evolve(const CurvedPDEProblem& problem, double T, double dt, int workers = 0);

/// Residual of the semi-discrete right-hand side against d_t Psi of the
/// analytic plane wave (used to check that the oracle satisfies the PDE).
double flat_plane_wave_residual(const FieldGeometry& g, double kx, double ky, const Spinor2& chi0, double t);

/// Normalized L2 distance between two fields on the same sampling shape, in
/// [0, 2]. With align_phase, b is first rotated by the global phase that
/// minimizes the distance.
double l2_error(const SpinorField& a, const SpinorField& b, bool align_phase = false);

/// Reads the slot-0 edge spinors of a walk state, transformed by `readout`,
/// onto sector_geometry(grid).
SpinorField walk_sector_field(const WalkState& state, const Mat2& readout, double t);

/// Averages the slot-`slot` edge spinors (after `readout`) into the cells of a
/// plain rectangle by nearest edge-center binning. Empty cells stay zero.
SpinorField bin_walk_to_rectangle(const WalkState& state, int slot, const Mat2& readout,
                                  const FieldGeometry& rect, double t);

/// Periodic bilinear interpolation of a plain-rectangle field onto any geometry.
SpinorField interpolate(const SpinorField& src, const FieldGeometry& target);

}  // namespace triwalk
