#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "triwalk/duality.hpp"
#include "triwalk/spinor.hpp"
#include "triwalk/tri_lattice.hpp"

namespace triwalk {

class NonUnitaryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Worker count for the stepping kernels: QW_THREADS if set (and positive),
/// otherwise the OpenMP default, never more than the OpenMP maximum.
int default_workers();

/// Restricts an edgewise operation to one slot, or all of them when empty.
using SlotFilter = std::optional<int>;

using MatrixField = std::function<Mat2(double t, double x, double y)>;

/// Applies M to the spinor of every selected edge. Rejects non-unitary M
/// (tolerance 1e-9).
WalkState apply_edgewise(const WalkState& state, SlotFilter slots, const Mat2& m);

/// Same with M evaluated at each edge center and time t; every evaluation
/// must be unitary.
WalkState apply_edgewise(const WalkState& state, SlotFilter slots, const MatrixField& m, double t);

/// R: every triangle hands its slot-k amplitude to its slot k+1, which is
/// S_{u_0} + S_{u_1} + S_{u_2} acting at once.
WalkState rotate(const WalkState& state);

/// S_{u_k}. On the slot-k amplitudes this is the conditional shift (component 0
/// stays in its label-0 triangle, component 1 in its label-1 triangle, both move
/// to slot k+1, i.e. by -/+ delta u_k). The slot-(k+1) amplitudes go back to slot
/// k so that the whole map is a permutation; slot k+2 is untouched.
WalkState shift(const WalkState& state, int slot);

struct UniformWalkParams {
    Mat2 coin = coin_prime();
};

/// In-place stepper for the uniform walk: per step, for i = 0, 1, 2, the coin
/// on every edge followed by R. The three slot sectors evolve side by side;
/// the one seeded on slot k follows the product order starting at k.
class DiracWalk {
public:
    explicit DiracWalk(UniformWalkParams params = {}, int workers = 0);

    void step(WalkState& state) const;
    void run(WalkState& state, long steps) const;

private:
    UniformWalkParams params_;
    int workers_;
};

WalkState dirac_step(const WalkState& state, const UniformWalkParams& params = {});

struct GQWParams {
    AngleSchedule schedule;
};

/// In-place stepper for the geodesic walk Psi_{j+2} = Z2 Z1 Psi_j.
///
/// Z1 = H (prod_i Vbar_i) (prod_i V_i) H with V_i = U_i S U_i^dag and
/// Vbar_i = U_i^dag S U_i; Z2 uses Q, Q^dag and thetas 3..5. Every U is
/// evaluated at the center of the edge it acts on, at time t_j = j dt held over
/// the double step. Consecutive single-edge factors between two R's are fused
/// into one real rotation per edge, precomputed per time slice.
class GeodesicWalk {
public:
    GeodesicWalk(const TriangularGrid& grid, GQWParams params, int workers = 0);

    void double_step(WalkState& state);
    void run(WalkState& state, long double_steps);

    const AngleSchedule& schedule() const { return params_.schedule; }

private:
    struct Rotation {
        double cs;
        double sn;
    };

    // One array per fused factor, indexed slot * cells + cell so that each
    // pass streams through memory in order.
    enum Factor { kC, kA, kB, kD, kC3, kA3, kB3, kD3, kFactors };

    void build_table(double t);

    TriangularGrid grid_;
    GQWParams params_;
    int workers_;
    std::array<std::vector<Rotation>, kFactors> table_;
    std::optional<double> table_time_;
};

/// One double step, advancing the time index by 2.
WalkState gqw_double_step(const WalkState& state, const GQWParams& params);

}  // namespace triwalk
