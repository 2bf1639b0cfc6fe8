#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "triwalk/continuum.hpp"
#include "triwalk/duality.hpp"
#include "triwalk/tri_lattice.hpp"
#include "triwalk/walk_engine.hpp"

namespace triwalk {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class WalkKind { Uniform, Geodesic };

std::string to_string(WalkKind w);

/// Everything a run needs. Only epsilon is stored; the lattice step follows
/// from the walk (uniform: delta = eps, geodesic: delta = sqrt(eps)).
struct RunConfig {
    WalkKind walk = WalkKind::Uniform;
    int width = 401;
    int height = 400;
    double epsilon = 1e-4;
    long steps = 300;
    std::string deformation = "sphere";
    InitialSpec initial = PointSpec{{200, 200}, 0, 0};
    /// Plane-wave mode numbers when given as mode_x / mode_y; a convergence
    /// study resolves them against its own box.
    std::optional<std::pair<int, int>> wave_modes;
    long snapshot_every = 0;  // 0: only the first and last step
    std::filesystem::path output_dir = "qw_out";
    std::uint64_t seed = 0;
    int workers = 0;
    double time = 1.0;  // physical end time for convergence runs

    double delta() const;
    /// Physical time per step.
    double dt() const { return epsilon; }
};

/// Parses the flat key = value format. An optional single `[run]` header is
/// allowed; `#` and `;` start comments. Unknown or repeated keys are errors.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError if the fields are inconsistent.
void validate(const RunConfig& cfg);

/// Maps between the continuum spinor and what a walk stores on slot-0 edges:
/// Psi = readout * (stored spinor). Uniform walk: U^dag; geodesic walk: sigma_z.
Mat2 continuum_readout(WalkKind walk);

struct DensitySnapshot {
    int width = 0;
    int height = 0;
    long step = 0;
    std::vector<double> values;  // row-major, height rows of width values

    double total() const;
};

DensitySnapshot take_snapshot(const WalkState& state, long step);

/// `qwdensity v1 <width> <height> <step>`, then one CSV row per grid row.
/// Values use the shortest round-trip representation.
void write_density_csv(std::ostream& out, const DensitySnapshot& snap);
DensitySnapshot read_density_csv(std::istream& in, const std::string& source = "<density>");

struct SimulationSummary {
    long steps = 0;
    double final_norm = 0.0;
    double wall_seconds = 0.0;
    double step_seconds = 0.0;
    double steps_per_second = 0.0;
    std::vector<std::filesystem::path> snapshots;
};

/// Runs the configured walk, writing density_<step>.csv snapshots and
/// summary.txt into cfg.output_dir. Geodesic runs count two steps per double
/// step, so steps and snapshot_every must be even. Throws NumericalError if
/// the norm drifts by more than 1e-6.
SimulationSummary run_simulation(const RunConfig& cfg, std::ostream& log);

struct ConvergenceRow {
    double epsilon = 0.0;
    double delta = 0.0;
    int width = 0;
    int height = 0;
    long steps = 0;
    double error = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    std::vector<double> ratios;  // error[i] / error[i + 1]
    double kx = 0.0;
    double ky = 0.0;

    bool strictly_decreasing() const;
};

/// Plane-wave refinement study at fixed physical time cfg.time. The box is
/// set by cfg.width x cfg.height at the first epsilon; every other epsilon
/// must tile it exactly. The wave vector comes from the plane-wave initial
/// spec (modes relative to the box, or kx, ky) and must be periodic on it. Geodesic runs need a
/// constant deformation and compare against its exact plane wave.
ConvergenceResult run_convergence(const RunConfig& cfg, const std::vector<double>& epsilons, int workers = 0);

void print_convergence(std::ostream& out, const ConvergenceResult& r);

struct CompileScheduleResult {
    DualityReport report;
    SampleGrid grid;
};

/// Default sampling grid for a field: its own box when finite, otherwise
/// 64 x 64 samples over [-4, 4]^2.
SampleGrid default_sample_grid(const DeformationField& field);

/// Writes the schedule samples to `out_path` and verifies the duality at
/// `check_points` random points of the sampled region.
CompileScheduleResult compile_schedule_file(const std::string& field_source, double epsilon,
                                            const std::filesystem::path& out_path, const SampleGrid& grid,
                                            std::size_t check_points = 1000);

void print_duality_report(std::ostream& out, const DualityReport& r);

struct CheckItem {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed() const { return residual <= tolerance; }
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool passed() const;
};

struct CheckOptions {
    /// Test hook: the kappa used for the tau formula comparisons.
    double kappa = triwalk::kappa();
};

/// Algebraic identities of the coin algebra plus structural checks on small
/// grids.
CheckReport run_checks(const CheckOptions& opts = {});

void print_check_report(std::ostream& out, const CheckReport& r);

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// Runs `body`, mapping exceptions to exit codes with a message on `err`:
/// configuration, parse and domain errors give 1; numerical failures (norm
/// blow-up, CFL violation, broken schedules) give 2.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace triwalk
