#include "triwalk/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace triwalk {

namespace fs = std::filesystem;

std::string to_string(WalkKind w) { return w == WalkKind::Uniform ? "uniform" : "gqw"; }

double RunConfig::delta() const { return walk == WalkKind::Uniform ? epsilon : std::sqrt(epsilon); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), last, out);
    return ec == std::errc() && ptr == last;
}

// Key/value pairs with the line each came from.
class ConfigMap {
public:
    explicit ConfigMap(std::string source) : source_(std::move(source)) {}

    void add(const std::string& key, const std::string& value, int line) {
        if (entries_.count(key)) fail(line, "duplicate key '" + key + "'");
        entries_[key] = {value, line};
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        used_.insert(key);
        return it->second.value;
    }

    template <class T>
    T number(const std::string& key, T fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        used_.insert(key);
        T v{};
        if (!parse_number(it->second.value, v) || !finite(v))
            fail(it->second.line, "'" + key + "' expects a number, got '" + it->second.value + "'");
        return v;
    }

    std::vector<double> numbers(const std::string& key, std::size_t count, std::vector<double> fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        used_.insert(key);
        std::vector<double> out;
        for (const auto& tok : split(it->second.value, ',')) {
            double v = 0.0;
            if (!parse_number(tok, v) || !std::isfinite(v))
                fail(it->second.line, "'" + key + "' has a bad entry '" + tok + "'");
            out.push_back(v);
        }
        if (out.size() != count)
            fail(it->second.line, "'" + key + "' needs " + std::to_string(count) + " comma-separated values");
        return out;
    }

    void reject_unused() const {
        for (const auto& [key, e] : entries_)
            if (!used_.count(key)) fail(e.line, "unknown or inapplicable key '" + key + "'");
    }

    [[noreturn]] void fail(int line, const std::string& what) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + what);
    }

private:
    template <class T>
    static bool finite(T v) {
        if constexpr (std::is_floating_point_v<T>)
            return std::isfinite(v);
        else
            return true;
    }

    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string source_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    ConfigMap map(source);
    std::string raw;
    int line = 0;
    bool seen_section = false;
    bool seen_key = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s != "[run]") map.fail(line, "only a single [run] section is supported");
            if (seen_section || seen_key) map.fail(line, "[run] must come first and only once");
            seen_section = true;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) map.fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) map.fail(line, "empty key");
        map.add(key, trim(s.substr(eq + 1)), line);
        seen_key = true;
    }

    RunConfig cfg;
    const std::string walk = map.text("walk", "uniform");
    if (walk == "uniform")
        cfg.walk = WalkKind::Uniform;
    else if (walk == "gqw" || walk == "geodesic")
        cfg.walk = WalkKind::Geodesic;
    else
        throw ConfigError(source + ": walk must be 'uniform' or 'gqw', got '" + walk + "'");

    cfg.width = map.number("width", cfg.width);
    cfg.height = map.number("height", cfg.height);
    if (map.has("epsilon") && map.has("delta"))
        throw ConfigError(source + ": give either epsilon or delta, not both");
    if (map.has("delta")) {
        const double d = map.number("delta", 0.0);
        cfg.epsilon = cfg.walk == WalkKind::Uniform ? d : d * d;
        if (!(d > 0.0)) throw ConfigError(source + ": delta must be positive");
    } else {
        cfg.epsilon = map.number("epsilon", cfg.epsilon);
    }
    cfg.steps = map.number("steps", cfg.steps);
    cfg.deformation = map.text("deformation", cfg.deformation);
    cfg.snapshot_every = map.number("snapshot_every", cfg.snapshot_every);
    cfg.output_dir = map.text("output_dir", cfg.output_dir.string());
    cfg.seed = map.number<std::uint64_t>("seed", cfg.seed);
    cfg.workers = map.number("workers", cfg.workers);
    cfg.time = map.number("time", cfg.time);

    const std::string initial = map.text("initial", "point");
    if (initial == "point") {
        PointSpec p{{cfg.width / 2, cfg.height / 2}, 0, 0};
        p.cell.i = map.number("point_i", p.cell.i);
        p.cell.j = map.number("point_j", p.cell.j);
        p.label = map.number("point_label", p.label);
        p.slot = map.number("point_slot", p.slot);
        cfg.initial = p;
    } else if (initial == "rectangle") {
        RectangleSpec r;
        r.fraction = map.number("rectangle_fraction", r.fraction);
        r.slot = map.number("rectangle_slot", r.slot);
        cfg.initial = r;
    } else if (initial == "plane_wave") {
        PlaneWaveSpec w;
        const double period_x = 2.0 * cfg.delta() * cfg.width;
        const double period_y = std::numbers::sqrt3 * cfg.delta() * cfg.height;
        if ((map.has("kx") || map.has("ky")) && (map.has("mode_x") || map.has("mode_y")))
            throw ConfigError(source + ": give the wave vector as kx/ky or as mode_x/mode_y, not both");
        if (map.has("kx") || map.has("ky")) {
            w.kx = map.number("kx", 0.0);
            w.ky = map.number("ky", 0.0);
        } else {
            cfg.wave_modes = {static_cast<int>(map.number("mode_x", 1)), static_cast<int>(map.number("mode_y", 1))};
            w.kx = 2.0 * std::numbers::pi * cfg.wave_modes->first / period_x;
            w.ky = 2.0 * std::numbers::pi * cfg.wave_modes->second / period_y;
        }
        const auto c = map.numbers("chi", 4, {1.0, 0.0, 0.0, 0.0});
        w.chi = {{cplx(c[0], c[1]), cplx(c[2], c[3])}};
        if (w.chi.norm2() == 0.0) throw ConfigError(source + ": chi must be nonzero");
        cfg.initial = w;
    } else if (initial == "random") {
        cfg.initial = RandomSpec{cfg.seed};
    } else {
        throw ConfigError(source + ": initial must be point, rectangle, plane_wave or random, got '" + initial + "'");
    }

    map.reject_unused();
    validate(cfg);
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    return parse_config(in, path.string());
}

void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (cfg.width < 1 || cfg.height < 1) fail("width and height must be positive");
    if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) fail("epsilon must be positive");
    if (cfg.steps < 0) fail("steps must be >= 0");
    if (cfg.snapshot_every < 0) fail("snapshot_every must be >= 1 (or 0 for first and last only)");
    if (cfg.workers < 0) fail("workers must be >= 0");
    if (!(cfg.time > 0.0)) fail("time must be positive");
    if (cfg.walk == WalkKind::Geodesic) {
        if (cfg.steps % 2 != 0) fail("gqw runs advance two steps at a time; steps must be even");
        if (cfg.snapshot_every % 2 != 0) fail("gqw runs need an even snapshot_every");
    }
    if (const auto* p = std::get_if<PointSpec>(&cfg.initial)) {
        if (p->cell.i < 0 || p->cell.i >= cfg.width || p->cell.j < 0 || p->cell.j >= cfg.height)
            fail("point source lies outside the grid");
        if (p->label < 0 || p->label > 1 || p->slot < 0 || p->slot > 2) fail("point label/slot out of range");
    }
    if (const auto* r = std::get_if<RectangleSpec>(&cfg.initial)) {
        if (!(r->fraction > 0.0 && r->fraction <= 1.0)) fail("rectangle_fraction must be in (0, 1]");
        if (r->slot < 0 || r->slot > 2) fail("rectangle_slot must be 0, 1 or 2");
    }
}

Mat2 continuum_readout(WalkKind walk) {
    return walk == WalkKind::Uniform ? basis_change_U().adjoint() : pauli_z();
}

double DensitySnapshot::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

DensitySnapshot take_snapshot(const WalkState& state, long step) {
    return {state.grid().width(), state.grid().height(), step, cell_density(state)};
}

void write_density_csv(std::ostream& out, const DensitySnapshot& snap) {
    out << "qwdensity v1 " << snap.width << ' ' << snap.height << ' ' << snap.step << '\n';
    char buf[64];
    std::string row;
    for (int j = 0; j < snap.height; ++j) {
        row.clear();
        for (int i = 0; i < snap.width; ++i) {
            if (i) row += ',';
            const auto res = std::to_chars(buf, buf + sizeof buf, snap.values[static_cast<std::size_t>(j) * snap.width + i]);
            row.append(buf, res.ptr);
        }
        row += '\n';
        out << row;
    }
}

DensitySnapshot read_density_csv(std::istream& in, const std::string& source) {
    auto fail = [&](const std::string& what) -> void { throw ConfigError(source + ": " + what); };
    std::string line;
    if (!std::getline(in, line)) fail("empty file");
    std::istringstream head(line);
    std::string magic, version;
    DensitySnapshot snap;
    head >> magic >> version >> snap.width >> snap.height >> snap.step;
    if (magic != "qwdensity" || version != "v1" || !head || snap.width < 1 || snap.height < 1)
        fail("bad header '" + line + "'");
    snap.values.reserve(static_cast<std::size_t>(snap.width) * snap.height);
    for (int j = 0; j < snap.height; ++j) {
        if (!std::getline(in, line)) fail("missing row " + std::to_string(j));
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != snap.width)
            fail("row " + std::to_string(j) + " has " + std::to_string(cells.size()) + " values");
        for (const auto& c : cells) {
            double v = 0.0;
            if (!parse_number(c, v) || v < 0.0) fail("row " + std::to_string(j) + ": bad value '" + c + "'");
            snap.values.push_back(v);
        }
    }
    return snap;
}

namespace {

fs::path write_snapshot(const fs::path& dir, const DensitySnapshot& snap) {
    char name[40];
    std::snprintf(name, sizeof name, "density_%06ld.csv", snap.step);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_density_csv(out, snap);
    return path;
}

void check_norm(const WalkState& s, long step) {
    const double n = total_norm(s);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6)
        throw NumericalError("norm drifted to " + std::to_string(n) + " at step " + std::to_string(step));
}

}  // namespace

SimulationSummary run_simulation(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    const TriangularGrid grid(cfg.width, cfg.height, cfg.delta());

    InitialSpec init = cfg.initial;
    if (auto* w = std::get_if<PlaneWaveSpec>(&init)) {
        if (!is_commensurate(grid, w->kx, w->ky)) throw ConfigError("plane wave is not periodic on the grid");
        // the config names the continuum spinor; store what the walk carries
        w->chi = continuum_readout(cfg.walk).adjoint() * w->chi;
    }
    WalkState state = make_initial_state(grid, init);

    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create " + cfg.output_dir.string() + ": " + ec.message());

    SimulationSummary sum;
    sum.steps = cfg.steps;
    sum.snapshots.push_back(write_snapshot(cfg.output_dir, take_snapshot(state, 0)));

    const long every = cfg.snapshot_every > 0 ? cfg.snapshot_every : std::max(cfg.steps, 1L);
    std::optional<DiracWalk> uniform;
    std::optional<GeodesicWalk> geodesic;
    if (cfg.walk == WalkKind::Uniform)
        uniform.emplace(UniformWalkParams{}, cfg.workers);
    else
        geodesic.emplace(grid, GQWParams{compile_schedule(resolve_field(cfg.deformation), cfg.epsilon)}, cfg.workers);

    double stepping = 0.0;
    long step = 0;
    while (step < cfg.steps) {
        const long chunk = std::min(every - step % every, cfg.steps - step);
        const auto t0 = std::chrono::steady_clock::now();
        if (uniform)
            uniform->run(state, chunk);
        else
            geodesic->run(state, chunk / 2);
        stepping += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        step += chunk;
        check_norm(state, step);
        if (step % every == 0 || step == cfg.steps)
            sum.snapshots.push_back(write_snapshot(cfg.output_dir, take_snapshot(state, step)));
    }

    sum.final_norm = total_norm(state);
    sum.step_seconds = stepping;
    sum.steps_per_second = stepping > 0.0 ? cfg.steps / stepping : 0.0;
    sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream out(cfg.output_dir / "summary.txt");
    if (!out) throw ConfigError("cannot write summary.txt");
    std::ostringstream text;
    text << std::setprecision(17);
    text << "walk = " << to_string(cfg.walk) << '\n'
         << "width = " << cfg.width << '\n'
         << "height = " << cfg.height << '\n'
         << "epsilon = " << cfg.epsilon << '\n'
         << "delta = " << cfg.delta() << '\n'
         << "steps = " << cfg.steps << '\n'
         << "workers = " << (cfg.workers > 0 ? cfg.workers : default_workers()) << '\n'
         << "final_norm = " << sum.final_norm << '\n'
         << std::setprecision(6) << "wall_seconds = " << sum.wall_seconds << '\n'
         << "step_seconds = " << sum.step_seconds << '\n'
         << "steps_per_second = " << sum.steps_per_second << '\n';
    out << text.str();
    log << text.str();
    return sum;
}

bool ConvergenceResult::strictly_decreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].error < rows[i - 1].error)) return false;
    return true;
}

namespace {

int exact_count(double v, const std::string& what) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-6 * std::max(1.0, std::abs(v)) || r < 1.0)
        throw ConfigError(what + " is not a positive integer (" + std::to_string(v) + ")");
    return static_cast<int>(r);
}

DeformationMatrix constant_value(const DeformationField& field, double lx, double ly) {
    const DeformationMatrix m = field(0.0, 0.0, 0.0);
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b)
            for (double t : {0.0, 0.5}) {
                const double x = (a / 4.0 - 0.5) * lx, y = (b / 4.0 - 0.5) * ly;
                if (field(t, x, y).max_abs_diff(m) > 1e-12)
                    throw ConfigError("gqw convergence needs a constant deformation; '" + field.name() + "' varies");
            }
    return m;
}

}  // namespace

ConvergenceResult run_convergence(const RunConfig& cfg, const std::vector<double>& epsilons, int workers) {
    validate(cfg);
    if (epsilons.size() < 2) throw ConfigError("convergence needs at least two epsilon values");
    for (double e : epsilons)
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("epsilon values must be positive");
    const auto* wave = std::get_if<PlaneWaveSpec>(&cfg.initial);
    if (!wave) throw ConfigError("convergence needs initial = plane_wave");

    const bool uniform = cfg.walk == WalkKind::Uniform;
    auto delta_of = [&](double e) { return uniform ? e : std::sqrt(e); };
    const double lx = 2.0 * delta_of(epsilons[0]) * cfg.width;
    const double ly = std::numbers::sqrt3 * delta_of(epsilons[0]) * cfg.height;

    std::optional<DeformationMatrix> lambda;
    std::optional<DeformationField> field;
    if (!uniform) {
        field.emplace(resolve_field(cfg.deformation));
        lambda = constant_value(*field, lx, ly);
    }
    const Mat2 readout = continuum_readout(cfg.walk);

    ConvergenceResult res;
    res.kx = wave->kx;
    res.ky = wave->ky;
    if (cfg.wave_modes) {
        res.kx = 2.0 * std::numbers::pi * cfg.wave_modes->first / lx;
        res.ky = 2.0 * std::numbers::pi * cfg.wave_modes->second / ly;
    }
    for (double eps : epsilons) {
        ConvergenceRow row;
        row.epsilon = eps;
        row.delta = delta_of(eps);
        const std::string tag = " at epsilon " + std::to_string(eps);
        row.width = exact_count(lx / (2.0 * row.delta), "grid width" + tag);
        row.height = exact_count(ly / (std::numbers::sqrt3 * row.delta), "grid height" + tag);
        if (row.height % 2 != 0) throw ConfigError("grid height" + tag + " must be even");
        row.steps = exact_count(cfg.time / eps, "step count" + tag);
        if (!uniform && row.steps % 2 != 0) throw ConfigError("gqw step count" + tag + " must be even");

        const TriangularGrid grid(row.width, row.height, row.delta);
        if (!is_commensurate(grid, res.kx, res.ky))
            throw ConfigError("wave vector is not periodic on the box" + tag);
        PlaneWaveSpec init = *wave;
        init.kx = res.kx;
        init.ky = res.ky;
        init.chi = readout.adjoint() * wave->chi;
        WalkState state = make_initial_state(grid, init);
        const double t = row.steps * eps;
        const FieldGeometry geo = sector_geometry(grid);
        SpinorField exact;
        if (uniform) {
            DiracWalk(UniformWalkParams{}, workers).run(state, row.steps);
            exact = flat_plane_wave(geo, res.kx, res.ky, wave->chi, t);
        } else {
            GeodesicWalk(grid, GQWParams{compile_schedule(*field, eps)}, workers).run(state, row.steps / 2);
            exact = constant_deformation_plane_wave(geo, *lambda, res.kx, res.ky, wave->chi, t);
        }
        check_norm(state, row.steps);
        row.error = l2_error(walk_sector_field(state, readout, t), exact);
        res.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
        res.ratios.push_back(res.rows[i].error / res.rows[i + 1].error);
    return res;
}

void print_convergence(std::ostream& out, const ConvergenceResult& r) {
    char line[160];
    std::snprintf(line, sizeof line, "# k = (%.10g, %.10g)\n", r.kx, r.ky);
    out << line;
    out << "# epsilon        delta          width  height  steps    l2_error      ratio\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        char ratio[32] = "-";
        if (i > 0) std::snprintf(ratio, sizeof ratio, "%.4f", r.ratios[i - 1]);
        std::snprintf(line, sizeof line, "%-14.8g %-14.8g %6d  %6d  %7ld  %.6e  %s\n", row.epsilon, row.delta,
                      row.width, row.height, row.steps, row.error, ratio);
        out << line;
    }
}

SampleGrid default_sample_grid(const DeformationField& field) {
    SampleGrid g;
    const Box& b = field.domain();
    if (std::isfinite(b.xmin) && std::isfinite(b.xmax) && b.xmax > b.xmin) {
        g.x0 = b.xmin;
        g.dx = (b.xmax - b.xmin) / (g.nx - 1);
    }
    if (std::isfinite(b.ymin) && std::isfinite(b.ymax) && b.ymax > b.ymin) {
        g.y0 = b.ymin;
        g.dy = (b.ymax - b.ymin) / (g.ny - 1);
    }
    return g;
}

CompileScheduleResult compile_schedule_file(const std::string& field_source, double epsilon,
                                            const fs::path& out_path, const SampleGrid& grid,
                                            std::size_t check_points) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
    if (grid.nx < 1 || grid.ny < 1 || grid.nt < 1) throw ConfigError("sample grid sizes must be positive");
    if (!(grid.dx > 0.0) || !(grid.dy > 0.0) || !(grid.dt > 0.0))
        throw ConfigError("sample grid spacings must be positive");
    const DeformationField field = resolve_field(field_source);
    const AngleSchedule schedule = compile_schedule(field, epsilon);

    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path.string());
    write_schedule_samples(out, schedule, grid);
    if (!out) throw ConfigError("error while writing " + out_path.string());

    const Box region{grid.x0, grid.x0 + (grid.nx - 1) * grid.dx, grid.y0, grid.y0 + (grid.ny - 1) * grid.dy};
    const double tmax = field.time_dependent() ? (grid.nt - 1) * grid.dt : 0.0;
    auto points = random_sample_points(region, check_points, 1, tmax);
    return {verify_duality(schedule, field, points), grid};
}

void print_duality_report(std::ostream& out, const DualityReport& r) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "points            %zu\nlambda_residual   %.3e\ngauge_residual    %.3e\n"
                  "eigen_residual    %.3e\nrotation_residual %.3e\n",
                  r.points, r.lambda_residual, r.gauge_residual, r.eigen_residual, r.rotation_residual);
    out << line;
}

bool CheckReport::passed() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed(); });
}

namespace {

double unitarity_residual(const Mat2& m) { return (m.adjoint() * m).max_abs_diff(Mat2::identity()); }

// Structural checks on a small odd-height grid, where the torus is sheared.
void lattice_checks(CheckReport& rep) {
    double involution = 0.0, geometry = 0.0, partner = 0.0;
    for (const auto& [w, h] : {std::pair{5, 4}, std::pair{4, 3}}) {
        const TriangularGrid g(w, h, 0.5);
        for (std::size_t id = 0; id < g.cell_count(); ++id)
            for (int label = 0; label < 2; ++label)
                for (int s = 0; s < 3; ++s) {
                    const TriangleRef v{g.cell_at(id), label};
                    const TriangleRef n = g.neighbor(v, s);
                    involution = std::max(involution, g.neighbor(n, s) == v && n.label != label ? 0.0 : 1.0);
                    const Point2 a = g.edge_center({v.cell, label, s});
                    const Point2 b = g.edge_center({n.cell, n.label, s});
                    const Point2 d = g.min_image({a.x - b.x, a.y - b.y});
                    geometry = std::max(geometry, std::hypot(d.x, d.y));
                    if (label == 0)
                        partner = std::max(partner, g.partner_cell(id, s) == g.cell_id(n.cell) ? 0.0 : 1.0);
                }
    }
    rep.items.push_back({"neighbor map is an involution", involution, 0.0});
    rep.items.push_back({"shared edges have one midpoint", geometry, 1e-12});
    rep.items.push_back({"kernel partner table", partner, 0.0});

    const TriangularGrid g(6, 4, 0.25);
    WalkState s = make_initial_state(g, RandomSpec{7});
    WalkState r = rotate(rotate(rotate(s)));
    double back = 0.0;
    for (std::size_t k = 0; k < s.amplitudes().size(); ++k)
        back = std::max(back, std::abs(r.amplitudes()[k] - s.amplitudes()[k]));
    rep.items.push_back({"R^3 = I", back, 0.0});

    WalkState u = s;
    DiracWalk(UniformWalkParams{}, 1).run(u, 50);
    rep.items.push_back({"uniform walk norm, 50 steps", std::abs(total_norm(u) - 1.0), 1e-12});
    WalkState q = s;
    GeodesicWalk(g, GQWParams{compile_schedule(sphere_deformation(), 0.0625)}, 1).run(q, 25);
    rep.items.push_back({"gqw norm, 25 double steps", std::abs(total_norm(q) - 1.0), 1e-12});
}

}  // namespace

CheckReport run_checks(const CheckOptions& opts) {
    CheckReport rep;
    const Mat2 c = coin_C();
    const Mat2 u = basis_change_U();
    const Mat2 sz = pauli_z();
    const Mat2 i2 = Mat2::identity();

    rep.items.push_back({"C^3 = I", (c * c * c).max_abs_diff(i2), 1e-12});
    double unitary = 0.0;
    for (const Mat2& m : {c, u, coin_prime(), hadamard_H(), q_matrix()})
        unitary = std::max(unitary, unitarity_residual(m));
    rep.items.push_back({"C, U, C', H, Q unitary", unitary, 1e-12});
    const Mat2 cp = coin_prime();
    rep.items.push_back({"U^dag C'^3 U = I", (u.adjoint() * cp * cp * cp * u).max_abs_diff(i2), 1e-12});

    // tau_i from the basis change against the closed forms
    const Mat2 from_u[3] = {c * c * u.adjoint() * sz * u * c, c * u.adjoint() * sz * u * c * c, u.adjoint() * sz * u};
    double tau_res = 0.0;
    for (int i = 0; i < 3; ++i) tau_res = std::max(tau_res, from_u[i].max_abs_diff(tau_with_kappa(i, opts.kappa)));
    rep.items.push_back({"tau_i = C^a U^dag sigma_z U C^b closed forms", tau_res, 1e-12});

    Mat2 sx = Mat2::zero(), sy = Mat2::zero();
    double tau_props = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Mat2 t = tau_with_kappa(k, opts.kappa);
        sx = sx + std::cos(2.0 * k * std::numbers::pi / 3.0) * t;
        sy = sy + std::sin(2.0 * k * std::numbers::pi / 3.0) * t;
        tau_props = std::max({tau_props, std::abs(t.trace()), t.max_abs_diff(t.adjoint())});
    }
    const double sum_res = std::max(sx.max_abs_diff(pauli_x()), sy.max_abs_diff(pauli_y()));
    rep.items.push_back({"sum cos(2k pi/3) tau_k = sigma_x, sum sin = sigma_y", sum_res, 1e-12});
    rep.items.push_back({"tau_i Hermitian and traceless", tau_props, 1e-12});

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> angle(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    double eig = 0.0, conj = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double th = angle(rng);
        const Mat2 b = beta(th);
        const auto ev = hermitian_eigenvalues(b);
        eig = std::max({eig, std::abs(ev[0] + 1.0), std::abs(ev[1] - 1.0)});
        const Mat2 r = rotation_U(th);
        conj = std::max(conj, b.max_abs_diff(r.adjoint() * sz * r));
    }
    rep.items.push_back({"beta(theta) eigenvalues {-1, 1}", eig, 1e-13});
    rep.items.push_back({"beta(theta) = U^dag sigma_z U", conj, 1e-13});

    std::uniform_real_distribution<double> entry(-3.0, 3.0);
    double round_trip = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const DeformationMatrix m{entry(rng), entry(rng), entry(rng), entry(rng)};
        const LCoefficients l = lambda_to_l(m);
        round_trip = std::max({round_trip, l_to_lambda(l).max_abs_diff(m), std::abs(l[2] + l[1]), std::abs(l[5] + l[4])});
    }
    rep.items.push_back({"lambda -> l -> lambda round trip", round_trip, 1e-14});

    lattice_checks(rep);
    return rep;
}

void print_check_report(std::ostream& out, const CheckReport& r) {
    char line[160];
    for (const auto& item : r.items) {
        std::snprintf(line, sizeof line, "%-4s %-52s %.3e (tol %.0e)\n", item.passed() ? "ok" : "FAIL",
                      item.name.c_str(), item.residual, item.tolerance);
        out << line;
    }
    out << (r.passed() ? "all checks passed\n" : "some checks FAILED\n");
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ScheduleError& e) {
        err << "schedule failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NonUnitaryError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FieldFormatError& e) {
        err << "field error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "out of domain: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace triwalk
