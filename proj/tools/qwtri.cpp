// Command line front end: simulate, convergence, compile-schedule, check.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "triwalk/harness.hpp"

using namespace triwalk;

namespace {

std::vector<double> parse_epsilons(const std::string& list) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        const std::string tok = list.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ConfigError("bad epsilon '" + tok + "' in --epsilons");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac quantum walks on a periodic triangular lattice"};
    app.require_subcommand(1);

    std::string config_path;
    auto* simulate = app.add_subcommand("simulate", "run a walk and write density snapshots");
    simulate->add_option("--config", config_path, "run configuration (key = value)")->required();

    std::string epsilons;
    auto* convergence = app.add_subcommand("convergence", "plane-wave refinement study");
    convergence->add_option("--config", config_path, "run configuration (key = value)")->required();
    convergence->add_option("--epsilons", epsilons, "comma-separated epsilon values")->required();

    std::string field_source, out_path;
    double epsilon = 0.0;
    SampleGrid grid;
    auto* compile = app.add_subcommand("compile-schedule", "compile a deformation into GQW angles");
    compile->add_option("--field", field_source, "zero, identity, sphere, constant:a,b,c,d or a field file")
        ->required();
    compile->add_option("--epsilon", epsilon, "discretization parameter")->required();
    compile->add_option("--out", out_path, "schedule file to write")->required();
    auto* nx = compile->add_option("--nx", grid.nx, "samples in x");
    auto* ny = compile->add_option("--ny", grid.ny, "samples in y");
    compile->add_option("--nt", grid.nt, "time slices");
    auto* x0 = compile->add_option("--x0", grid.x0, "first sample x");
    auto* y0 = compile->add_option("--y0", grid.y0, "first sample y");
    auto* dx = compile->add_option("--dx", grid.dx, "sample spacing in x");
    auto* dy = compile->add_option("--dy", grid.dy, "sample spacing in y");
    compile->add_option("--dt", grid.dt, "time between slices");

    double kappa_value = kappa();
    auto* check = app.add_subcommand("check", "algebraic identities and small-grid structure");
    check->add_option("--kappa", kappa_value, "kappa used in the tau comparisons (testing hook)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    return run_guarded(
        [&]() -> int {
            if (*simulate) {
                run_simulation(load_config(config_path), std::cout);
                return kExitOk;
            }
            if (*convergence) {
                const RunConfig cfg = load_config(config_path);
                const auto result = run_convergence(cfg, parse_epsilons(epsilons), cfg.workers);
                print_convergence(std::cout, result);
                return kExitOk;
            }
            if (*compile) {
                // Grid options left unset fall back to the field's own box.
                SampleGrid g = default_sample_grid(resolve_field(field_source));
                g.nt = grid.nt;
                g.dt = grid.dt;
                if (nx->count()) g.nx = grid.nx;
                if (ny->count()) g.ny = grid.ny;
                if (x0->count()) g.x0 = grid.x0;
                if (y0->count()) g.y0 = grid.y0;
                if (dx->count()) g.dx = grid.dx;
                if (dy->count()) g.dy = grid.dy;
                const auto res = compile_schedule_file(field_source, epsilon, out_path, g);
                print_duality_report(std::cout, res.report);
                if (!res.report.passes(1e-9)) {
                    std::cerr << "duality conditions violated\n";
                    return kExitNumerical;
                }
                return kExitOk;
            }
            CheckOptions opts;
            opts.kappa = kappa_value;
            const CheckReport rep = run_checks(opts);
            print_check_report(std::cout, rep);
            return rep.passed() ? kExitOk : kExitNumerical;
        },
        std::cerr);
}
