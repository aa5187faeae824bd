// pmme command-line front end. Exit codes: 0 success, 2 validation failure,
// 3 numerical failure or tolerance miss.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pmme/config.hpp"
#include "pmme/errors.hpp"
#include "pmme/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

using pmme::config::ExperimentConfig;

ExperimentConfig load(const std::string& path) {
    return path.empty() ? pmme::config::parse_config_text("") : pmme::config::parse_config(path);
}

// --out wins over output.path; neither means stdout.
template <class Writer>
void emit(const ExperimentConfig& cfg, const std::string& out_flag, Writer&& write) {
    const std::string path = out_flag.empty() ? cfg.output_path : out_flag;
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw pmme::ValidationError("cannot open output file '" + path + "'");
    write(f);
}

std::string defaults_text() {
    return "Defaults (empty config): |psi0> = (|0> + 2|1>)/sqrt5, eta = diag(0.6, 0.4), alpha = 0.1, beta = 0.9,\n"
           "tau = 0.01, N = 200 collisions, measurement basis x, Gaussian weights early center ceil(0.1 N),\n"
           "intermediate center ceil(0.5 N), width 0.05 N; exponential kernel gamma = 1; generator log(xi)/tau;\n"
           "solver t_max = 10, dt = 0.05, Talbot with 64 nodes, direct_dt = 0.002, tolerance 1e-5.\n"
           "Config schema: docs/formats.md. Log level: PMME_LOG_LEVEL.\n"
           "Exit codes: 0 success, 2 validation failure, 3 numerical failure.";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-Markovian master equation toolkit"};
    app.footer(defaults_text());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (omit for defaults)")->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "CSV output path (default: output.path, else stdout)");
    };

    auto* thermalize = app.add_subcommand("thermalize", "Fidelity vs collisions: markov, pm-early, pm-intermediate");
    auto* cp = app.add_subcommand("cp-scan", "Minimum Choi eigenvalue of the dynamical map over the solver grid");
    auto* compare = app.add_subcommand("solve-compare", "Laplace-domain solution vs direct integrator");
    auto* simulate = app.add_subcommand("simulate", "Raw discrete collision chain, state per collision");
    for (auto* s : {thermalize, cp, compare, simulate}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        const auto cfg = load(config_path);
        if (thermalize->parsed()) {
            const auto r = pmme::experiments::run_thermalization(cfg);
            emit(cfg, out_path, [&](std::ostream& o) { pmme::experiments::write_thermalization_csv(o, r); });
        } else if (cp->parsed()) {
            const auto r = pmme::experiments::run_cp_scan(cfg);
            emit(cfg, out_path, [&](std::ostream& o) { pmme::experiments::write_cp_scan_csv(o, r); });
        } else if (compare->parsed()) {
            const auto r = pmme::experiments::run_solver_compare(cfg);
            emit(cfg, out_path, [&](std::ostream& o) { pmme::experiments::write_compare_csv(o, r); });
            if (!r.passed()) {
                std::cerr << "solve-compare: max trace distance " << r.max_distance << " exceeds tolerance "
                          << r.tolerance << '\n';
                return kExitNumerical;
            }
        } else if (simulate->parsed()) {
            const auto chains = pmme::experiments::simulate(cfg);
            emit(cfg, out_path, [&](std::ostream& o) { pmme::experiments::write_simulation_csv(o, chains, cfg.tau); });
        }
    } catch (const pmme::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const pmme::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
