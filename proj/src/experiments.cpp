#include "pmme/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "pmme/errors.hpp"
#include "pmme/lindblad.hpp"
#include "pmme/log.hpp"

namespace pmme::experiments {

namespace {

using collision::DiscreteKernelWeights;
using qcore::DensityMatrix;

std::string fmt17(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

FidelityTrajectory fidelity_of(std::string scenario, const std::vector<DensityMatrix>& states,
                               const DensityMatrix& eta, double tau) {
    FidelityTrajectory out{std::move(scenario), {}};
    out.rows.reserve(states.size());
    for (std::size_t n = 0; n < states.size(); ++n) {
        const int ni = static_cast<int>(n);
        out.rows.push_back({ni, ni * tau, qcore::fidelity(states[n], eta)});
    }
    return out;
}

struct Scenarios {
    FidelityTrajectory markov, early, intermediate;
};

// Three independent chains; each task owns its inputs.
Scenarios run_scenarios(const CollisionSetup& setup, const DensityMatrix& rho0, const ExperimentConfig& cfg) {
    const int n = cfg.collisions;
    const auto early_s = cfg.early_scenario();
    const auto inter_s = cfg.intermediate_scenario();
    const double tau = setup.spec.tau;

    auto markov = std::async(std::launch::async, [&] {
        return fidelity_of("markov", collision::markov_evolve(setup.spec, setup.eta, rho0, n), setup.eta, tau);
    });
    auto early = std::async(std::launch::async, [&] {
        const auto w = collision::gaussian_weights(early_s.center, early_s.width, n);
        return fidelity_of("pm-early",
                           collision::probabilistic_trajectory(setup.spec, setup.measurement, setup.eta, rho0, w),
                           setup.eta, tau);
    });
    auto inter = std::async(std::launch::async, [&] {
        const auto w = collision::gaussian_weights(inter_s.center, inter_s.width, n);
        return fidelity_of("pm-intermediate",
                           collision::probabilistic_trajectory(setup.spec, setup.measurement, setup.eta, rho0, w),
                           setup.eta, tau);
    });
    // get() on every future before rethrowing so no task outlives its inputs.
    std::exception_ptr err;
    Scenarios out;
    try { out.markov = markov.get(); } catch (...) { err = std::current_exception(); }
    try { out.early = early.get(); } catch (...) { if (!err) err = std::current_exception(); }
    try { out.intermediate = inter.get(); } catch (...) { if (!err) err = std::current_exception(); }
    if (err) std::rethrow_exception(err);
    return out;
}

double max_deviation_from_one(const FidelityTrajectory& f) {
    double m = 0.0;
    for (const auto& r : f.rows) m = std::max(m, std::abs(1.0 - r.fidelity));
    return m;
}

collision::WeightOrientation orientation_of(const std::string& tag) {
    return tag == "by_elapsed" ? collision::WeightOrientation::ByElapsed : collision::WeightOrientation::ByAncilla;
}

}  // namespace

CollisionSetup build_collision(const ExperimentConfig& cfg) {
    cfg.validate();
    const int d = cfg.system_dim;
    const auto eta = cfg.ancilla_state.to_density(cfg.ancilla_dim, "ancilla.state");
    const auto rho0 = cfg.initial_state.to_density(d, "system.initial_state");
    collision::CollisionSpec spec(d, cfg.ancilla_dim, collision::pswap(cfg.alpha, d), cfg.tau);
    const auto pre = collision::pswap(cfg.beta, d);
    if (cfg.basis == "x") return {spec, collision::MeasurementSpec::sigma_x(pre), eta, rho0};
    if (cfg.basis == "z") return {spec, collision::MeasurementSpec::sigma_z(pre), eta, rho0};
    std::vector<Vector> basis;
    for (const auto& v : cfg.custom_basis) {
        Vector b(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) b(static_cast<Eigen::Index>(i)) = v[i];
        basis.push_back(b);
    }
    try {
        return {spec, collision::MeasurementSpec(std::move(basis), pre), eta, rho0};
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: 'measurement.custom_basis' ") + e.what());
    }
}

kernel::MemoryKernel build_kernel(const config::KernelSpec& k) {
    if (k.type == "delta") return kernel::MemoryKernel::dirac_delta();
    if (k.type == "exponential") return kernel::MemoryKernel::exponential(k.gamma);
    if (k.type == "gaussian") return kernel::MemoryKernel::truncated_gaussian(k.t0, k.sigma, k.support);
    if (k.type == "tabulated") {
        try {
            return kernel::MemoryKernel::tabulated(k.samples, k.spacing);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("config: 'kernel.samples' ") + e.what());
        }
    }
    throw ValidationError("config: unknown kernel type '" + k.type + "'");
}

solver::PMMEProblem build_problem(const ExperimentConfig& cfg) {
    const auto setup = build_collision(cfg);
    const auto e_map = collision::measurement_channel(setup.spec, setup.measurement, setup.eta);
    qcore::Superoperator generator = cfg.generator.type == "amplitude_damping"
        ? lindblad::build_superoperator(lindblad::amplitude_damping(cfg.generator.gamma))
        : lindblad::from_collision_map(collision::collision_map(setup.spec, setup.eta), cfg.tau);
    return solver::PMMEProblem::create(generator, e_map, build_kernel(cfg.kernel));
}

solver::SolverOptions build_solver_options(const ExperimentConfig& cfg) {
    solver::SolverOptions o;
    o.method = cfg.solver.method == "dehoog" ? solver::InversionMethod::DeHoog : solver::InversionMethod::Talbot;
    o.nodes = cfg.solver.nodes;
    return o;
}

std::optional<int> FidelityTrajectory::first_crossing(double threshold) const {
    for (const auto& r : rows) {
        if (r.fidelity >= threshold) return r.n;
    }
    return std::nullopt;
}

bool ThermalizationResult::all_thermalize() const {
    return markov.final_fidelity() >= kThreshold && pm_early.final_fidelity() >= kThreshold &&
           pm_intermediate.final_fidelity() >= kThreshold;
}

bool ThermalizationResult::ordering_holds() const {
    const auto m = markov.first_crossing(kThreshold);
    const auto e = pm_early.first_crossing(kThreshold);
    const auto i = pm_intermediate.first_crossing(kThreshold);
    if (!m || !e || !i) return false;
    return *e <= *i && *i <= *m;
}

ThermalizationResult run_thermalization(const ExperimentConfig& cfg) {
    if (cfg.system_dim != 2 || cfg.ancilla_dim != 2) {
        throw ValidationError("thermalization: the partial-swap study needs qubit system and ancilla");
    }
    const auto setup = build_collision(cfg);
    ThermalizationResult out;
    auto main = run_scenarios(setup, setup.rho0, cfg);
    out.markov = std::move(main.markov);
    out.pm_early = std::move(main.early);
    out.pm_intermediate = std::move(main.intermediate);

    const auto fixed = run_scenarios(setup, setup.eta, cfg);
    out.stationarity_deviation = std::max({max_deviation_from_one(fixed.markov), max_deviation_from_one(fixed.early),
                                           max_deviation_from_one(fixed.intermediate)});
    log::info("thermalization: final fidelities " + fmt17(out.markov.final_fidelity()) + " " +
              fmt17(out.pm_early.final_fidelity()) + " " + fmt17(out.pm_intermediate.final_fidelity()));
    return out;
}

CpScanResult run_cp_scan(const ExperimentConfig& cfg) {
    const auto problem = build_problem(cfg);
    const auto grid = solver::uniform_grid(cfg.solver.t_max, cfg.solver.dt);
    const auto w = solver::solve_W(problem, grid, build_solver_options(cfg));
    return {solver::cp_scan(problem, w)};
}

SolverCompareResult run_solver_compare(const ExperimentConfig& cfg) {
    const double ratio = cfg.solver.dt / cfg.solver.direct_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
        throw ValidationError("solve-compare: grid mismatch, solver.dt " + fmt17(cfg.solver.dt) +
                              " is not a multiple of solver.direct_dt " + fmt17(cfg.solver.direct_dt));
    }
    const auto problem = build_problem(cfg);
    const auto rho0 = cfg.initial_state.to_density(cfg.system_dim, "system.initial_state");
    const auto grid = solver::uniform_grid(cfg.solver.t_max, cfg.solver.dt);
    const auto w = solver::solve_W(problem, grid, build_solver_options(cfg));
    const auto direct = solver::integrate_pmme_direct(problem, rho0, grid.back(), cfg.solver.direct_dt);

    SolverCompareResult out;
    out.tolerance = cfg.solver.tolerance;
    out.error_estimate = w.max_error_estimate;
    for (const double t : grid) {
        const double d = qcore::trace_distance(solver::propagate(problem, w, rho0, t), direct.at(t));
        out.rows.push_back({t, d});
        out.max_distance = std::max(out.max_distance, d);
    }
    return out;
}

std::vector<ChainTrajectory> simulate(const ExperimentConfig& cfg) {
    const auto setup = build_collision(cfg);
    const int n = cfg.collisions;
    std::vector<ChainTrajectory> out;
    auto to_matrices = [](std::string name, const std::vector<DensityMatrix>& states) {
        ChainTrajectory c{std::move(name), {}};
        for (const auto& s : states) c.states.push_back(s.matrix());
        return c;
    };
    out.push_back(to_matrices("markov", collision::markov_evolve(setup.spec, setup.eta, setup.rho0, n)));
    const std::pair<const char*, config::GaussianScenario> scenarios[] = {
        {"pm-early", cfg.early_scenario()}, {"pm-intermediate", cfg.intermediate_scenario()}};
    for (const auto& [name, sc] : scenarios) {
        const auto w = collision::gaussian_weights(sc.center, sc.width, n);
        if (orientation_of(cfg.orientation) == collision::WeightOrientation::ByAncilla) {
            out.push_back(to_matrices(name, collision::probabilistic_trajectory(setup.spec, setup.measurement,
                                                                                 setup.eta, setup.rho0, w)));
        } else {
            // ByElapsed has no per-collision trajectory: the weight index
            // counts back from the end of the run, so each n is its own run.
            ChainTrajectory c{name, {setup.rho0.matrix()}};
            for (int k = 1; k <= n; ++k) {
                std::vector<double> head(w.weights().begin(), w.weights().begin() + k);
                double sum = 0.0;
                for (double x : head) sum += x;
                if (sum <= 0.0) {
                    c.states.push_back(collision::markov_evolve(setup.spec, setup.eta, setup.rho0, k).back().matrix());
                    continue;
                }
                for (double& x : head) x /= sum;
                c.states.push_back(collision::probabilistic_run(setup.spec, setup.measurement, setup.eta, setup.rho0,
                                                                DiscreteKernelWeights(head), k,
                                                                collision::WeightOrientation::ByElapsed)
                                       .matrix());
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

void write_thermalization_csv(std::ostream& out, const ThermalizationResult& r) {
    out << "n,t,scenario,fidelity\n";
    for (const auto* f : {&r.markov, &r.pm_early, &r.pm_intermediate}) {
        for (const auto& row : f->rows) {
            out << row.n << ',' << fmt17(row.t) << ',' << f->scenario << ',' << fmt17(row.fidelity) << '\n';
        }
    }
    for (const auto* f : {&r.markov, &r.pm_early, &r.pm_intermediate}) {
        const auto c = f->first_crossing(ThermalizationResult::kThreshold);
        out << "# first_crossing_" << f->scenario << '=' << (c ? std::to_string(*c) : "none") << '\n';
    }
    out << "# ordering_pm_early<=pm_intermediate<=markov=" << (r.ordering_holds() ? "true" : "false") << '\n';
    out << "# stationarity_deviation=" << fmt17(r.stationarity_deviation) << '\n';
}

void write_cp_scan_csv(std::ostream& out, const CpScanResult& r) {
    out << "t,min_choi_eigenvalue,verdict\n";
    for (const auto& p : r.scan.points) {
        out << fmt17(p.t) << ',' << fmt17(p.min_eigenvalue) << ','
            << (p.min_eigenvalue >= solver::CpScan::kCpTolerance ? "CP" : "NOT_CP") << '\n';
    }
    out << "# verdict=" << (r.scan.completely_positive ? "CP" : "NOT_CP") << '\n';
    out << "# max_construction_mismatch=" << fmt17(r.scan.max_mismatch) << '\n';
}

void write_compare_csv(std::ostream& out, const SolverCompareResult& r) {
    out << "t,trace_distance\n";
    for (const auto& row : r.rows) out << fmt17(row.t) << ',' << fmt17(row.distance) << '\n';
    out << "# max_trace_distance=" << fmt17(r.max_distance) << '\n';
    out << "# tolerance=" << fmt17(r.tolerance) << '\n';
    out << "# inversion_error_estimate=" << fmt17(r.error_estimate) << '\n';
    out << "# verdict=" << (r.passed() ? "PASS" : "FAIL") << '\n';
}

void write_simulation_csv(std::ostream& out, const std::vector<ChainTrajectory>& chains, double tau) {
    if (chains.empty() || chains.front().states.empty()) return;
    const auto d = chains.front().states.front().rows();
    out << "n,t,scenario";
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) out << ",rho_" << r << c << "_re,rho_" << r << c << "_im";
    out << '\n';
    for (const auto& ch : chains) {
        for (std::size_t n = 0; n < ch.states.size(); ++n) {
            out << n << ',' << fmt17(static_cast<double>(n) * tau) << ',' << ch.scenario;
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index c = 0; c < d; ++c)
                    out << ',' << fmt17(ch.states[n](r, c).real()) << ',' << fmt17(ch.states[n](r, c).imag());
            out << '\n';
        }
    }
}

}  // namespace pmme::experiments
