// Experiment harness: thermalization study, CP scans, solver comparison and
// the raw discrete chain, each driven by an ExperimentConfig, plus CSV output.

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmme/collision.hpp"
#include "pmme/config.hpp"
#include "pmme/solver.hpp"

namespace pmme::experiments {

using config::ExperimentConfig;

// Pieces of the collision model named by a config.
struct CollisionSetup {
    collision::CollisionSpec spec;
    collision::MeasurementSpec measurement;
    qcore::DensityMatrix eta;
    qcore::DensityMatrix rho0;
};

// Throws ValidationError for non-matching dimensions (the partial swap needs
// d_S = d_A) or a malformed measurement basis.
CollisionSetup build_collision(const ExperimentConfig& cfg);

kernel::MemoryKernel build_kernel(const config::KernelSpec& spec);

// ℒ from the configured generator, ℰ from the collision measurement channel.
solver::PMMEProblem build_problem(const ExperimentConfig& cfg);

solver::SolverOptions build_solver_options(const ExperimentConfig& cfg);

struct FidelityRow {
    int n;
    double t;
    double fidelity;
};

struct FidelityTrajectory {
    std::string scenario;
    std::vector<FidelityRow> rows;

    // First collision index with fidelity ≥ threshold, if any.
    std::optional<int> first_crossing(double threshold) const;
    double final_fidelity() const { return rows.empty() ? 0.0 : rows.back().fidelity; }
};

struct ThermalizationResult {
    static constexpr double kThreshold = 0.99;
    static constexpr double kStationarityTolerance = 1e-9;

    FidelityTrajectory markov;
    FidelityTrajectory pm_early;
    FidelityTrajectory pm_intermediate;
    // max |1 − F| over all three scenarios started from ρ₀ = η.
    double stationarity_deviation = 0.0;

    bool all_thermalize() const;
    bool ordering_holds() const;  // pm-early ≤ pm-intermediate ≤ markov
    bool stationary() const { return stationarity_deviation <= kStationarityTolerance; }
};

// Fidelity F(ρ_S(n), η) for n = 0..N in the Markovian chain and the two
// Gaussian-weighted measurement scenarios. The scenarios run concurrently.
ThermalizationResult run_thermalization(const ExperimentConfig& cfg);

struct CpScanResult {
    solver::CpScan scan;
};

CpScanResult run_cp_scan(const ExperimentConfig& cfg);

struct CompareRow {
    double t;
    double distance;
};

struct SolverCompareResult {
    std::vector<CompareRow> rows;
    double max_distance = 0.0;
    double tolerance = 0.0;
    double error_estimate = 0.0;  // inversion error estimate
    bool passed() const { return max_distance <= tolerance; }
};

// Laplace-domain solution against the direct integrator on the solver grid.
// The grid spacing must be a multiple of the integrator step.
SolverCompareResult run_solver_compare(const ExperimentConfig& cfg);

struct ChainTrajectory {
    std::string scenario;
    std::vector<Matrix> states;  // n = 0..N
};

// Raw discrete chain: Markovian and both measurement scenarios.
std::vector<ChainTrajectory> simulate(const ExperimentConfig& cfg);

// CSV writers: header row, 17 significant digits, LF line endings, summary
// lines as trailing '#' comments.
void write_thermalization_csv(std::ostream& out, const ThermalizationResult& result);
void write_cp_scan_csv(std::ostream& out, const CpScanResult& result);
void write_compare_csv(std::ostream& out, const SolverCompareResult& result);
void write_simulation_csv(std::ostream& out, const std::vector<ChainTrajectory>& chains, double tau);

}  // namespace pmme::experiments
