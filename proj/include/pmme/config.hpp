// Experiment configuration: JSON with nested keys, defaults matching the
// qubit thermalization study. See docs/formats.md for the schema.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmme/qcore.hpp"

namespace pmme::config {

// A state given as pure-state amplitudes, a diagonal of probabilities, or a
// full row-major matrix. Values are complex; reals are accepted in JSON.
struct StateSpec {
    enum class Kind { Amplitudes, Diagonal, Matrix };
    Kind kind = Kind::Amplitudes;
    std::vector<Complex> values;

    // Throws ValidationError naming `key` if the state is invalid.
    qcore::DensityMatrix to_density(int dim, const std::string& key) const;
    bool operator==(const StateSpec&) const = default;
};

struct GaussianScenario {
    double center;
    double width;
    bool operator==(const GaussianScenario&) const = default;
};

struct KernelSpec {
    std::string type = "exponential";  // delta | exponential | gaussian | tabulated
    double gamma = 1.0;
    double t0 = 0.0;
    double sigma = 0.5;
    double support = 3.0;
    std::vector<double> samples;
    double spacing = 0.01;
    bool operator==(const KernelSpec&) const = default;
};

struct GeneratorSpec {
    // collision: ℒ = log ξ(τ) / τ of the PSWAP(α) collision map;
    // amplitude_damping: σ₋ jump at rate gamma.
    std::string type = "collision";
    double gamma = 1.0;
    bool operator==(const GeneratorSpec&) const = default;
};

struct SolverSpec {
    double t_max = 10.0;
    double dt = 0.05;
    std::string method = "talbot";  // talbot | dehoog
    int nodes = 64;
    double direct_dt = 0.002;
    double tolerance = 1e-5;        // solve-compare pass threshold
    bool operator==(const SolverSpec&) const = default;
};

struct ExperimentConfig {
    int system_dim = 2;
    int ancilla_dim = 2;
    StateSpec initial_state = default_initial_state();
    StateSpec ancilla_state = default_ancilla_state();

    double alpha = 0.1;
    double beta = 0.9;
    double tau = 0.01;
    int collisions = 200;

    std::string basis = "x";  // x | z | custom
    std::vector<std::vector<Complex>> custom_basis;
    std::string orientation = "by_ancilla";  // by_ancilla | by_elapsed

    // Unset scenarios follow the collision count: center ⌈0.1 N⌉ (early) or
    // ⌈0.5 N⌉ (intermediate), width 0.05 N.
    std::optional<GaussianScenario> early;
    std::optional<GaussianScenario> intermediate;

    KernelSpec kernel;
    GeneratorSpec generator;
    SolverSpec solver;

    std::string output_path;
    std::uint64_t seed = 0;  // reserved; every run is deterministic

    GaussianScenario early_scenario() const;
    GaussianScenario intermediate_scenario() const;

    // Cross-field validation; parse_config calls it.
    void validate() const;

    static StateSpec default_initial_state();
    static StateSpec default_ancilla_state();

    bool operator==(const ExperimentConfig&) const = default;
};

// Empty or whitespace-only text yields the defaults. Unknown keys, wrong
// types and invalid values throw ValidationError naming the key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace pmme::config
