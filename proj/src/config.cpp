#include "pmme/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pmme/errors.hpp"

namespace pmme::config {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ValidationError("config: '" + key + "' " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void require_object(const json& j, const std::string& key) {
    if (!j.is_object()) fail(key, "must be an object");
}

void reject_unknown(const json& j, const std::string& prefix, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError("config: unknown key '" + join(prefix, it.key()) + "'");
        }
    }
}

double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) fail(key, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(key, "must be finite");
    return v;
}

double get_positive(const json& j, const std::string& key) {
    const double v = get_number(j, key);
    if (!(v > 0.0)) fail(key, "must be positive, got " + std::to_string(v));
    return v;
}

double get_non_negative(const json& j, const std::string& key) {
    const double v = get_number(j, key);
    if (v < 0.0) fail(key, "must be non-negative, got " + std::to_string(v));
    return v;
}

int get_positive_int(const json& j, const std::string& key) {
    if (!j.is_number_integer()) fail(key, "must be an integer");
    const auto v = j.get<long long>();
    if (v < 1 || v > 1'000'000) fail(key, "must be a positive integer, got " + std::to_string(v));
    return static_cast<int>(v);
}

std::string get_choice(const json& j, const std::string& key, const std::set<std::string>& choices) {
    if (!j.is_string()) fail(key, "must be a string");
    const auto v = j.get<std::string>();
    if (!choices.count(v)) {
        std::string list;
        for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
        fail(key, "must be one of {" + list + "}, got '" + v + "'");
    }
    return v;
}

Complex get_complex(const json& j, const std::string& key) {
    if (j.is_number()) return get_number(j, key);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {get_number(j[0], key), get_number(j[1], key)};
    }
    fail(key, "entries must be numbers or [re, im] pairs");
}

std::vector<Complex> get_complex_list(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) fail(key, "must be a non-empty array");
    std::vector<Complex> out;
    for (const auto& x : j) out.push_back(get_complex(x, key));
    return out;
}

json complex_to_json(Complex z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

json complex_list_to_json(const std::vector<Complex>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(complex_to_json(z));
    return a;
}

StateSpec parse_state(const json& j, const std::string& key) {
    require_object(j, key);
    if (j.size() != 1) fail(key, "must have exactly one of 'amplitudes', 'diagonal', 'matrix'");
    const auto it = j.begin();
    const std::string sub = join(key, it.key());
    StateSpec s;
    if (it.key() == "amplitudes") {
        s.kind = StateSpec::Kind::Amplitudes;
        s.values = get_complex_list(*it, sub);
    } else if (it.key() == "diagonal") {
        s.kind = StateSpec::Kind::Diagonal;
        s.values = get_complex_list(*it, sub);
    } else if (it.key() == "matrix") {
        s.kind = StateSpec::Kind::Matrix;
        if (!it->is_array() || it->empty()) fail(sub, "must be a non-empty array of rows");
        for (const auto& row : *it) {
            if (!row.is_array() || row.size() != it->size()) fail(sub, "must be a square array of rows");
            for (const auto& x : row) s.values.push_back(get_complex(x, sub));
        }
    } else {
        throw ValidationError("config: unknown key '" + sub + "'");
    }
    return s;
}

json state_to_json(const StateSpec& s) {
    json j = json::object();
    switch (s.kind) {
        case StateSpec::Kind::Amplitudes:
            j["amplitudes"] = complex_list_to_json(s.values);
            break;
        case StateSpec::Kind::Diagonal:
            j["diagonal"] = complex_list_to_json(s.values);
            break;
        case StateSpec::Kind::Matrix: {
            const auto d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(s.values.size()))));
            json rows = json::array();
            for (std::size_t r = 0; r < d; ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < d; ++c) row.push_back(complex_to_json(s.values[r * d + c]));
                rows.push_back(row);
            }
            j["matrix"] = rows;
            break;
        }
    }
    return j;
}

GaussianScenario parse_scenario(const json& j, const std::string& key) {
    require_object(j, key);
    reject_unknown(j, key, {"center", "width"});
    if (!j.contains("center") || !j.contains("width")) fail(key, "needs both 'center' and 'width'");
    return {get_number(j["center"], join(key, "center")), get_positive(j["width"], join(key, "width"))};
}

}  // namespace

// ---------------------------------------------------------------------------

qcore::DensityMatrix StateSpec::to_density(int dim, const std::string& key) const {
    const auto n = static_cast<int>(values.size());
    switch (kind) {
        case Kind::Amplitudes: {
            if (n != dim) fail(key, "has " + std::to_string(n) + " amplitudes for dimension " + std::to_string(dim));
            Vector psi(dim);
            for (int i = 0; i < dim; ++i) psi(i) = values[static_cast<std::size_t>(i)];
            if (std::abs(psi.norm() - 1.0) > 1e-12) {
                fail(key, "amplitudes are not normalized (norm " + std::to_string(psi.norm()) + ")");
            }
            return qcore::DensityMatrix::pure(psi);
        }
        case Kind::Diagonal: {
            if (n != dim) fail(key, "has " + std::to_string(n) + " diagonal entries for dimension " + std::to_string(dim));
            Matrix m = Matrix::Zero(dim, dim);
            for (int i = 0; i < dim; ++i) {
                const Complex p = values[static_cast<std::size_t>(i)];
                if (p.imag() != 0.0 || p.real() < 0.0) fail(key, "diagonal entries must be non-negative reals");
                m(i, i) = p;
            }
            try {
                return qcore::DensityMatrix(m);
            } catch (const ValidationError& e) {
                fail(key, std::string("is not a valid state: ") + e.what());
            }
        }
        case Kind::Matrix: {
            if (n != dim * dim) fail(key, "matrix size does not match dimension " + std::to_string(dim));
            Matrix m(dim, dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) m(r, c) = values[static_cast<std::size_t>(r * dim + c)];
            try {
                return qcore::DensityMatrix(m);
            } catch (const ValidationError& e) {
                fail(key, std::string("is not a valid state: ") + e.what());
            }
        }
    }
    fail(key, "has an unknown representation");
}

StateSpec ExperimentConfig::default_initial_state() {
    return {StateSpec::Kind::Amplitudes, {1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0)}};
}

StateSpec ExperimentConfig::default_ancilla_state() { return {StateSpec::Kind::Diagonal, {0.6, 0.4}}; }

GaussianScenario ExperimentConfig::early_scenario() const {
    if (early) return *early;
    return {std::ceil(0.1 * collisions), 0.05 * collisions};
}

GaussianScenario ExperimentConfig::intermediate_scenario() const {
    if (intermediate) return *intermediate;
    return {std::ceil(0.5 * collisions), 0.05 * collisions};
}

void ExperimentConfig::validate() const {
    if (system_dim < 2 || system_dim > 8) fail("system.dim", "must lie in 2..8");
    if (ancilla_dim < 2 || ancilla_dim > 8) fail("ancilla.dim", "must lie in 2..8");
    if (system_dim != ancilla_dim) fail("ancilla.dim", "must equal system.dim for the partial-swap collision");
    initial_state.to_density(system_dim, "system.initial_state");
    ancilla_state.to_density(ancilla_dim, "ancilla.state");
    if (!std::isfinite(alpha)) fail("collision.alpha", "must be finite");
    if (!std::isfinite(beta)) fail("measurement.beta", "must be finite");
    if (!(tau > 0.0)) fail("collision.tau", "must be positive");
    if (collisions < 1) fail("collision.count", "must be at least 1");
    if (basis == "custom") {
        if (static_cast<int>(custom_basis.size()) != ancilla_dim) {
            fail("measurement.custom_basis", "must contain " + std::to_string(ancilla_dim) + " vectors");
        }
        for (const auto& v : custom_basis) {
            if (static_cast<int>(v.size()) != ancilla_dim) fail("measurement.custom_basis", "vectors have the wrong dimension");
        }
    } else if (ancilla_dim != 2) {
        fail("measurement.basis", "'" + basis + "' is a qubit basis; use 'custom' for ancilla.dim > 2");
    }
    if (!(early_scenario().width > 0.0)) fail("weights.early.width", "must be positive");
    if (!(intermediate_scenario().width > 0.0)) fail("weights.intermediate.width", "must be positive");
    if (!(solver.dt > 0.0)) fail("solver.dt", "must be positive");
    if (!(solver.t_max >= 0.0)) fail("solver.t_max", "must be non-negative");
    if (!(solver.direct_dt > 0.0)) fail("solver.direct_dt", "must be positive");
    if (solver.nodes < 4) fail("solver.nodes", "must be at least 4");
    if (!(solver.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    require_object(root, "<root>");
    reject_unknown(root, "", {"system", "ancilla", "collision", "measurement", "weights", "kernel", "generator",
                              "solver", "output", "seed"});

    if (root.contains("system")) {
        const auto& j = root["system"];
        require_object(j, "system");
        reject_unknown(j, "system", {"dim", "initial_state"});
        if (j.contains("dim")) cfg.system_dim = get_positive_int(j["dim"], "system.dim");
        if (j.contains("initial_state")) cfg.initial_state = parse_state(j["initial_state"], "system.initial_state");
    }
    if (root.contains("ancilla")) {
        const auto& j = root["ancilla"];
        require_object(j, "ancilla");
        reject_unknown(j, "ancilla", {"dim", "state"});
        if (j.contains("dim")) cfg.ancilla_dim = get_positive_int(j["dim"], "ancilla.dim");
        if (j.contains("state")) cfg.ancilla_state = parse_state(j["state"], "ancilla.state");
    }
    if (root.contains("collision")) {
        const auto& j = root["collision"];
        require_object(j, "collision");
        reject_unknown(j, "collision", {"alpha", "tau", "count"});
        if (j.contains("alpha")) cfg.alpha = get_number(j["alpha"], "collision.alpha");
        if (j.contains("tau")) cfg.tau = get_positive(j["tau"], "collision.tau");
        if (j.contains("count")) cfg.collisions = get_positive_int(j["count"], "collision.count");
    }
    if (root.contains("measurement")) {
        const auto& j = root["measurement"];
        require_object(j, "measurement");
        reject_unknown(j, "measurement", {"beta", "basis", "custom_basis", "orientation"});
        if (j.contains("beta")) cfg.beta = get_number(j["beta"], "measurement.beta");
        if (j.contains("basis")) cfg.basis = get_choice(j["basis"], "measurement.basis", {"x", "z", "custom"});
        if (j.contains("custom_basis")) {
            const auto& b = j["custom_basis"];
            if (!b.is_array()) fail("measurement.custom_basis", "must be an array of vectors");
            for (const auto& v : b) cfg.custom_basis.push_back(get_complex_list(v, "measurement.custom_basis"));
        }
        if (j.contains("orientation")) {
            cfg.orientation = get_choice(j["orientation"], "measurement.orientation", {"by_ancilla", "by_elapsed"});
        }
    }
    if (root.contains("weights")) {
        const auto& j = root["weights"];
        require_object(j, "weights");
        reject_unknown(j, "weights", {"early", "intermediate"});
        if (j.contains("early")) cfg.early = parse_scenario(j["early"], "weights.early");
        if (j.contains("intermediate")) cfg.intermediate = parse_scenario(j["intermediate"], "weights.intermediate");
    }
    if (root.contains("kernel")) {
        const auto& j = root["kernel"];
        require_object(j, "kernel");
        reject_unknown(j, "kernel", {"type", "gamma", "t0", "sigma", "support", "samples", "spacing"});
        if (j.contains("type")) {
            cfg.kernel.type = get_choice(j["type"], "kernel.type", {"delta", "exponential", "gaussian", "tabulated"});
        }
        if (j.contains("gamma")) cfg.kernel.gamma = get_positive(j["gamma"], "kernel.gamma");
        if (j.contains("t0")) cfg.kernel.t0 = get_number(j["t0"], "kernel.t0");
        if (j.contains("sigma")) cfg.kernel.sigma = get_positive(j["sigma"], "kernel.sigma");
        if (j.contains("support")) cfg.kernel.support = get_positive(j["support"], "kernel.support");
        if (j.contains("spacing")) cfg.kernel.spacing = get_positive(j["spacing"], "kernel.spacing");
        if (j.contains("samples")) {
            if (!j["samples"].is_array()) fail("kernel.samples", "must be an array of numbers");
            for (const auto& x : j["samples"]) cfg.kernel.samples.push_back(get_non_negative(x, "kernel.samples"));
        }
        if (cfg.kernel.type == "tabulated" && cfg.kernel.samples.size() < 2) {
            fail("kernel.samples", "needs at least two samples for a tabulated kernel");
        }
    }
    if (root.contains("generator")) {
        const auto& j = root["generator"];
        require_object(j, "generator");
        reject_unknown(j, "generator", {"type", "gamma"});
        if (j.contains("type")) {
            cfg.generator.type = get_choice(j["type"], "generator.type", {"collision", "amplitude_damping"});
        }
        if (j.contains("gamma")) cfg.generator.gamma = get_positive(j["gamma"], "generator.gamma");
    }
    if (root.contains("solver")) {
        const auto& j = root["solver"];
        require_object(j, "solver");
        reject_unknown(j, "solver", {"t_max", "dt", "method", "nodes", "direct_dt", "tolerance"});
        if (j.contains("t_max")) cfg.solver.t_max = get_non_negative(j["t_max"], "solver.t_max");
        if (j.contains("dt")) cfg.solver.dt = get_positive(j["dt"], "solver.dt");
        if (j.contains("method")) cfg.solver.method = get_choice(j["method"], "solver.method", {"talbot", "dehoog"});
        if (j.contains("nodes")) cfg.solver.nodes = get_positive_int(j["nodes"], "solver.nodes");
        if (j.contains("direct_dt")) cfg.solver.direct_dt = get_positive(j["direct_dt"], "solver.direct_dt");
        if (j.contains("tolerance")) cfg.solver.tolerance = get_positive(j["tolerance"], "solver.tolerance");
    }
    if (root.contains("output")) {
        const auto& j = root["output"];
        require_object(j, "output");
        reject_unknown(j, "output", {"path"});
        if (j.contains("path")) {
            if (!j["path"].is_string()) fail("output.path", "must be a string");
            cfg.output_path = j["path"].get<std::string>();
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) fail("seed", "must be a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["system"] = {{"dim", cfg.system_dim}, {"initial_state", state_to_json(cfg.initial_state)}};
    root["ancilla"] = {{"dim", cfg.ancilla_dim}, {"state", state_to_json(cfg.ancilla_state)}};
    root["collision"] = {{"alpha", cfg.alpha}, {"tau", cfg.tau}, {"count", cfg.collisions}};
    json m = {{"beta", cfg.beta}, {"basis", cfg.basis}, {"orientation", cfg.orientation}};
    if (!cfg.custom_basis.empty()) {
        json b = json::array();
        for (const auto& v : cfg.custom_basis) b.push_back(complex_list_to_json(v));
        m["custom_basis"] = b;
    }
    root["measurement"] = m;
    json w = json::object();
    if (cfg.early) w["early"] = {{"center", cfg.early->center}, {"width", cfg.early->width}};
    if (cfg.intermediate) w["intermediate"] = {{"center", cfg.intermediate->center}, {"width", cfg.intermediate->width}};
    root["weights"] = w;
    json k = {{"type", cfg.kernel.type}, {"gamma", cfg.kernel.gamma}, {"t0", cfg.kernel.t0},
              {"sigma", cfg.kernel.sigma}, {"support", cfg.kernel.support}, {"spacing", cfg.kernel.spacing}};
    if (!cfg.kernel.samples.empty()) k["samples"] = cfg.kernel.samples;
    root["kernel"] = k;
    root["generator"] = {{"type", cfg.generator.type}, {"gamma", cfg.generator.gamma}};
    root["solver"] = {{"t_max", cfg.solver.t_max},         {"dt", cfg.solver.dt},
                      {"method", cfg.solver.method},       {"nodes", cfg.solver.nodes},
                      {"direct_dt", cfg.solver.direct_dt}, {"tolerance", cfg.solver.tolerance}};
    root["output"] = {{"path", cfg.output_path}};
    root["seed"] = cfg.seed;
    return root.dump(2) + "\n";
}

}  // namespace pmme::config
