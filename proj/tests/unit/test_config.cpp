#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "pmme/config.hpp"
#include "pmme/errors.hpp"

using namespace pmme;
using namespace pmme::config;

namespace {

// The message of the ValidationError thrown by parsing `text`.
std::string error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

bool mentions(const std::string& message, const std::string& needle) {
    return message.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty text gives the thermalization defaults") {
    for (const char* text : {"", "  \n\t", "{}"}) {
        const auto cfg = parse_config_text(text);
        CHECK(cfg == ExperimentConfig{});
        CHECK(cfg.alpha == 0.1);
        CHECK(cfg.beta == 0.9);
        CHECK(cfg.collisions == 200);
        CHECK(cfg.basis == "x");
        const auto rho = cfg.initial_state.to_density(2, "system.initial_state");
        CHECK(std::abs(rho.matrix()(0, 0).real() - 0.2) < 1e-15);
        CHECK(std::abs(rho.matrix()(1, 1).real() - 0.8) < 1e-15);
        CHECK(std::abs(rho.matrix()(0, 1).real() - 0.4) < 1e-15);
        const auto eta = cfg.ancilla_state.to_density(2, "ancilla.state");
        CHECK(eta.matrix()(0, 0).real() == 0.6);
        CHECK(eta.matrix()(1, 1).real() == 0.4);
        CHECK(cfg.early_scenario() == GaussianScenario{20.0, 10.0});
        CHECK(cfg.intermediate_scenario() == GaussianScenario{100.0, 10.0});
    }
}

TEST_CASE("scenario defaults follow the collision count") {
    const auto cfg = parse_config_text(R"({"collision": {"count": 33}})");
    CHECK(cfg.early_scenario().center == 4.0);
    CHECK(cfg.intermediate_scenario().center == 17.0);
    CHECK(cfg.early_scenario().width == doctest::Approx(1.65));
}

TEST_CASE("round trip through serialization") {
    ExperimentConfig cfg;
    cfg.alpha = 0.1;
    cfg.beta = 0.9;
    cfg.early = GaussianScenario{7.0, 2.5};
    cfg.kernel.type = "tabulated";
    cfg.kernel.samples = {0.0, 1.0, 1.0, 0.0};
    cfg.kernel.spacing = 0.5;
    cfg.initial_state = {StateSpec::Kind::Matrix, {0.5, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.5}};
    cfg.basis = "custom";
    cfg.custom_basis = {{Complex(0.0, 1.0), 0.0}, {0.0, 1.0}};
    cfg.orientation = "by_elapsed";
    cfg.output_path = "out.csv";
    cfg.solver.method = "dehoog";
    const auto text = serialize_config(cfg);
    CHECK(parse_config_text(text) == cfg);
    CHECK(serialize_config(parse_config_text(text)) == text);
    CHECK(parse_config_text(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("parse from file") {
    const std::string path = "pmme_test_config.json";
    {
        std::ofstream f(path);
        f << R"({"collision": {"alpha": 0.2, "count": 50}, "kernel": {"type": "gaussian", "sigma": 0.3}})";
    }
    const auto cfg = parse_config(path);
    CHECK(cfg.alpha == 0.2);
    CHECK(cfg.collisions == 50);
    CHECK(cfg.kernel.type == "gaussian");
    CHECK(cfg.kernel.sigma == 0.3);
    std::remove(path.c_str());
    CHECK_THROWS_AS(parse_config("does/not/exist.json"), ValidationError);
}

TEST_CASE("errors name the offending key") {
    CHECK(mentions(error_of(R"({"system": {"initial_state": {"amplitudes": [1, 1]}}})"), "initial_state"));
    CHECK(mentions(error_of(R"({"system": {"initial_state": {"amplitudes": [1, 1]}}})"), "normalized"));
    CHECK(mentions(error_of(R"({"collision": {"tau": -0.1}})"), "collision.tau"));
    CHECK(mentions(error_of(R"({"kernel": {"gamma": -1}})"), "kernel.gamma"));
    CHECK(mentions(error_of(R"({"solver": {"dt": 0}})"), "solver.dt"));
    CHECK(mentions(error_of(R"({"collision": {"count": 0}})"), "collision.count"));
    CHECK(mentions(error_of(R"({"collision": {"alpha": "big"}})"), "collision.alpha"));
    CHECK(mentions(error_of(R"({"measurement": {"basis": "y"}})"), "measurement.basis"));
    CHECK(mentions(error_of(R"({"ancilla": {"state": {"diagonal": [0.5, 0.6]}}})"), "ancilla.state"));
    CHECK(mentions(error_of(R"({"ancilla": {"dim": 3}})"), "ancilla.dim"));
    CHECK(mentions(error_of(R"({"weights": {"early": {"center": 3}}})"), "weights.early"));
    CHECK(mentions(error_of(R"({"kernel": {"type": "tabulated"}})"), "kernel.samples"));
}

TEST_CASE("unknown keys and malformed input are rejected") {
    CHECK(mentions(error_of(R"({"colision": {}})"), "unknown key 'colision'"));
    CHECK(mentions(error_of(R"({"solver": {"nodez": 3}})"), "unknown key 'solver.nodez'"));
    CHECK(mentions(error_of(R"({"system": {"initial_state": {"vector": [1, 0]}}})"), "system.initial_state"));
    CHECK(mentions(error_of("{\"system\": "), "malformed"));
    CHECK(mentions(error_of("[1, 2]"), "must be an object"));
}

TEST_CASE("distinct failures give distinct messages") {
    const std::string a = error_of(R"({"system": {"initial_state": {"amplitudes": [1, 1]}}})");
    const std::string b = error_of(R"({"collision": {"tau": -0.1}})");
    const std::string c = error_of("{");
    CHECK(a != b);
    CHECK(b != c);
    CHECK(a != c);
}

TEST_CASE("complex entries accept numbers and pairs") {
    const auto cfg = parse_config_text(
        R"({"system": {"initial_state": {"amplitudes": [[0.6, 0], [0, 0.8]]}}})");
    const auto rho = cfg.initial_state.to_density(2, "system.initial_state");
    CHECK(std::abs(rho.matrix()(0, 1) - Complex(0.0, -0.48)) < 1e-15);
}
