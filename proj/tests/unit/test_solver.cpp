#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pmme/collision.hpp"
#include "pmme/errors.hpp"
#include "pmme/lindblad.hpp"
#include "pmme/solver.hpp"

using namespace pmme;
using namespace pmme::solver;
using kernel::MemoryKernel;
using pmme::testing::max_abs;
using qcore::Superoperator;

namespace {

Superoperator qubit_generator() {
    return lindblad::from_collision_map(collision::collision_map(testing::fig_spec(), testing::fig_eta()), 0.01);
}

Superoperator qubit_measurement() {
    return collision::measurement_channel(testing::fig_spec(), testing::fig_measurement(), testing::fig_eta());
}

Superoperator damping(double g = 1.0) { return lindblad::build_superoperator(lindblad::amplitude_damping(g)); }

PMMEProblem qubit_problem(MemoryKernel k) { return PMMEProblem::create(qubit_generator(), qubit_measurement(), std::move(k)); }

Matrix semigroup_superop(const Superoperator& l, double t) {
    return qcore::matrix_function(t * l.matrix(), qcore::MatrixFunction::Exp);
}

}  // namespace

TEST_CASE("problem construction validates the measurement map") {
    CHECK_THROWS_AS(PMMEProblem::create(damping(), Superoperator::identity(2) * Complex(2.0), MemoryKernel::exponential(1.0)),
                    ValidationError);
    // Transposition is positive and trace preserving but not completely positive.
    Matrix t = Matrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t(i + 2 * j, j + 2 * i) = 1.0;
    CHECK_THROWS_AS(PMMEProblem::create(damping(), Superoperator(t), MemoryKernel::exponential(1.0)), ValidationError);

    const auto p = qubit_problem(MemoryKernel::exponential(1.0));
    const auto& sd = p.spectral();
    for (int j = 0; j < p.size(); ++j)
        for (int i = 0; i < p.size(); ++i) {
            const Complex expect = (sd.left_ops[static_cast<std::size_t>(j)] *
                                    p.measurement_map().apply(sd.right_ops[static_cast<std::size_t>(i)]))
                                       .trace();
            CHECK(std::abs(p.e_matrix()(j, i) - expect) < 1e-10);
        }
}

TEST_CASE("omega matrix") {
    SUBCASE("identity measurement and delta kernel give a diagonal matrix") {
        const auto p = PMMEProblem::create(damping(), Superoperator::identity(2), MemoryKernel::dirac_delta());
        const Complex s(0.7, 0.3);
        const Matrix om = build_omega(p, s);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(om(i, i) - (s - p.spectral().eigenvalues[static_cast<std::size_t>(i)])) < 1e-12);
        }
        CHECK(max_abs(om - Matrix(om.diagonal().asDiagonal())) < 1e-12);
    }
    SUBCASE("amplitude damping with exponential kernel matches the hand formula") {
        const double g = 1.3;
        const auto p = PMMEProblem::create(damping(), qubit_measurement(), MemoryKernel::exponential(g));
        const auto& lam = p.spectral().eigenvalues;
        for (Complex s : {Complex(0.5, 0.0), Complex(1.0, 2.0), Complex(3.0, -1.0)}) {
            const Matrix om = build_omega(p, s);
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 4; ++i) {
                    const Complex expect = (i == j ? s : 0.0) - lam[static_cast<std::size_t>(i)] * p.e_matrix()(j, i) * g /
                                                                    (s - lam[static_cast<std::size_t>(j)] + g);
                    CHECK(std::abs(om(j, i) - expect) < 1e-12);
                }
            CHECK(max_abs(omega_inverse(p, s) * om - Matrix::Identity(4, 4)) < 1e-12);
        }
        const Matrix far = build_omega(p, 1e8);
        CHECK(max_abs(far / 1e8 - Matrix::Identity(4, 4)) < 1e-7);
    }
}

TEST_CASE("Markovian limit of the propagator") {
    const auto p = PMMEProblem::create(damping(0.8), Superoperator::identity(2), MemoryKernel::dirac_delta());
    const auto grid = uniform_grid(5.0, 0.5);
    const auto w = solve_W(p, grid);
    for (double t : grid) {
        Matrix expect = Matrix::Zero(4, 4);
        for (int i = 0; i < 4; ++i) expect(i, i) = std::exp(p.spectral().eigenvalues[static_cast<std::size_t>(i)] * t);
        CHECK(max_abs(w.at(t) - expect) < 1e-8);
    }
}

TEST_CASE("propagator is the identity at zero and near zero") {
    const auto p = qubit_problem(MemoryKernel::exponential(1.0));
    const std::vector<double> grid{0.0, 1e-6, 1e-3};
    const auto w = solve_W(p, grid);
    CHECK(max_abs(w.at(0.0) - Matrix::Identity(4, 4)) == 0.0);
    CHECK(max_abs(w.at(1e-6) - Matrix::Identity(4, 4)) < 1e-6);
    CHECK(max_abs(propagate(p, w, testing::fig_rho0(), 0.0) - testing::fig_rho0().matrix()) < 1e-10);
    CHECK_THROWS_AS(w.at(0.5), ValidationError);
    CHECK_THROWS_AS(propagate(p, w, testing::fig_rho0(), 0.5), ValidationError);
}

TEST_CASE("delta kernel solution is the semigroup for any measurement map") {
    const auto p = PMMEProblem::create(damping(), qubit_measurement(), MemoryKernel::dirac_delta());
    const auto grid = uniform_grid(10.0, 0.5);
    const auto w = solve_W(p, grid);
    const auto rho0 = testing::fig_rho0();
    for (double t : grid) {
        const Matrix expect = qcore::unvec(semigroup_superop(p.generator(), t) * qcore::vec(rho0.matrix()), 2);
        CHECK(qcore::trace_distance(propagate(p, w, rho0, t), expect) < 1e-8);
        CHECK(max_abs(dynamical_map(p, w, t).matrix() - semigroup_superop(p.generator(), t)) < 1e-8);
        CHECK(max_abs(inverse_map(p, w, t).matrix() - semigroup_superop(p.generator(), -t)) < 1e-8);
        CHECK(max_abs(tcl_generator(p, w, t).matrix() - p.generator().matrix()) < 1e-8);
    }
}

TEST_CASE("Laplace solution agrees with the direct integrator") {
    const auto rho0 = testing::fig_rho0();
    SUBCASE("exponential kernel, Talbot") {
        const auto p = qubit_problem(MemoryKernel::exponential(1.0));
        const auto grid = uniform_grid(5.0, 0.1);
        const auto w = solve_W(p, grid);
        CHECK(w.max_error_estimate < 1e-8);
        double coarse = 0.0, fine = 0.0;
        const auto d1 = integrate_pmme_direct(p, rho0, 5.0, 0.004);
        const auto d2 = integrate_pmme_direct(p, rho0, 5.0, 0.002);
        for (double t : grid) {
            const Matrix rho = propagate(p, w, rho0, t);
            coarse = std::max(coarse, qcore::trace_distance(rho, d1.at(t)));
            fine = std::max(fine, qcore::trace_distance(rho, d2.at(t)));
        }
        CHECK(fine < 1e-5);
        CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
    }
    SUBCASE("truncated gaussian kernel, de Hoog") {
        const auto p = qubit_problem(MemoryKernel::truncated_gaussian(0.0, 0.5, 3.0));
        SolverOptions o;
        o.method = InversionMethod::DeHoog;
        const auto grid = uniform_grid(5.0, 0.1);
        const auto w = solve_W(p, grid, o);
        const auto d = integrate_pmme_direct(p, rho0, 5.0, 0.002);
        double gap = 0.0;
        for (double t : grid) gap = std::max(gap, qcore::trace_distance(propagate(p, w, rho0, t), d.at(t)));
        CHECK(gap < 1e-5);
    }
}

TEST_CASE("Talbot doubling check rejects a poorly resolved transform") {
    const auto p = qubit_problem(MemoryKernel::truncated_gaussian(0.0, 0.5, 3.0));
    const std::vector<double> grid{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(solve_W(p, grid), NumericalError);
    try {
        solve_W(p, grid);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("de Hoog") != std::string::npos);
    }
}

TEST_CASE("direct integrator") {
    const auto rho0 = testing::fig_rho0();
    SUBCASE("zero generator leaves the state fixed") {
        const auto p = PMMEProblem::create(Superoperator::zero(2), qubit_measurement(), MemoryKernel::exponential(1.0));
        const auto d = integrate_pmme_direct(p, rho0, 2.0, 0.01);
        for (const auto& s : d.states) CHECK(max_abs(s - rho0.matrix()) < 1e-14);
    }
    SUBCASE("delta kernel is second order against the semigroup") {
        const auto p = PMMEProblem::create(damping(), qubit_measurement(), MemoryKernel::dirac_delta());
        auto err = [&](double dt) {
            const auto d = integrate_pmme_direct(p, rho0, 2.0, dt);
            const Matrix exact = qcore::unvec(semigroup_superop(p.generator(), 2.0) * qcore::vec(rho0.matrix()), 2);
            return qcore::trace_distance(d.at(2.0), exact);
        };
        const double e1 = err(0.008), e2 = err(0.004);
        CHECK(e2 < 1e-5);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    }
    SUBCASE("step size limit") {
        const auto p = qubit_problem(MemoryKernel::exponential(1.0));
        CHECK_THROWS_AS(integrate_pmme_direct(p, rho0, 1.0, 0.1), ValidationError);
        const auto d = integrate_pmme_direct(p, rho0, 1.0, 0.002);
        CHECK(d.max_trace_drift < 1e-6);
    }
}

TEST_CASE("structural identities for the exponential kernel") {
    const auto p = qubit_problem(MemoryKernel::exponential(1.0));
    const double h = 0.01;
    const auto grid = uniform_grid(10.0, h);
    const auto w = solve_W(p, grid);
    const Vector vid = qcore::vec(Matrix::Identity(2, 2));
    std::mt19937_64 rng(41);

    CHECK(max_abs(dynamical_map(p, w, 0.0).matrix() - Matrix::Identity(4, 4)) < 1e-12);
    CHECK(max_abs(inverse_map(p, w, 0.0).matrix() - Matrix::Identity(4, 4)) < 1e-12);
    for (double t : {0.5, 1.0, 3.0, 10.0}) {
        const auto phi = dynamical_map(p, w, t);
        CHECK((vid.adjoint() * phi.matrix() - vid.adjoint()).cwiseAbs().maxCoeff() < 1e-7);
        const auto inv = inverse_map(p, w, t);
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix x = testing::random_matrix(2, rng);
            CHECK(max_abs(inv.apply(phi.apply(x)) - x) < 1e-7);
        }
        for (int trial = 0; trial < 4; ++trial) {
            const auto rho = testing::random_density(2, rng);
            CHECK(max_abs(phi.apply(rho.matrix()) - propagate(p, w, rho, t)) < 1e-10);
        }
    }

    // Time-local generator reproduces the derivative.
    const auto rho0 = testing::fig_rho0();
    for (double t : {0.1, 1.0, 4.0}) {
        const Matrix deriv = (propagate(p, w, rho0, t + h) - propagate(p, w, rho0, t - h)) / (2 * h);
        const Matrix rhs = tcl_generator(p, w, t).apply(propagate(p, w, rho0, t));
        CHECK(max_abs(deriv - rhs) < 1e-4);
    }
    // Short times: the time-local generator matches the slope of the
    // independent integrator.
    const auto d = integrate_pmme_direct(p, rho0, 0.2, 0.002);
    const Matrix slope = (d.at(0.06) - d.at(0.04)) / 0.02;
    CHECK(max_abs(slope - tcl_generator(p, w, 0.05).apply(propagate(p, w, rho0, 0.05))) < 1e-4);
    CHECK(max_abs(tcl_generator(p, w, 0.0).matrix()) < 1e-12);
}

TEST_CASE("Nakajima-Zwanzig kernel") {
    const auto pd = PMMEProblem::create(damping(), qubit_measurement(), MemoryKernel::dirac_delta());
    CHECK(max_abs(nz_kernel(pd, 0.5).matrix()) == 0.0);
    const auto pe = PMMEProblem::create(damping(), Superoperator::identity(2), MemoryKernel::exponential(2.0));
    CHECK(max_abs(nz_kernel(pe, 0.0).matrix() - 2.0 * pe.generator().matrix()) < 1e-12);
    const auto pq = qubit_problem(MemoryKernel::exponential(1.0));
    std::mt19937_64 rng(42);
    for (double tp : {0.0, 0.7, 3.0}) {
        const auto k = nz_kernel(pq, tp);
        const Matrix expect = MemoryKernel::exponential(1.0).evaluate(tp) * semigroup_superop(pq.generator(), tp) *
                              pq.measurement_map().matrix() * pq.generator().matrix();
        CHECK(max_abs(k.matrix() - expect) < 1e-12);
        for (int trial = 0; trial < 10; ++trial) {
            CHECK(std::abs(k.apply(testing::random_density(2, rng).matrix()).trace()) < 1e-12);
        }
    }
}

TEST_CASE("complete positivity scan") {
    SUBCASE("delta kernel") {
        const auto p = PMMEProblem::create(damping(), qubit_measurement(), MemoryKernel::dirac_delta());
        const auto w = solve_W(p, uniform_grid(10.0, 0.5));
        const auto scan = cp_scan(p, w);
        CHECK(scan.completely_positive);
        for (const auto& pt : scan.points) CHECK(pt.min_eigenvalue >= -1e-9);
        CHECK(std::abs(scan.points.front().min_eigenvalue) < 1e-12);
    }
    SUBCASE("exponential kernel over ten decay times") {
        const auto p = qubit_problem(MemoryKernel::exponential(1.0));
        const auto w = solve_W(p, uniform_grid(10.0, 0.1));
        const auto scan = cp_scan(p, w);
        CHECK(scan.constructions_agree);
        CHECK(scan.max_mismatch <= 1e-9);
        CHECK(scan.completely_positive);
        for (const auto& pt : scan.points) {
            const Matrix choi = choi_from_w(p, w.at(pt.t));
            CHECK(max_abs(choi - qcore::choi_of(dynamical_map(p, w, pt.t)).matrix()) < 1e-9);
        }
    }
    SUBCASE("single grid point") {
        const auto p = qubit_problem(MemoryKernel::exponential(1.0));
        const auto scan = cp_scan(p, solve_W(p, {0.0}));
        REQUIRE(scan.points.size() == 1);
        CHECK(std::abs(scan.points[0].min_eigenvalue) < 1e-12);
    }
}

TEST_CASE("trace and hermiticity for every kernel") {
    std::vector<double> samples;
    for (int j = 0; j <= 100; ++j) samples.push_back(std::exp(-j * 0.02));
    const MemoryKernel kernels[] = {MemoryKernel::dirac_delta(), MemoryKernel::exponential(1.0),
                                    MemoryKernel::truncated_gaussian(0.5, 0.3, 2.0),
                                    MemoryKernel::tabulated_normalized(samples, 0.02)};
    const auto rho0 = testing::fig_rho0();
    for (const auto& k : kernels) {
        const auto p = qubit_problem(k);
        SolverOptions o;
        o.method = k.is_delta() || std::holds_alternative<kernel::Exponential>(k.variant()) ? InversionMethod::Talbot
                                                                                              : InversionMethod::DeHoog;
        const auto grid = uniform_grid(4.0, 0.25);
        const auto w = solve_W(p, grid, o);
        for (double t : grid) {
            const Matrix rho = propagate(p, w, rho0, t);
            CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
            CHECK(qcore::hermiticity_error(rho) < 1e-8);
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    const auto p = qubit_problem(MemoryKernel::exponential(1.0));
    const auto grid = uniform_grid(2.0, 0.1);
    SolverOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = solve_W(p, grid, one);
    const auto b = solve_W(p, grid, four);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(max_abs(a.matrices[i] - b.matrices[i]) == 0.0);
}

TEST_CASE("uniform grid") {
    const auto g = uniform_grid(1.0, 0.25);
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK(uniform_grid(0.0, 0.1).size() == 1);
    CHECK_THROWS_AS(uniform_grid(1.0, 0.0), ValidationError);
}
