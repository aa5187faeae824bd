#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "pmme/errors.hpp"
#include "pmme/qcore.hpp"

using namespace pmme;
using namespace pmme::qcore;
using pmme::testing::max_abs;

namespace {

Matrix ket_bra(int d, int i, int j) {
    Matrix m = Matrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("density matrix validation") {
    CHECK_NOTHROW(DensityMatrix(diag2(0.6, 0.4)));
    CHECK_THROWS_AS(DensityMatrix(diag2(0.6, 0.5)), ValidationError);
    CHECK_THROWS_AS(DensityMatrix(diag2(1.1, -0.1)), ValidationError);
    Matrix nh = diag2(0.5, 0.5);
    nh(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{nh}, ValidationError);
    Vector psi(2);
    psi << 1.0, 1.0;
    CHECK_THROWS_AS(DensityMatrix::pure(psi), ValidationError);
}

TEST_CASE("unitary validation") {
    CHECK_NOTHROW(UnitaryMatrix(Matrix::Identity(3, 3)));
    CHECK_THROWS_AS(UnitaryMatrix(2.0 * Matrix::Identity(2, 2)), ValidationError);
}

TEST_CASE("tensor product examples") {
    CHECK(max_abs(tensor_product(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) - Matrix::Identity(4, 4)) == 0.0);
    Matrix expect = Matrix::Zero(4, 4);
    expect(1, 1) = 1.0;
    CHECK(max_abs(tensor_product(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) - expect) == 0.0);
    const Matrix eta = diag2(0.6, 0.4);
    const Matrix ee = tensor_product(eta, eta);
    CHECK(ee(0, 0).real() == doctest::Approx(9.0 / 25));
    CHECK(ee(1, 1).real() == doctest::Approx(6.0 / 25));
    CHECK(ee(2, 2).real() == doctest::Approx(6.0 / 25));
    CHECK(ee(3, 3).real() == doctest::Approx(4.0 / 25));
}

TEST_CASE("partial trace examples") {
    std::mt19937_64 rng(11);
    const auto rho = testing::random_density(2, rng);
    const auto eta = testing::fig_eta();
    const Matrix joint = tensor_product(rho.matrix(), eta.matrix());
    CHECK(max_abs(partial_trace(joint, 2, 2, Subsystem::A) - rho.matrix()) < 1e-12);
    CHECK(max_abs(partial_trace(joint, 2, 2, Subsystem::B) - eta.matrix()) < 1e-12);

    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    CHECK(max_abs(partial_trace(bell * bell.adjoint(), 2, 2, Subsystem::A) - 0.5 * Matrix::Identity(2, 2)) < 1e-15);

    const Matrix s = swap_operator(2);
    CHECK(max_abs(partial_trace(s * joint * s.adjoint(), 2, 2, Subsystem::A) - eta.matrix()) < 1e-15);

    CHECK_THROWS_AS(partial_trace(Matrix::Identity(5, 5), 2, 2, Subsystem::A), ValidationError);
}

TEST_CASE("partial trace of random product states") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = testing::random_density(3, rng);
        const auto b = testing::random_density(2, rng);
        CHECK(max_abs(partial_trace(tensor_product(a.matrix(), b.matrix()), 3, 2, Subsystem::A) - a.matrix()) <
              1e-12);
    }
}

TEST_CASE("fidelity examples") {
    std::mt19937_64 rng(13);
    const auto rho = testing::random_density(2, rng);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) == doctest::Approx(0.0));
    CHECK(std::abs(fidelity(testing::fig_rho0(), testing::fig_eta()) - 0.44) < 1e-12);
    // Pure-state formula ⟨ψ|η|ψ⟩.
    const Vector psi = testing::fig_psi();
    CHECK(std::abs((psi.adjoint() * testing::fig_eta().matrix() * psi)(0, 0).real() - 0.44) < 1e-15);
}

TEST_CASE("fidelity symmetry and identity of indiscernibles") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = testing::random_density(3, rng);
        const auto b = testing::random_density(3, rng);
        CHECK(std::abs(fidelity(a, b) - fidelity(b, a)) <= 1e-10);
        CHECK(std::abs(fidelity(a, a) - 1.0) <= 1e-8);
        CHECK(trace_distance(a.matrix(), a.matrix()) <= 1e-8);
        CHECK(fidelity(a, b) < 1.0 - 1e-8);
    }
}

TEST_CASE("fidelity rejects clearly non-PSD input") {
    CHECK_THROWS_AS(fidelity(diag2(1.2, -0.2), diag2(0.5, 0.5)), ValidationError);
}

TEST_CASE("trace distance examples") {
    CHECK(trace_distance(diag2(0.6, 0.4), diag2(0.6, 0.4)) == 0.0);
    CHECK(trace_distance(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) == doctest::Approx(1.0));
    CHECK(trace_distance(0.5 * Matrix::Identity(2, 2), diag2(0.6, 0.4)) == doctest::Approx(0.1));
}

TEST_CASE("superoperator from Kraus examples") {
    const std::vector<Matrix> id{Matrix::Identity(2, 2)};
    CHECK(max_abs(superop_from_kraus(id).matrix() - Matrix::Identity(4, 4)) == 0.0);

    const std::vector<Matrix> reset{ket_bra(2, 0, 0), ket_bra(2, 0, 1)};
    const auto s = superop_from_kraus(reset);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const Matrix expect = i == j ? ket_bra(2, 0, 0) : Matrix::Zero(2, 2);
            CHECK(max_abs(apply_superop(s, ket_bra(2, i, j)) - expect) < 1e-15);
        }

    CHECK_THROWS_AS(superop_from_kraus(std::vector<Matrix>{}), ValidationError);
}

TEST_CASE("superoperator action matches Kraus sum and unitary conjugation") {
    std::mt19937_64 rng(15);
    const Matrix u = testing::random_unitary(3, rng);
    const std::vector<Matrix> ku{u};
    CHECK(max_abs((u.adjoint() * u) - Matrix::Identity(3, 3)) < 1e-12);
    const auto su = superop_from_unitary(u);
    CHECK(max_abs(su.matrix() - superop_from_kraus(ku).matrix()) < 1e-14);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = testing::random_matrix(3, rng);
        CHECK(max_abs(apply_superop(su, x) - u * x * u.adjoint()) < 1e-12);
        CHECK(max_abs(apply_superop(Superoperator::identity(3), x) - x) == 0.0);
    }
}

TEST_CASE("Kraus maps with completeness are trace preserving") {
    std::mt19937_64 rng(16);
    // Kraus set from a random isometry: A_k = block k of V, V†V = I.
    const Matrix v = testing::random_unitary(6, rng).leftCols(3);
    std::vector<Matrix> kraus{v.topRows(3), v.bottomRows(3)};
    const auto s = superop_from_kraus(kraus);
    CHECK(s.is_trace_preserving());
    for (int trial = 0; trial < 20; ++trial) {
        const auto rho = testing::random_density(3, rng);
        CHECK(std::abs(apply_superop(s, rho.matrix()).trace() - 1.0) < 1e-10);
    }
    CHECK(min_eigenvalue_hermitian(choi_of(s).matrix()) >= -1e-9);
}

TEST_CASE("Choi matrix examples") {
    const auto ci = choi_of(Superoperator::identity(2)).matrix();
    Vector phi = Vector::Zero(4);
    phi(0) = phi(3) = 1.0;
    CHECK(max_abs(ci - phi * phi.adjoint()) < 1e-15);
    CHECK(min_eigenvalue_hermitian(ci) == doctest::Approx(0.0));

    // ρ ↦ I/2: Kraus {|i⟩⟨j|/√2}.
    std::vector<Matrix> dep;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) dep.push_back(ket_bra(2, i, j) / std::sqrt(2.0));
    CHECK(max_abs(choi_of(superop_from_kraus(dep)).matrix() - 0.5 * Matrix::Identity(4, 4)) < 1e-15);

    std::mt19937_64 rng(17);
    const Matrix u = testing::random_unitary(2, rng);
    const Matrix cu = choi_of(superop_from_unitary(u)).matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(cu);
    CHECK(std::abs(cu.trace() - 2.0) < 1e-12);
    CHECK(es.eigenvalues()(3) == doctest::Approx(2.0));
    CHECK(std::abs(es.eigenvalues()(2)) < 1e-12);
    CHECK(es.eigenvalues()(0) >= -1e-12);
}

TEST_CASE("Choi convention puts the reference copy first") {
    // Map X ↦ |0⟩⟨0| Tr X: Choi = I ⊗ |0⟩⟨0| in reference-first order.
    const std::vector<Matrix> reset{ket_bra(2, 0, 0), ket_bra(2, 0, 1)};
    const Matrix c = choi_of(superop_from_kraus(reset)).matrix();
    CHECK(max_abs(c - tensor_product(Matrix::Identity(2, 2), ket_bra(2, 0, 0))) < 1e-15);
}

TEST_CASE("min eigenvalue examples") {
    CHECK(min_eigenvalue_hermitian(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
    CHECK(min_eigenvalue_hermitian(diag2(1.0, -0.25)) == doctest::Approx(-0.25));
    Matrix nh = Matrix::Identity(2, 2);
    nh(0, 1) = 1.0;
    CHECK_THROWS_AS(min_eigenvalue_hermitian(nh), ValidationError);
}

TEST_CASE("matrix function examples") {
    CHECK(max_abs(matrix_function(Matrix::Zero(3, 3), MatrixFunction::Exp) - Matrix::Identity(3, 3)) < 1e-15);
    const Matrix e = matrix_function(diag2(0.3, -1.2), MatrixFunction::Exp);
    CHECK(e(0, 0).real() == doctest::Approx(std::exp(0.3)));
    CHECK(e(1, 1).real() == doctest::Approx(std::exp(-1.2)));
    CHECK(std::abs(e(0, 1)) == 0.0);

    std::mt19937_64 rng(18);
    Matrix h = testing::random_hermitian(4, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    h *= 0.1 * 3.0 / es.eigenvalues().cwiseAbs().maxCoeff();
    const Matrix round = matrix_function(matrix_function(h, MatrixFunction::Exp), MatrixFunction::Log);
    CHECK(max_abs(round - h) < 1e-12);

    const Matrix sq = matrix_function(diag2(4.0, 9.0), MatrixFunction::Sqrt);
    CHECK(sq(1, 1).real() == doctest::Approx(3.0));
    CHECK_THROWS_AS(matrix_function(diag2(-1.0, 1.0), MatrixFunction::Log), ValidationError);
    // A Jordan block is not diagonalizable.
    Matrix jordan = Matrix::Identity(2, 2);
    jordan(0, 1) = 1.0;
    CHECK_THROWS(matrix_function(jordan, MatrixFunction::Log));
}

TEST_CASE("vec and unvec round trip in column-stacking order") {
    std::mt19937_64 rng(19);
    const Matrix a = testing::random_matrix(3, rng);
    const Matrix b = testing::random_matrix(3, rng);
    const Matrix x = testing::random_matrix(3, rng);
    CHECK(max_abs(unvec(vec(x), 3) - x) == 0.0);
    CHECK(vec(x)(1) == x(1, 0));
    const Matrix lhs = (tensor_product(b.transpose(), a) * vec(x));
    CHECK(max_abs(unvec(lhs, 3) - a * x * b) < 1e-12);
}

TEST_CASE("superoperator composition applies the right factor first") {
    std::mt19937_64 rng(20);
    const Matrix u = testing::random_unitary(2, rng);
    const Matrix v = testing::random_unitary(2, rng);
    const auto su = superop_from_unitary(u);
    const auto sv = superop_from_unitary(v);
    CHECK(max_abs((su * sv).matrix() - superop_from_unitary(u * v).matrix()) < 1e-12);
    CHECK(su.trace_preservation_error() < 1e-12);
}
