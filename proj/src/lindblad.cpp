#include "pmme/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "pmme/errors.hpp"

namespace pmme::lindblad {

namespace {

constexpr double kHermitianTolerance = 1e-10;
constexpr double kLogResidualTolerance = 1e-10;
constexpr double kMaxCondition = 1e8;
constexpr double kZeroEigenvalue = 1e-9;

}  // namespace

void LindbladGenerator::validate() const {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
        throw ValidationError("Hamiltonian must be a non-empty square matrix");
    }
    if (qcore::hermiticity_error(hamiltonian) > kHermitianTolerance) {
        throw ValidationError("Hamiltonian is not Hermitian");
    }
    for (const auto& j : jumps) {
        if (j.op.rows() != hamiltonian.rows() || j.op.cols() != hamiltonian.cols()) {
            throw ValidationError("jump operator dimension does not match the Hamiltonian");
        }
        if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) {
            throw ValidationError("jump rate must be non-negative, got " + std::to_string(j.rate));
        }
    }
}

int SpectralDecomposition::hilbert_dim() const {
    return right_ops.empty() ? 0 : static_cast<int>(right_ops.front().rows());
}

Matrix SpectralDecomposition::reconstruct() const {
    Vector lam(static_cast<Eigen::Index>(eigenvalues.size()));
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) lam(static_cast<Eigen::Index>(i)) = eigenvalues[i];
    return right_matrix * lam.asDiagonal() * left_matrix;
}

Vector SpectralDecomposition::coefficients(const Matrix& x) const { return left_matrix * qcore::vec(x); }

Matrix SpectralDecomposition::expand(const Vector& mu) const {
    return qcore::unvec(right_matrix * mu, hilbert_dim());
}

Superoperator build_superoperator(const LindbladGenerator& gen) {
    gen.validate();
    const int d = gen.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix& h = gen.hamiltonian;
    Matrix s = Complex(0.0, -1.0) * (qcore::tensor_product(id, h) - qcore::tensor_product(h.transpose(), id));
    for (const auto& j : gen.jumps) {
        const Matrix ldl = j.op.adjoint() * j.op;
        s += j.rate * (qcore::tensor_product(j.op.conjugate(), j.op) - 0.5 * qcore::tensor_product(id, ldl) -
                       0.5 * qcore::tensor_product(ldl.transpose(), id));
    }
    return Superoperator(std::move(s));
}

LindbladGenerator amplitude_damping(double gamma) {
    Matrix sm = Matrix::Zero(2, 2);
    sm(0, 1) = 1.0;
    LindbladGenerator gen{Matrix::Zero(2, 2), {{sm, gamma}}};
    gen.validate();
    return gen;
}

Superoperator from_collision_map(const Superoperator& xi, double tau) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    Matrix log_xi;
    try {
        log_xi = qcore::matrix_function(xi.matrix(), qcore::MatrixFunction::Log);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("collision map has no principal logarithm (") + e.what() +
                              "); reduce tau or the interaction strength so the map is closer to identity");
    }
    const Matrix l = log_xi / tau;
    const double residual = ((l * tau).exp() - xi.matrix()).cwiseAbs().maxCoeff();
    if (residual > kLogResidualTolerance) {
        throw NumericalError("exp(L tau) reproduces the collision map only to " + std::to_string(residual));
    }
    return Superoperator(l);
}

SpectralDecomposition spectral_decompose(const Superoperator& l) {
    const Matrix& m = l.matrix();
    const int d = l.hilbert_dim();
    const Eigen::Index n = m.rows();

    Vector lam;
    Matrix v;
    if (m.cwiseAbs().maxCoeff() == 0.0) {
        lam = Vector::Zero(n);
        v = Matrix::Identity(n, n);
    } else {
        Eigen::ComplexEigenSolver<Matrix> es(m);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on the generator");
        lam = es.eigenvalues();
        v = es.eigenvectors();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ra = lam(a).real(), rb = lam(b).real();
        if (std::abs(ra - rb) > 1e-12) return ra > rb;
        return lam(a).imag() > lam(b).imag();
    });
    Vector lam_sorted(n);
    Matrix v_sorted(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lam_sorted(i) = lam(order[static_cast<std::size_t>(i)]);
        v_sorted.col(i) = v.col(order[static_cast<std::size_t>(i)]).normalized();
    }

    // A unique stationary eigenvector is rescaled to a unit-trace operator.
    int zero_count = 0;
    Eigen::Index zero_index = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(lam_sorted(i)) <= kZeroEigenvalue) {
            ++zero_count;
            zero_index = i;
        }
    }
    if (zero_count == 1) {
        const Complex tr = qcore::unvec(v_sorted.col(zero_index), d).trace();
        if (std::abs(tr) > 1e-12) v_sorted.col(zero_index) /= tr;
    }

    Eigen::JacobiSVD<Matrix> svd(v_sorted);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond < kMaxCondition)) {
        throw ValidationError("generator is not diagonalizable within tolerance (eigenvector condition number " +
                              std::to_string(cond) + ")");
    }

    SpectralDecomposition sd;
    sd.condition_number = cond;
    sd.right_matrix = v_sorted;
    sd.left_matrix = v_sorted.partialPivLu().inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
        sd.eigenvalues.push_back(lam_sorted(i));
        sd.right_ops.push_back(qcore::unvec(v_sorted.col(i), d));
        // Tr(L X) = Σ_ab L_ba X_ab, so the functional row is vec(Lᵀ).
        sd.left_ops.push_back(qcore::unvec(sd.left_matrix.row(i).transpose(), d).transpose());
    }
    return sd;
}

double verify_biorthonormality(const SpectralDecomposition& sd) {
    double worst = 0.0;
    const std::size_t n = sd.right_ops.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex overlap = (sd.left_ops[i] * sd.right_ops[j]).trace();
            worst = std::max(worst, std::abs(overlap - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

}  // namespace pmme::lindblad
