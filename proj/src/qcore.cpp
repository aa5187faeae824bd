#include "pmme/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "pmme/errors.hpp"

namespace pmme::qcore {

namespace {

constexpr double kClipTolerance = 1e-10;
constexpr double kHermitianTolerance = 1e-9;
// Condition number of the eigenvector matrix above which log/sqrt are refused.
constexpr double kMaxEigenbasisCondition = 1e10;

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ValidationError(std::string(what) + " must be a non-empty square matrix");
    }
}

Eigen::VectorXd clipped_eigenvalues(const Eigen::VectorXd& w) {
    Eigen::VectorXd out = w;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < -kClipTolerance) {
            throw ValidationError("matrix is not positive semidefinite: eigenvalue " +
                                  std::to_string(w(i)));
        }
        out(i) = std::max(0.0, w(i));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix / UnitaryMatrix

DensityMatrix::DensityMatrix(Matrix m, double trace_tol, double psd_tol) : m_(std::move(m)) {
    require_square(m_, "density matrix");
    if (!m_.allFinite()) throw ValidationError("density matrix has non-finite entries");
    const double herm = hermiticity_error(m_);
    if (herm > kHermitianTolerance) {
        throw ValidationError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const Complex tr = m_.trace();
    if (std::abs(tr - 1.0) > trace_tol) {
        throw ValidationError("density matrix trace " + std::to_string(tr.real()) + " differs from 1");
    }
    const Matrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -psd_tol) {
        throw ValidationError("density matrix has negative eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
    }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    if (psi.size() == 0) throw ValidationError("empty state vector");
    if (std::abs(psi.norm() - 1.0) > 1e-12) {
        throw ValidationError("state vector is not normalized (norm " + std::to_string(psi.norm()) + ")");
    }
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> p) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p[i];
    }
    return DensityMatrix(std::move(m));
}

UnitaryMatrix::UnitaryMatrix(Matrix u, double tol) : u_(std::move(u)) {
    require_square(u_, "unitary");
    const double err = (u_.adjoint() * u_ - Matrix::Identity(u_.rows(), u_.cols())).cwiseAbs().maxCoeff();
    if (!(err <= tol)) {
        throw ValidationError("matrix is not unitary (‖U†U − I‖ = " + std::to_string(err) + ")");
    }
}

UnitaryMatrix UnitaryMatrix::identity(int dim) { return UnitaryMatrix(Matrix::Identity(dim, dim)); }

UnitaryMatrix UnitaryMatrix::operator*(const UnitaryMatrix& rhs) const {
    if (dim() != rhs.dim()) throw ValidationError("unitary dimension mismatch");
    return UnitaryMatrix(u_ * rhs.u_);
}

UnitaryMatrix UnitaryMatrix::adjoint() const { return UnitaryMatrix(u_.adjoint()); }

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(Matrix s) : s_(std::move(s)) {
    require_square(s_, "superoperator");
    const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s_.rows()))));
    if (d * d != s_.rows()) throw ValidationError("superoperator size is not a perfect square");
    d_ = d;
}

Superoperator Superoperator::identity(int hilbert_dim) {
    return Superoperator(Matrix::Identity(hilbert_dim * hilbert_dim, hilbert_dim * hilbert_dim));
}

Superoperator Superoperator::zero(int hilbert_dim) {
    return Superoperator(Matrix::Zero(hilbert_dim * hilbert_dim, hilbert_dim * hilbert_dim));
}

Matrix Superoperator::apply(const Matrix& rho) const {
    if (rho.rows() != d_ || rho.cols() != d_) {
        throw ValidationError("operator dimension " + std::to_string(rho.rows()) +
                              " does not match superoperator dimension " + std::to_string(d_));
    }
    return unvec(s_ * vec(rho), d_);
}

Superoperator Superoperator::operator*(const Superoperator& rhs) const {
    if (d_ != rhs.d_) throw ValidationError("superoperator dimension mismatch");
    return Superoperator(s_ * rhs.s_);
}

Superoperator Superoperator::operator+(const Superoperator& rhs) const {
    if (d_ != rhs.d_) throw ValidationError("superoperator dimension mismatch");
    return Superoperator(s_ + rhs.s_);
}

Superoperator Superoperator::operator-(const Superoperator& rhs) const {
    if (d_ != rhs.d_) throw ValidationError("superoperator dimension mismatch");
    return Superoperator(s_ - rhs.s_);
}

Superoperator Superoperator::operator*(Complex c) const { return Superoperator(s_ * c); }

double Superoperator::trace_preservation_error() const {
    const Vector id = vec(Matrix::Identity(d_, d_));
    return (id.adjoint() * s_ - id.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Free functions

Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
        throw ValidationError("vector length does not match dim²");
    }
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem keep) {
    if (dim_a <= 0 || dim_b <= 0 || m.rows() != static_cast<Eigen::Index>(dim_a) * dim_b ||
        m.cols() != m.rows()) {
        throw ValidationError("partial_trace: matrix dimension " + std::to_string(m.rows()) +
                              " is not " + std::to_string(dim_a) + "·" + std::to_string(dim_b));
    }
    if (keep == Subsystem::A) {
        Matrix out = Matrix::Zero(dim_a, dim_a);
        for (int i = 0; i < dim_a; ++i)
            for (int j = 0; j < dim_a; ++j)
                for (int k = 0; k < dim_b; ++k) out(i, j) += m(i * dim_b + k, j * dim_b + k);
        return out;
    }
    Matrix out = Matrix::Zero(dim_b, dim_b);
    for (int i = 0; i < dim_b; ++i)
        for (int j = 0; j < dim_b; ++j)
            for (int k = 0; k < dim_a; ++k) out(i, j) += m(k * dim_b + i, k * dim_b + j);
    return out;
}

Matrix swap_operator(int dim) {
    const int n = dim * dim;
    Matrix s = Matrix::Zero(n, n);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s(j * dim + i, i * dim + j) = 1.0;
    return s;
}

double hermiticity_error(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Matrix psd_sqrt(const Matrix& rho) {
    require_square(rho, "psd_sqrt argument");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    const Eigen::VectorXd w = clipped_eigenvalues(es.eigenvalues()).cwiseSqrt();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw ValidationError("fidelity: dimension mismatch");
    }
    const Matrix sr = psd_sqrt(rho);
    const Matrix inner = sr * sigma * sr;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double root_sum = clipped_eigenvalues(es.eigenvalues()).cwiseSqrt().sum();
    return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return fidelity(rho.matrix(), sigma.matrix());
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw ValidationError("trace_distance: dimension mismatch");
    }
    Eigen::JacobiSVD<Matrix> svd(rho - sigma);
    return 0.5 * svd.singularValues().sum();
}

Superoperator superop_from_kraus(std::span<const Matrix> kraus) {
    if (kraus.empty()) throw ValidationError("superop_from_kraus: empty Kraus list");
    const Eigen::Index d = kraus.front().rows();
    Matrix s = Matrix::Zero(d * d, d * d);
    for (const auto& a : kraus) {
        if (a.rows() != d || a.cols() != d) {
            throw ValidationError("superop_from_kraus: Kraus operators differ in dimension");
        }
        s += tensor_product(a.conjugate(), a);
    }
    return Superoperator(std::move(s));
}

Superoperator superop_from_unitary(const Matrix& u) {
    return Superoperator(tensor_product(u.conjugate(), u));
}

Matrix apply_superop(const Superoperator& s, const Matrix& rho) { return s.apply(rho); }

ChoiMatrix choi_of(const Superoperator& s) {
    const int d = s.hilbert_dim();
    Matrix c = Matrix::Zero(d * d, d * d);
    for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
            Matrix ekl = Matrix::Zero(d, d);
            ekl(k, l) = 1.0;
            c.block(k * d, l * d, d, d) = s.apply(ekl);
        }
    }
    return ChoiMatrix(std::move(c));
}

double min_eigenvalue_hermitian(const Matrix& m) {
    require_square(m, "min_eigenvalue_hermitian argument");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (hermiticity_error(m) > kHermitianTolerance * scale) {
        throw ValidationError("min_eigenvalue_hermitian: matrix is not Hermitian (deviation " +
                              std::to_string(hermiticity_error(m)) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix matrix_function(const Matrix& m, MatrixFunction f) {
    require_square(m, "matrix_function argument");
    if (f == MatrixFunction::Exp) return m.exp();

    Eigen::ComplexEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("matrix_function: eigensolver failed");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex z = es.eigenvalues()(i);
        if (z.real() <= 1e-14 * scale && std::abs(z.imag()) <= 1e-12 * scale) {
            throw ValidationError("matrix_function: eigenvalue " + std::to_string(z.real()) +
                                  " lies on the branch cut (closed negative real axis)");
        }
    }
    Eigen::JacobiSVD<Matrix> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < kMaxEigenbasisCondition)) {
        throw ValidationError("matrix_function: matrix is not diagonalizable within conditioning threshold");
    }
    return f == MatrixFunction::Log ? Matrix(m.log()) : Matrix(m.sqrt());
}

}  // namespace pmme::qcore
