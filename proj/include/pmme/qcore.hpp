// Dense complex linear algebra for finite-dimensional states, channels
// and superoperators.
//
// Vectorization is column stacking throughout: vec(A X B) = (B^T ⊗ A) vec(X),
// so composing superoperators is plain matrix multiplication.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pmme {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

}  // namespace pmme

namespace pmme::qcore {

/// d×d Hermitian, unit-trace, positive-semidefinite matrix.
class DensityMatrix {
public:
    static constexpr double kTraceTolerance = 1e-12;
    static constexpr double kPsdTolerance = 1e-10;

    /// Validates the matrix; throws ValidationError if it is not a state
    /// within the given tolerances.
    explicit DensityMatrix(Matrix m, double trace_tol = kTraceTolerance,
                           double psd_tol = kPsdTolerance);

    /// |ψ⟩⟨ψ|; ψ must be normalized within 1e-12.
    static DensityMatrix pure(const Vector& psi);
    /// diag(p); p must be a probability vector.
    static DensityMatrix diagonal(std::span<const double> p);

    const Matrix& matrix() const noexcept { return m_; }
    int dim() const noexcept { return static_cast<int>(m_.rows()); }

private:
    Matrix m_;
};

class UnitaryMatrix {
public:
    static constexpr double kTolerance = 1e-10;

    explicit UnitaryMatrix(Matrix u, double tol = kTolerance);
    static UnitaryMatrix identity(int dim);

    const Matrix& matrix() const noexcept { return u_; }
    int dim() const noexcept { return static_cast<int>(u_.rows()); }

    UnitaryMatrix operator*(const UnitaryMatrix& rhs) const;
    UnitaryMatrix adjoint() const;

private:
    Matrix u_;
};

/// d²×d² matrix acting on column-stacked operators.
class Superoperator {
public:
    explicit Superoperator(Matrix s);
    static Superoperator identity(int hilbert_dim);
    static Superoperator zero(int hilbert_dim);

    const Matrix& matrix() const noexcept { return s_; }
    int hilbert_dim() const noexcept { return d_; }

    Matrix apply(const Matrix& rho) const;
    /// (this ∘ rhs): apply rhs first.
    Superoperator operator*(const Superoperator& rhs) const;
    Superoperator operator+(const Superoperator& rhs) const;
    Superoperator operator-(const Superoperator& rhs) const;
    Superoperator operator*(Complex c) const;

    /// max |vec(I)† S − vec(I)†|: zero for trace-preserving maps.
    double trace_preservation_error() const;
    bool is_trace_preserving(double tol = 1e-10) const { return trace_preservation_error() <= tol; }

private:
    Matrix s_;
    int d_;
};

/// Σ_{kl} |k⟩⟨l| ⊗ S[|k⟩⟨l|]; the first tensor factor is the reference copy.
class ChoiMatrix {
public:
    explicit ChoiMatrix(Matrix c) : c_(std::move(c)) {}
    const Matrix& matrix() const noexcept { return c_; }

private:
    Matrix c_;
};

enum class Subsystem { A, B };
enum class MatrixFunction { Exp, Log, Sqrt };

Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int dim);

/// A ⊗ B with A's indices outer.
Matrix tensor_product(const Matrix& a, const Matrix& b);

/// Reduced matrix on `keep` of an operator on A⊗B.
Matrix partial_trace(const Matrix& m, int dim_a, int dim_b, Subsystem keep);

/// Swap operator on d⊗d.
Matrix swap_operator(int dim);

/// {Tr √(√ρ σ √ρ)}². Eigenvalues in (−1e-10, 0) are clipped to zero;
/// anything more negative is rejected.
double fidelity(const Matrix& rho, const Matrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// ½‖ρ − σ‖₁ from the singular values of the difference.
double trace_distance(const Matrix& rho, const Matrix& sigma);

Superoperator superop_from_kraus(std::span<const Matrix> kraus);
/// Superoperator of X ↦ U X U†.
Superoperator superop_from_unitary(const Matrix& u);
Matrix apply_superop(const Superoperator& s, const Matrix& rho);

ChoiMatrix choi_of(const Superoperator& s);

/// Smallest eigenvalue of (M + M†)/2; M must be Hermitian within 1e-9.
double min_eigenvalue_hermitian(const Matrix& m);

/// Primary matrix function. Log and Sqrt reject spectra on the closed
/// negative real axis (branch cut) and ill-conditioned eigenbases.
Matrix matrix_function(const Matrix& m, MatrixFunction f);

/// ‖M − M†‖ max-norm.
double hermiticity_error(const Matrix& m);

/// √ρ for a Hermitian PSD matrix, with the fidelity clipping rule.
Matrix psd_sqrt(const Matrix& rho);

}  // namespace pmme::qcore
