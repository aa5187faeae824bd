// GKSL generators and their damping-basis (biorthonormal eigen-operator)
// decomposition.

#pragma once

#include <vector>

#include "pmme/qcore.hpp"

namespace pmme::lindblad {

using qcore::Superoperator;

struct JumpOperator {
    Matrix op;
    double rate;
};

// ℒX = −i[H, X] + Σ_α a_α (L_α X L_α† − ½{L_α† L_α, X}).
struct LindbladGenerator {
    Matrix hamiltonian;
    std::vector<JumpOperator> jumps;

    // Throws ValidationError on negative rates, non-Hermitian H or
    // mismatched dimensions.
    void validate() const;
    int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

struct SpectralDecomposition {
    std::vector<Complex> eigenvalues;
    std::vector<Matrix> right_ops;  // R_i
    std::vector<Matrix> left_ops;   // L_i with Tr(L_i R_j) = δ_ij
    double condition_number = 1.0;  // of the right eigenvector matrix

    // Columns are vec(R_i).
    Matrix right_matrix;
    // Rows are the functionals X ↦ Tr(L_i X) acting on vec(X).
    Matrix left_matrix;

    int hilbert_dim() const;
    // Σ_i λ_i vec(R_i) ⊗ (row i of left_matrix).
    Matrix reconstruct() const;
    // μ_i = Tr(L_i X).
    Vector coefficients(const Matrix& x) const;
    // Σ_i μ_i R_i.
    Matrix expand(const Vector& mu) const;
};

Superoperator build_superoperator(const LindbladGenerator& gen);

// Amplitude damping σ₋ at rate γ, H = 0.
LindbladGenerator amplitude_damping(double gamma);

// ℒ = log(ξ)/τ from the principal logarithm. Rejects maps with spectrum on
// the negative real axis and checks ‖e^{ℒτ} − ξ‖ ≤ 1e-10.
Superoperator from_collision_map(const Superoperator& xi, double tau);

// Eigen-decomposition sorted by decreasing real part (ties by imaginary
// part). Left operators come from the inverse of the right eigenvector
// matrix. A unique stationary R is normalized to unit trace. The zero
// generator returns the canonical operator basis.
SpectralDecomposition spectral_decompose(const Superoperator& l);

// max_ij |Tr(L_i R_j) − δ_ij|.
double verify_biorthonormality(const SpectralDecomposition& sd);

}  // namespace pmme::lindblad
