// Shared test fixtures: seeded random states and the qubit thermalization
// setting (|ψ⟩ = (|0⟩ + 2|1⟩)/√5, η = diag(3/5, 2/5), α = 0.1, β = 0.9).

#pragma once

#include <cmath>
#include <random>

#include "pmme/collision.hpp"
#include "pmme/qcore.hpp"

namespace pmme::testing {

inline Matrix random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline qcore::DensityMatrix random_density(int d, std::mt19937_64& rng) {
    const Matrix g = random_matrix(d, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return qcore::DensityMatrix(0.5 * (rho + rho.adjoint()));
}

inline Matrix random_hermitian(int d, std::mt19937_64& rng) {
    const Matrix g = random_matrix(d, rng);
    return 0.5 * (g + g.adjoint());
}

inline Matrix random_unitary(int d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(d, rng));
    return qr.householderQ() * Matrix::Identity(d, d);
}

inline Vector fig_psi() {
    Vector psi(2);
    psi << 1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0);
    return psi;
}

inline qcore::DensityMatrix fig_rho0() { return qcore::DensityMatrix::pure(fig_psi()); }

inline qcore::DensityMatrix fig_eta() {
    const double p[] = {0.6, 0.4};
    return qcore::DensityMatrix::diagonal(p);
}

inline collision::CollisionSpec fig_spec(double alpha = 0.1, double tau = 0.01) {
    return collision::CollisionSpec(2, 2, collision::pswap(alpha, 2), tau);
}

inline collision::MeasurementSpec fig_measurement(double beta = 0.9) {
    return collision::MeasurementSpec::sigma_x(collision::pswap(beta, 2));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace pmme::testing
