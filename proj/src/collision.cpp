#include "pmme/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "pmme/errors.hpp"

namespace pmme::collision {

namespace {

constexpr double kHermitianTolerance = 1e-10;
constexpr double kBasisTolerance = 1e-10;
constexpr double kKrausTolerance = 1e-10;
// Outputs of long chains accumulate roundoff; states are re-validated with
// this trace tolerance instead of the constructor default.
constexpr double kOutputTraceTolerance = 1e-10;
constexpr double kOutputPsdTolerance = 1e-9;

DensityMatrix as_state(const Matrix& m) {
    return DensityMatrix(0.5 * (m + m.adjoint()), kOutputTraceTolerance, kOutputPsdTolerance);
}

void require_hermitian(const Matrix& h, const char* name) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw ValidationError(std::string(name) + " must be a non-empty square matrix");
    }
    if (qcore::hermiticity_error(h) > kHermitianTolerance) {
        throw ValidationError(std::string(name) + " is not Hermitian");
    }
}

void check_dims(const CollisionSpec& spec, const DensityMatrix& eta, const DensityMatrix& rho) {
    if (eta.dim() != spec.ancilla_dim) {
        throw ValidationError("ancilla state dimension " + std::to_string(eta.dim()) +
                              " does not match collision spec (" + std::to_string(spec.ancilla_dim) + ")");
    }
    if (rho.dim() != spec.system_dim) {
        throw ValidationError("system state dimension " + std::to_string(rho.dim()) +
                              " does not match collision spec (" + std::to_string(spec.system_dim) + ")");
    }
}

// Superoperator of ρ ↦ Tr_B[G (ρ ⊗ η) G†] for any joint operator G.
Superoperator reduced_channel(const Matrix& g, int ds, int da, const Matrix& eta) {
    Matrix s(ds * ds, ds * ds);
    for (int k = 0; k < ds; ++k) {
        for (int l = 0; l < ds; ++l) {
            Matrix ekl = Matrix::Zero(ds, ds);
            ekl(k, l) = 1.0;
            const Matrix joint = g * qcore::tensor_product(ekl, eta) * g.adjoint();
            s.col(l * ds + k) = qcore::vec(qcore::partial_trace(joint, ds, da, qcore::Subsystem::A));
        }
    }
    return Superoperator(std::move(s));
}

std::vector<Vector> qubit_basis(const Vector& a, const Vector& b) { return {a, b}; }

}  // namespace

CollisionSpec::CollisionSpec(int system_dim_, int ancilla_dim_, UnitaryMatrix unitary_, double tau_)
    : system_dim(system_dim_), ancilla_dim(ancilla_dim_), unitary(std::move(unitary_)), tau(tau_) {
    if (system_dim <= 0 || ancilla_dim <= 0) throw ValidationError("dimensions must be positive");
    if (unitary.dim() != system_dim * ancilla_dim) {
        throw ValidationError("collision unitary dimension " + std::to_string(unitary.dim()) +
                              " is not system_dim·ancilla_dim = " + std::to_string(system_dim * ancilla_dim));
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("collision duration tau must be positive");
}

MeasurementSpec::MeasurementSpec(std::vector<Vector> basis_, UnitaryMatrix pre_measurement_)
    : basis(std::move(basis_)), pre_measurement(std::move(pre_measurement_)) {
    if (basis.empty()) throw ValidationError("measurement basis is empty");
    const Eigen::Index d = basis.front().size();
    if (static_cast<Eigen::Index>(basis.size()) != d) {
        throw ValidationError("measurement basis is incomplete: " + std::to_string(basis.size()) +
                              " vectors for ancilla dimension " + std::to_string(d));
    }
    Matrix gram(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (basis[static_cast<std::size_t>(i)].size() != d) {
            throw ValidationError("measurement basis vectors differ in dimension");
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            gram(i, j) = basis[static_cast<std::size_t>(i)].dot(basis[static_cast<std::size_t>(j)]);
        }
    }
    if ((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kBasisTolerance) {
        throw ValidationError("measurement basis is not orthonormal");
    }
    if (pre_measurement.dim() % d != 0) {
        throw ValidationError("pre-measurement unitary dimension is not a multiple of the ancilla dimension");
    }
}

MeasurementSpec MeasurementSpec::sigma_x(UnitaryMatrix pre_measurement) {
    const double r = 1.0 / std::sqrt(2.0);
    Vector plus(2), minus(2);
    plus << r, r;
    minus << r, -r;
    return MeasurementSpec(qubit_basis(plus, minus), std::move(pre_measurement));
}

MeasurementSpec MeasurementSpec::sigma_z(UnitaryMatrix pre_measurement) {
    Vector zero(2), one(2);
    zero << 1.0, 0.0;
    one << 0.0, 1.0;
    return MeasurementSpec(qubit_basis(zero, one), std::move(pre_measurement));
}

DiscreteKernelWeights::DiscreteKernelWeights(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw ValidationError("kernel weights are empty");
    for (double w : w_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("kernel weights must be finite and non-negative");
    }
    const double total = std::accumulate(w_.begin(), w_.end(), 0.0);
    if (std::abs(total - 1.0) > kNormTolerance) {
        throw ValidationError("kernel weights sum to " + std::to_string(total) + ", not 1");
    }
}

UnitaryMatrix collision_unitary_from_hamiltonians(const Matrix& h_system, const Matrix& h_bath,
                                                  const Matrix& v, double tau) {
    require_hermitian(h_system, "H_S");
    require_hermitian(h_bath, "H_B");
    require_hermitian(v, "V");
    const auto ds = h_system.rows();
    const auto db = h_bath.rows();
    if (v.rows() != ds * db) throw ValidationError("V dimension does not match H_S ⊗ H_B");
    if (!(tau > 0.0)) throw ValidationError("collision duration tau must be positive");
    const Matrix h = qcore::tensor_product(h_system, Matrix::Identity(db, db)) +
                     qcore::tensor_product(Matrix::Identity(ds, ds), h_bath) + v;
    const Matrix u = (Complex(0.0, -tau) * h).exp();
    return UnitaryMatrix(u);
}

UnitaryMatrix pswap(double alpha, int subsystem_dim) {
    if (subsystem_dim < 2) throw ValidationError("pswap requires subsystem dimension >= 2");
    const int n = subsystem_dim * subsystem_dim;
    const Matrix u = std::cos(alpha) * Matrix::Identity(n, n) +
                     Complex(0.0, std::sin(alpha)) * qcore::swap_operator(subsystem_dim);
    return UnitaryMatrix(u);
}

Superoperator collision_map(const CollisionSpec& spec, const DensityMatrix& eta) {
    if (eta.dim() != spec.ancilla_dim) throw ValidationError("ancilla state dimension mismatch");
    return reduced_channel(spec.unitary.matrix(), spec.system_dim, spec.ancilla_dim, eta.matrix());
}

DensityMatrix markov_step(const CollisionSpec& spec, const DensityMatrix& eta, const DensityMatrix& rho) {
    check_dims(spec, eta, rho);
    const Matrix joint = spec.unitary.matrix() * qcore::tensor_product(rho.matrix(), eta.matrix()) *
                         spec.unitary.matrix().adjoint();
    return as_state(qcore::partial_trace(joint, spec.system_dim, spec.ancilla_dim, qcore::Subsystem::A));
}

std::vector<DensityMatrix> markov_evolve(const CollisionSpec& spec, const DensityMatrix& eta,
                                         const DensityMatrix& rho0, int n_collisions) {
    check_dims(spec, eta, rho0);
    if (n_collisions < 0) throw ValidationError("number of collisions must be non-negative");
    const Superoperator xi = collision_map(spec, eta);
    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(n_collisions) + 1);
    out.push_back(rho0);
    Matrix rho = rho0.matrix();
    for (int n = 0; n < n_collisions; ++n) {
        rho = xi.apply(rho);
        out.push_back(as_state(rho));
    }
    return out;
}

std::vector<Matrix> measurement_kraus(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                      const Vector& chi) {
    const int ds = spec.system_dim;
    const int da = spec.ancilla_dim;
    if (static_cast<int>(mspec.basis.size()) != da || mspec.pre_measurement.dim() != ds * da) {
        throw ValidationError("measurement spec does not match the collision dimensions");
    }
    if (chi.size() != da) throw ValidationError("ancilla state vector dimension mismatch");
    if (std::abs(chi.norm() - 1.0) > 1e-12) throw ValidationError("ancilla state vector is not normalized");

    const Matrix g = mspec.pre_measurement.matrix() * spec.unitary.matrix();
    const Matrix id_s = Matrix::Identity(ds, ds);
    const Matrix embed_chi = qcore::tensor_product(id_s, Matrix(chi));
    std::vector<Matrix> kraus;
    kraus.reserve(mspec.basis.size());
    for (const auto& m : mspec.basis) {
        const Matrix project = qcore::tensor_product(id_s, Matrix(m.adjoint()));
        kraus.push_back(project * g * embed_chi);
    }
    return kraus;
}

Superoperator measurement_channel(const CollisionSpec& spec, const MeasurementSpec& mspec, const Vector& chi) {
    const auto kraus = measurement_kraus(spec, mspec, chi);
    Matrix completeness = Matrix::Zero(spec.system_dim, spec.system_dim);
    for (const auto& a : kraus) completeness += a.adjoint() * a;
    const double err = (completeness - Matrix::Identity(spec.system_dim, spec.system_dim)).cwiseAbs().maxCoeff();
    if (err > kKrausTolerance) {
        throw NumericalError("measurement Kraus operators violate completeness by " + std::to_string(err));
    }
    return qcore::superop_from_kraus(kraus);
}

Superoperator measurement_channel(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                  const DensityMatrix& eta) {
    if (eta.dim() != spec.ancilla_dim) throw ValidationError("ancilla state dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (eta.matrix() + eta.matrix().adjoint()));
    std::vector<Matrix> kraus;
    for (Eigen::Index p = 0; p < es.eigenvalues().size(); ++p) {
        const double w = es.eigenvalues()(p);
        if (w <= 0.0) continue;
        for (auto& a : measurement_kraus(spec, mspec, es.eigenvectors().col(p).normalized())) {
            kraus.push_back(std::sqrt(w) * a);
        }
    }
    Matrix completeness = Matrix::Zero(spec.system_dim, spec.system_dim);
    for (const auto& a : kraus) completeness += a.adjoint() * a;
    const double err = (completeness - Matrix::Identity(spec.system_dim, spec.system_dim)).cwiseAbs().maxCoeff();
    if (err > kKrausTolerance) {
        throw NumericalError("measurement Kraus operators violate completeness by " + std::to_string(err));
    }
    return qcore::superop_from_kraus(kraus);
}

DensityMatrix deterministic_run(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                const DensityMatrix& eta, const DensityMatrix& rho0, int m, int n_collisions) {
    check_dims(spec, eta, rho0);
    if (m < 1 || m > n_collisions) {
        throw ValidationError("measured ancilla index " + std::to_string(m) + " outside 1.." +
                              std::to_string(n_collisions));
    }
    const Superoperator xi = collision_map(spec, eta);
    const Superoperator e = measurement_channel(spec, mspec, eta);
    Vector v = qcore::vec(rho0.matrix());
    for (int n = 1; n < m; ++n) v = xi.matrix() * v;
    v = e.matrix() * v;
    for (int n = m; n < n_collisions; ++n) v = xi.matrix() * v;
    return as_state(qcore::unvec(v, spec.system_dim));
}

DensityMatrix probabilistic_run(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                const DensityMatrix& eta, const DensityMatrix& rho0,
                                const DiscreteKernelWeights& weights, int n_collisions,
                                WeightOrientation orientation) {
    check_dims(spec, eta, rho0);
    if (n_collisions < 1) throw ValidationError("number of collisions must be at least 1");
    if (weights.size() != n_collisions) {
        throw ValidationError("kernel weights have length " + std::to_string(weights.size()) + ", expected " +
                              std::to_string(n_collisions));
    }
    const Matrix xi = collision_map(spec, eta).matrix();
    const Matrix e = measurement_channel(spec, mspec, eta).matrix();

    // before[j] = ξ^j ρ₀. The sum Σ_a w_a ξ^{N−a} ℰ ξ^{a−1} ρ₀ over the
    // measured ancilla a is accumulated Horner-style from a = N down to 1.
    std::vector<Vector> before(static_cast<std::size_t>(n_collisions));
    before[0] = qcore::vec(rho0.matrix());
    for (int j = 1; j < n_collisions; ++j) before[static_cast<std::size_t>(j)] = xi * before[static_cast<std::size_t>(j - 1)];

    auto weight_of_ancilla = [&](int a) {
        return orientation == WeightOrientation::ByAncilla ? weights[a] : weights[n_collisions - a + 1];
    };
    Vector acc = Vector::Zero(before[0].size());
    for (int a = 1; a <= n_collisions; ++a) {
        acc = xi * acc;
        acc += weight_of_ancilla(a) * (e * before[static_cast<std::size_t>(a - 1)]);
    }
    return as_state(qcore::unvec(acc, spec.system_dim));
}

std::vector<DensityMatrix> probabilistic_trajectory(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                                    const DensityMatrix& eta, const DensityMatrix& rho0,
                                                    const DiscreteKernelWeights& weights) {
    check_dims(spec, eta, rho0);
    const int n_total = weights.size();
    const Matrix xi = collision_map(spec, eta).matrix();
    const Matrix e = measurement_channel(spec, mspec, eta).matrix();

    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(n_total) + 1);
    out.push_back(rho0);
    Vector plain = qcore::vec(rho0.matrix());       // ξ^{n} ρ₀
    Vector measured = Vector::Zero(plain.size());   // Σ_{m≤n} k_m ξ^{n−m} ℰ ξ^{m−1} ρ₀
    double remaining = 1.0;
    for (int n = 1; n <= n_total; ++n) {
        measured = xi * measured + weights[n] * (e * plain);
        plain = xi * plain;
        remaining -= weights[n];
        const Vector state = measured + std::max(remaining, 0.0) * plain;
        out.push_back(as_state(qcore::unvec(state, spec.system_dim)));
    }
    return out;
}

DiscreteKernelWeights gaussian_weights(double center, double width, int n_collisions) {
    if (n_collisions < 1) throw ValidationError("number of collisions must be at least 1");
    if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("gaussian width must be positive");
    std::vector<double> logw(static_cast<std::size_t>(n_collisions));
    for (int m = 1; m <= n_collisions; ++m) {
        const double x = (m - center) / width;
        logw[static_cast<std::size_t>(m - 1)] = -0.5 * x * x;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    std::vector<double> w(logw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(logw[i] - top);
        total += w[i];
    }
    for (double& x : w) x /= total;
    return DiscreteKernelWeights(std::move(w));
}

}  // namespace pmme::collision
