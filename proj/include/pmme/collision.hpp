// Discrete collisional model: Markovian collision chains and the chain with
// a probabilistic, non-selective measurement on one ancilla.

#pragma once

#include <vector>

#include "pmme/qcore.hpp"

namespace pmme::collision {

using qcore::DensityMatrix;
using qcore::Superoperator;
using qcore::UnitaryMatrix;

struct CollisionSpec {
    int system_dim;
    int ancilla_dim;
    UnitaryMatrix unitary;  // on system ⊗ ancilla
    double tau;

    // Throws ValidationError on dimension mismatch or tau <= 0.
    CollisionSpec(int system_dim, int ancilla_dim, UnitaryMatrix unitary, double tau);
};

struct MeasurementSpec {
    std::vector<Vector> basis;           // orthonormal ancilla basis {|M^l⟩}
    UnitaryMatrix pre_measurement;       // applied after the collision unitary

    MeasurementSpec(std::vector<Vector> basis, UnitaryMatrix pre_measurement);

    // Qubit eigenbases of σ_x and σ_z.
    static MeasurementSpec sigma_x(UnitaryMatrix pre_measurement);
    static MeasurementSpec sigma_z(UnitaryMatrix pre_measurement);
};

// Probability k_m of measuring ancilla m, m = 1..N (index 0 holds k_1).
class DiscreteKernelWeights {
public:
    static constexpr double kNormTolerance = 1e-9;

    explicit DiscreteKernelWeights(std::vector<double> weights);

    const std::vector<double>& weights() const noexcept { return w_; }
    int size() const noexcept { return static_cast<int>(w_.size()); }
    double operator[](int m) const { return w_.at(static_cast<std::size_t>(m - 1)); }

private:
    std::vector<double> w_;
};

// How k_m is attached to a collision in an N-collision run.
//   ByAncilla: k_m weighs a measurement on ancilla m (m−1 collisions before
//              it, N−m after).
//   ByElapsed: k_m weighs a measurement whose outcome has evolved for
//              m−1 further collisions, i.e. ancilla N−m+1 is measured. This
//              is the orientation whose continuum limit has k(t′) weighting
//              the elapsed time t′ since the measurement.
enum class WeightOrientation { ByAncilla, ByElapsed };

UnitaryMatrix collision_unitary_from_hamiltonians(const Matrix& h_system, const Matrix& h_bath,
                                                  const Matrix& v, double tau);

// cos α I + i sin α S on d ⊗ d.
UnitaryMatrix pswap(double alpha, int subsystem_dim);

// ξ[ρ] = Tr_B[U (ρ ⊗ η) U†] as a superoperator.
Superoperator collision_map(const CollisionSpec& spec, const DensityMatrix& eta);

DensityMatrix markov_step(const CollisionSpec& spec, const DensityMatrix& eta, const DensityMatrix& rho);

// trajectory[n] = ξⁿ[ρ₀], n = 0..N.
std::vector<DensityMatrix> markov_evolve(const CollisionSpec& spec, const DensityMatrix& eta,
                                         const DensityMatrix& rho0, int n_collisions);

// Kraus operators A^l = ⟨M^l| U_M U |χ⟩ for a pure ancilla state χ.
std::vector<Matrix> measurement_kraus(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                      const Vector& chi);
Superoperator measurement_channel(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                  const Vector& chi);
// Mixed ancilla: η = Σ_p p |χ_p⟩⟨χ_p| contributes √p ⟨M^l| U_M U |χ_p⟩.
Superoperator measurement_channel(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                  const DensityMatrix& eta);

// ξ^{N−m} ℰ ξ^{m−1} ρ₀: ancilla m is measured.
DensityMatrix deterministic_run(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                const DensityMatrix& eta, const DensityMatrix& rho0, int m, int n_collisions);

DensityMatrix probabilistic_run(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                const DensityMatrix& eta, const DensityMatrix& rho0,
                                const DiscreteKernelWeights& weights, int n_collisions,
                                WeightOrientation orientation = WeightOrientation::ByAncilla);

// System state after each collision n = 0..N when ancilla m is measured
// with probability k_m (ByAncilla). Before the measured collision the state
// is the plain chain, so entry n mixes Σ_{m≤n} k_m ξ^{n−m} ℰ ξ^{m−1} ρ₀ with
// (Σ_{m>n} k_m) ξⁿ ρ₀. Entry N equals probabilistic_run.
std::vector<DensityMatrix> probabilistic_trajectory(const CollisionSpec& spec, const MeasurementSpec& mspec,
                                                    const DensityMatrix& eta, const DensityMatrix& rho0,
                                                    const DiscreteKernelWeights& weights);

// k_m ∝ exp(−(m − center)² / (2 width²)), m = 1..N.
DiscreteKernelWeights gaussian_weights(double center, double width, int n_collisions);

}  // namespace pmme::collision
