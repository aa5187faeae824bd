// Post-Markovian master equation
//   dρ/dt = ∫₀ᵗ dt′ k(t′) e^{ℒt′} ℰ ℒ ρ(t − t′)
// solved in the damping basis of ℒ by Laplace-domain inversion, plus an
// independent time-stepping integrator and the derived maps (dynamical map,
// inverse, time-local generator, Choi positivity scan).

#pragma once

#include <vector>

#include "pmme/kernel.hpp"
#include "pmme/lindblad.hpp"
#include "pmme/qcore.hpp"

namespace pmme::solver {

using kernel::MemoryKernel;
using lindblad::SpectralDecomposition;
using qcore::DensityMatrix;
using qcore::Superoperator;

class PMMEProblem {
public:
    static constexpr double kChannelTolerance = 1e-9;

    // Decomposes ℒ and checks that ℰ is CPTP within 1e-9.
    static PMMEProblem create(const Superoperator& generator, const Superoperator& measurement_map,
                              MemoryKernel kernel);

    const Superoperator& generator() const noexcept { return generator_; }
    const Superoperator& measurement_map() const noexcept { return measurement_; }
    const SpectralDecomposition& spectral() const noexcept { return spectral_; }
    const MemoryKernel& kernel() const noexcept { return kernel_; }
    // E(j, i) = Tr(L_j ℰ[R_i]).
    const Matrix& e_matrix() const noexcept { return e_matrix_; }
    int hilbert_dim() const noexcept { return generator_.hilbert_dim(); }
    int size() const noexcept { return static_cast<int>(spectral_.eigenvalues.size()); }

    // e^{ℒt} from the decomposition.
    Matrix semigroup(double t) const;

private:
    PMMEProblem(Superoperator l, Superoperator e, SpectralDecomposition sd, MemoryKernel k, Matrix em);

    Superoperator generator_;
    Superoperator measurement_;
    SpectralDecomposition spectral_;
    MemoryKernel kernel_;
    Matrix e_matrix_;
};

// Ω_ji(s) = s δ_ji − λ_i E_ji L[k(t) e^{λ_j t}](s). Uses the strict kernel
// transform, so s must lie in the region of convergence for every λ_j.
Matrix build_omega(const PMMEProblem& problem, Complex s);

// Ω(s)⁻¹ via the analytically continued, row-equilibrated Ω. Valid on any
// inversion contour that avoids the singularities.
Matrix omega_inverse(const PMMEProblem& problem, Complex s);

enum class InversionMethod { Talbot, DeHoog };

struct SolverOptions {
    InversionMethod method = InversionMethod::Talbot;
    int nodes = 64;                   // Talbot nodes M
    bool check_doubling = true;       // compare M and 2M nodes
    double doubling_tolerance = 1e-6;
    int dehoog_terms = 20;
    double dehoog_tolerance = 1e-12;
    double dehoog_error_tolerance = 1e-6;
    unsigned threads = 0;             // 0: hardware concurrency
};

struct PropagatorW {
    std::vector<double> times;
    std::vector<Matrix> matrices;
    // Largest entry-wise change under node doubling (Talbot) or between the
    // last two continued-fraction approximants (de Hoog).
    double max_error_estimate = 0.0;

    // Index of t in the grid; throws ValidationError if t is off grid.
    std::size_t index_of(double t) const;
    const Matrix& at(double t) const { return matrices[index_of(t)]; }
};

// 𝒲(t) = L⁻¹[Ω⁻¹](t) on the grid. 𝒲(0) = I exactly. The delta kernel
// bypasses inversion: 𝒲 = diag(e^{λ_i t}).
PropagatorW solve_W(const PMMEProblem& problem, const std::vector<double>& times, const SolverOptions& options = {});

// Uniform grid 0, dt, ..., t_max (t_max rounded to a multiple of dt).
std::vector<double> uniform_grid(double t_max, double dt);

// ρ(t) = Σ_ij 𝒲_ij(t) Tr(L_j ρ₀) R_i, symmetrized. Positivity is not
// enforced: a non-CP kernel may leave the state space. Throws
// NumericalError if the Hermiticity deviation or trace error exceeds 1e-8.
Matrix propagate(const PMMEProblem& problem, const PropagatorW& w, const DensityMatrix& rho0, double t);

struct DirectTrajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Matrix> states;
    double max_trace_drift = 0.0;

    const Matrix& at(double t) const;
};

// Trapezoidal convolution quadrature with Crank–Nicolson stepping;
// second-order in dt. Requires dt ≤ 1e-2 / max|λ_i|; throws NumericalError
// if the trace drifts by more than 1e-6.
DirectTrajectory integrate_pmme_direct(const PMMEProblem& problem, const DensityMatrix& rho0, double t_max, double dt);

// Φ(t) = Σ_ij 𝒲_ij(t) vec(R_i) (row j of the left functionals).
Superoperator dynamical_map(const PMMEProblem& problem, const PropagatorW& w, double t);

// Φ⁻¹(t) from 𝒲(t)⁻¹. Throws NumericalError if |det 𝒲(t)| ≤ 1e-12.
Superoperator inverse_map(const PMMEProblem& problem, const PropagatorW& w, double t);

// K_TCL(t) = ∫₀ᵗ k(t′) e^{ℒt′} ℰ ℒ Φ(t − t′) dt′ · Φ⁻¹(t), trapezoid rule on
// the (uniform) grid. The delta kernel gives ℒ.
Superoperator tcl_generator(const PMMEProblem& problem, const PropagatorW& w, double t);

// 𝒦(t′) = k(t′) e^{ℒt′} ℰ ℒ. For the delta kernel the whole mass sits at
// t′ = 0, where the kernel is ℒ; it vanishes for t′ > 0.
Superoperator nz_kernel(const PMMEProblem& problem, double t_prime);

// Σ_ij 𝒲_ij L_jᵀ ⊗ R_i.
Matrix choi_from_w(const PMMEProblem& problem, const Matrix& w);

struct CpPoint {
    double t;
    double min_eigenvalue;
    double construction_mismatch;  // vs choi_of(dynamical_map)
};

struct CpScan {
    static constexpr double kCpTolerance = -1e-8;
    static constexpr double kMismatchTolerance = 1e-9;

    std::vector<CpPoint> points;
    bool completely_positive = true;  // every min eigenvalue ≥ −1e-8
    double max_mismatch = 0.0;
    bool constructions_agree = true;  // max_mismatch ≤ 1e-9
};

CpScan cp_scan(const PMMEProblem& problem, const PropagatorW& w, unsigned threads = 0);

}  // namespace pmme::solver
