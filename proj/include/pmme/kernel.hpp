// Normalized memory kernels k(t) and their shifted Laplace transforms
// L[k(t) e^{λt}](s) = K(s − λ).

#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "pmme/qcore.hpp"

namespace pmme::kernel {

// Measurement only at t′ = 0: the Markovian limit.
struct DiracDelta {};

// k(t) = γ e^{−γt}.
struct Exponential {
    double gamma;
};

// k(t) ∝ exp(−(t − t0)² / 2σ²) on [0, support], renormalized there.
struct TruncatedGaussian {
    double t0;
    double sigma;
    double support;
};

// Piecewise-linear interpolation of samples k(j·spacing), j = 0..n−1,
// and zero beyond the last sample.
struct Tabulated {
    std::vector<double> samples;
    double spacing;
};

// A complex number stored as mantissa · e^{log_scale}, for transforms that
// overflow double range when continued into the left half-plane.
struct ScaledComplex {
    Complex mantissa;
    double log_scale = 0.0;

    Complex value() const;
};

class MemoryKernel {
public:
    using Variant = std::variant<DiracDelta, Exponential, TruncatedGaussian, Tabulated>;

    static constexpr double kNormTolerance = 1e-8;

    static MemoryKernel dirac_delta();
    static MemoryKernel exponential(double gamma);
    static MemoryKernel truncated_gaussian(double t0, double sigma, double support);
    // Samples must integrate to 1 within 1e-8 under the trapezoid rule.
    static MemoryKernel tabulated(std::vector<double> samples, double spacing);
    // Rescales the samples so they integrate to 1.
    static MemoryKernel tabulated_normalized(std::vector<double> samples, double spacing);

    const Variant& variant() const noexcept { return v_; }
    bool is_delta() const noexcept { return std::holds_alternative<DiracDelta>(v_); }
    std::string name() const;

    // k(t) for t ≥ 0. The delta kernel has no density; it returns 0.
    double evaluate(double t) const;

    // End of the support; infinity for the exponential kernel and 0 for the
    // delta.
    double support_end() const;

    // Left edge of the region of convergence in Re(s − λ); −∞ for entire
    // transforms.
    double convergence_abscissa() const;

    // L[k(t) e^{λt}](s). Throws ValidationError when Re(s − λ) lies outside
    // the region of convergence, NumericalError if the value overflows.
    Complex laplace_shifted(Complex s, Complex lambda) const;

    // Analytic continuation of K(p) to any p (poles excepted), in scaled
    // form so that far-left contour nodes do not overflow.
    ScaledComplex transform_scaled(Complex p) const;

private:
    explicit MemoryKernel(Variant v) : v_(std::move(v)) {}
    Variant v_;
    double norm_ = 1.0;  // TruncatedGaussian: ∫₀^T exp(−(t−t0)²/2σ²) dt
};

}  // namespace pmme::kernel
