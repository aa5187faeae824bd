#include "pmme/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pmme/errors.hpp"
#include "pmme/special.hpp"

namespace pmme::kernel {

namespace {

constexpr double kMaxLogMagnitude = 700.0;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Term {
    Complex coefficient;
    Complex exponent;
};

ScaledComplex combine(const std::vector<Term>& terms, double factor) {
    double top = -INFINITY;
    for (const auto& t : terms) top = std::max(top, t.exponent.real());
    Complex m = 0.0;
    for (const auto& t : terms) m += t.coefficient * std::exp(t.exponent - top);
    return {m * factor, top};
}

double gaussian_norm(const TruncatedGaussian& g) {
    const double r = std::numbers::sqrt2 * g.sigma;
    return g.sigma * std::sqrt(std::numbers::pi / 2.0) * (std::erf((g.support - g.t0) / r) - std::erf(-g.t0 / r));
}

// ∫₀^T exp(−(t−t0)²/2σ²) e^{−pt} dt / norm, via erfcx so that neither large
// |p| nor Re p ≪ 0 overflows.
ScaledComplex gaussian_transform(const TruncatedGaussian& g, double norm, Complex p) {
    const double r = std::numbers::sqrt2 * g.sigma;
    const Complex b = p * g.sigma / std::numbers::sqrt2;
    const double u0 = -g.t0 / r;
    const double u1 = (g.support - g.t0) / r;
    const Complex z0 = u0 + b;
    const Complex z1 = u1 + b;
    const Complex c0 = -u0 * u0;
    const Complex c1 = -p * g.support - u1 * u1;

    std::vector<Term> terms;
    if (z0.real() >= 0.0) {
        terms = {{special::erfcx(z0), c0}, {-special::erfcx(z1), c1}};
    } else if (z1.real() >= 0.0) {
        const Complex g_exp = -p * g.t0 + b * b;
        terms = {{2.0, g_exp}, {-special::erfcx(-z0), c0}, {-special::erfcx(z1), c1}};
    } else {
        // erfc(z) = 2 − erfc(−z) for both endpoints; the two 2e^{b²−pt0}
        // pieces cancel exactly.
        terms = {{special::erfcx(-z1), c1}, {-special::erfcx(-z0), c0}};
    }
    return combine(terms, g.sigma * std::sqrt(std::numbers::pi / 2.0) / norm);
}

double tabulated_integral(const Tabulated& t) {
    const auto& s = t.samples;
    if (s.size() < 2) return 0.0;
    double acc = 0.5 * (s.front() + s.back());
    for (std::size_t i = 1; i + 1 < s.size(); ++i) acc += s[i];
    return acc * t.spacing;
}

// ∫₀^h e^{−pu} du and ∫₀^h u e^{−pu} du, with series near p·h = 0.
std::pair<Complex, Complex> segment_moments(Complex p, double h) {
    const Complex x = p * h;
    if (std::abs(x) < 0.5) {
        Complex i0 = 0.0, i1 = 0.0, term = 1.0;  // term = (−x)^k / k!
        for (int k = 0; k < 30; ++k) {
            i0 += term / static_cast<double>(k + 1);
            i1 += term / static_cast<double>(k + 2);
            term *= -x / static_cast<double>(k + 1);
        }
        return {h * i0, h * h * i1};
    }
    const Complex e = std::exp(-x);
    return {(1.0 - e) / p, (1.0 - e * (1.0 + x)) / (p * p)};
}

ScaledComplex tabulated_transform(const Tabulated& t, Complex p) {
    const auto& s = t.samples;
    const double h = t.spacing;
    const double end = h * static_cast<double>(s.size() - 1);
    const double scale = std::max(0.0, -p.real() * end);
    Complex acc = 0.0;
    const auto [i0, i1] = segment_moments(p, h);
    const bool far = std::abs(p * h) >= 0.5 && p.real() < 0.0;
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
        const double x0 = h * static_cast<double>(j);
        const double a = s[j];
        const double slope = (s[j + 1] - a) / h;
        if (a == 0.0 && slope == 0.0) continue;
        if (far) {
            // Multiply the pieces of (1 − e^{−ph})/p by e^{−px0 − scale}
            // separately so no factor exceeds 1 in magnitude.
            const Complex e0 = std::exp(-p * x0 - scale);
            const Complex e1 = std::exp(-p * (x0 + h) - scale);
            const Complex j0 = (e0 - e1) / p;
            const Complex j1 = (e0 - e1 * (1.0 + p * h)) / (p * p);
            acc += a * j0 + slope * j1;
        } else {
            acc += std::exp(-p * x0 - scale) * (a * i0 + slope * i1);
        }
    }
    return {acc, scale};
}

}  // namespace

Complex ScaledComplex::value() const {
    if (mantissa == Complex(0.0)) return 0.0;
    return mantissa * std::exp(log_scale);
}

MemoryKernel MemoryKernel::dirac_delta() { return MemoryKernel(DiracDelta{}); }

MemoryKernel MemoryKernel::exponential(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("exponential kernel rate gamma must be positive");
    return MemoryKernel(Exponential{gamma});
}

MemoryKernel MemoryKernel::truncated_gaussian(double t0, double sigma, double support) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("gaussian kernel sigma must be positive");
    if (!(support > 0.0) || !std::isfinite(support)) throw ValidationError("gaussian kernel support must be positive");
    if (!std::isfinite(t0)) throw ValidationError("gaussian kernel center must be finite");
    TruncatedGaussian g{t0, sigma, support};
    const double norm = gaussian_norm(g);
    if (!(norm > 0.0)) throw ValidationError("gaussian kernel has no mass on [0, support]");
    MemoryKernel k(g);
    k.norm_ = norm;
    return k;
}

MemoryKernel MemoryKernel::tabulated(std::vector<double> samples, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("tabulated kernel spacing must be positive");
    if (samples.size() < 2) throw ValidationError("tabulated kernel needs at least two samples");
    for (double v : samples) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("tabulated kernel samples must be finite and non-negative");
    }
    Tabulated t{std::move(samples), spacing};
    const double integral = tabulated_integral(t);
    if (std::abs(integral - 1.0) > kNormTolerance) {
        throw ValidationError("tabulated kernel integrates to " + std::to_string(integral) + ", not 1");
    }
    return MemoryKernel(std::move(t));
}

MemoryKernel MemoryKernel::tabulated_normalized(std::vector<double> samples, double spacing) {
    Tabulated t{samples, spacing};
    const double integral = tabulated_integral(t);
    if (!(integral > 0.0)) throw ValidationError("tabulated kernel has zero mass");
    for (double& v : samples) v /= integral;
    return tabulated(std::move(samples), spacing);
}

std::string MemoryKernel::name() const {
    return std::visit(overloaded{[](const DiracDelta&) { return std::string("delta"); },
                                 [](const Exponential&) { return std::string("exponential"); },
                                 [](const TruncatedGaussian&) { return std::string("gaussian"); },
                                 [](const Tabulated&) { return std::string("tabulated"); }},
                      v_);
}

double MemoryKernel::evaluate(double t) const {
    if (t < 0.0) return 0.0;
    return std::visit(overloaded{[](const DiracDelta&) { return 0.0; },
                                 [&](const Exponential& e) { return e.gamma * std::exp(-e.gamma * t); },
                                 [&](const TruncatedGaussian& g) {
                                     if (t > g.support) return 0.0;
                                     const double x = (t - g.t0) / g.sigma;
                                     return std::exp(-0.5 * x * x) / norm_;
                                 },
                                 [&](const Tabulated& tab) {
                                     const double x = t / tab.spacing;
                                     const auto j = static_cast<std::size_t>(std::floor(x));
                                     if (j + 1 >= tab.samples.size()) {
                                         return j + 1 == tab.samples.size() && x == static_cast<double>(j)
                                                    ? tab.samples.back()
                                                    : 0.0;
                                     }
                                     const double f = x - static_cast<double>(j);
                                     return (1.0 - f) * tab.samples[j] + f * tab.samples[j + 1];
                                 }},
                      v_);
}

double MemoryKernel::support_end() const {
    return std::visit(overloaded{[](const DiracDelta&) { return 0.0; },
                                 [](const Exponential&) { return std::numeric_limits<double>::infinity(); },
                                 [](const TruncatedGaussian& g) { return g.support; },
                                 [](const Tabulated& t) {
                                     return t.spacing * static_cast<double>(t.samples.size() - 1);
                                 }},
                      v_);
}

double MemoryKernel::convergence_abscissa() const {
    if (const auto* e = std::get_if<Exponential>(&v_)) return -e->gamma;
    return -std::numeric_limits<double>::infinity();
}

ScaledComplex MemoryKernel::transform_scaled(Complex p) const {
    return std::visit(overloaded{[](const DiracDelta&) { return ScaledComplex{1.0, 0.0}; },
                                 [&](const Exponential& e) { return ScaledComplex{e.gamma / (p + e.gamma), 0.0}; },
                                 [&](const TruncatedGaussian& g) { return gaussian_transform(g, norm_, p); },
                                 [&](const Tabulated& t) { return tabulated_transform(t, p); }},
                      v_);
}

Complex MemoryKernel::laplace_shifted(Complex s, Complex lambda) const {
    const Complex p = s - lambda;
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw ValidationError("transform argument is not finite");
    if (!(p.real() > convergence_abscissa())) {
        throw ValidationError("Re(s - lambda) = " + std::to_string(p.real()) +
                              " is outside the region of convergence of the " + name() + " kernel (Re > " +
                              std::to_string(convergence_abscissa()) + ")");
    }
    const ScaledComplex v = transform_scaled(p);
    if (v.mantissa != Complex(0.0) && std::log(std::abs(v.mantissa)) + v.log_scale > kMaxLogMagnitude) {
        throw NumericalError("kernel transform overflows at Re(s - lambda) = " + std::to_string(p.real()));
    }
    return v.value();
}

}  // namespace pmme::kernel
