#include "pmme/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pmme/errors.hpp"

namespace pmme::laplace {

namespace {

constexpr double kA = -0.6122;
constexpr double kB = 0.5017;
constexpr double kC = 0.6407;
constexpr double kD = 0.2645;

// Entries whose Fourier coefficients are this small relative to the largest
// entry are treated as identically zero; the QD table is meaningless there.
constexpr double kNegligibleEntry = 1e-14;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct Accelerated {
    Complex value;
    Complex previous;
};

// Σ_k a_k z^k evaluated through the QD continued fraction with the
// remainder estimate of de Hoog et al. If the QD table breaks down the
// fraction is truncated at the deepest complete level.
Accelerated accelerate(const std::vector<Complex>& a, Complex z, int m) {
    const int n = 2 * m;
    bool any = false;
    for (const auto& x : a) any = any || x != Complex(0.0);
    if (!any) return {0.0, 0.0};

    std::vector<std::vector<Complex>> q(static_cast<std::size_t>(m) + 1);
    std::vector<std::vector<Complex>> e(static_cast<std::size_t>(m) + 1);
    e[0].assign(static_cast<std::size_t>(n) + 1, 0.0);
    q[1].resize(static_cast<std::size_t>(n));
    int depth = m;
    for (int i = 0; i < n; ++i) {
        q[1][static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i + 1)] / a[static_cast<std::size_t>(i)];
        if (!finite(q[1][static_cast<std::size_t>(i)])) depth = 0;
    }
    for (int r = 1; r <= depth; ++r) {
        auto& er = e[static_cast<std::size_t>(r)];
        const auto& qr = q[static_cast<std::size_t>(r)];
        const auto& eprev = e[static_cast<std::size_t>(r - 1)];
        er.resize(static_cast<std::size_t>(n - 2 * r + 1));
        bool ok = true;
        for (int i = 0; i <= n - 2 * r; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            er[ui] = qr[ui + 1] - qr[ui] + eprev[ui + 1];
            ok = ok && finite(er[ui]) && er[ui] != Complex(0.0);
        }
        if (!ok) {
            depth = r - 1;
            break;
        }
        if (r < m) {
            auto& qn = q[static_cast<std::size_t>(r + 1)];
            qn.resize(static_cast<std::size_t>(n - 2 * r));
            for (int i = 0; i < n - 2 * r; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                qn[ui] = qr[ui + 1] * er[ui + 1] / er[ui];
                ok = ok && finite(qn[ui]);
            }
            if (!ok) {
                depth = r;
                break;
            }
        }
    }

    if (depth == 0) {
        Complex sum = 0.0, zk = 1.0, last = 0.0;
        for (const auto& x : a) {
            last = sum;
            sum += x * zk;
            zk *= z;
        }
        return {sum, last};
    }

    std::vector<Complex> d(static_cast<std::size_t>(2 * depth) + 1);
    d[0] = a[0];
    for (int r = 1; r <= depth; ++r) {
        d[static_cast<std::size_t>(2 * r - 1)] = -q[static_cast<std::size_t>(r)][0];
        d[static_cast<std::size_t>(2 * r)] = -e[static_cast<std::size_t>(r)][0];
    }
    const int top = 2 * depth;
    std::vector<Complex> aa(static_cast<std::size_t>(top) + 2), bb(static_cast<std::size_t>(top) + 2);
    aa[0] = 0.0;
    bb[0] = 1.0;
    aa[1] = d[0];
    bb[1] = 1.0;
    for (int k = 2; k <= top; ++k) {
        const Complex dz = d[static_cast<std::size_t>(k - 1)] * z;
        aa[static_cast<std::size_t>(k)] = aa[static_cast<std::size_t>(k - 1)] + dz * aa[static_cast<std::size_t>(k - 2)];
        bb[static_cast<std::size_t>(k)] = bb[static_cast<std::size_t>(k - 1)] + dz * bb[static_cast<std::size_t>(k - 2)];
    }
    const Complex h = 0.5 * (1.0 + z * (d[static_cast<std::size_t>(top - 1)] - d[static_cast<std::size_t>(top)]));
    const Complex rem = -h * (1.0 - std::sqrt(1.0 + z * d[static_cast<std::size_t>(top)] / (h * h)));
    const Complex a_last = aa[static_cast<std::size_t>(top)] + rem * aa[static_cast<std::size_t>(top - 1)];
    const Complex b_last = bb[static_cast<std::size_t>(top)] + rem * bb[static_cast<std::size_t>(top - 1)];
    Accelerated out{a_last / b_last, aa[static_cast<std::size_t>(top)] / bb[static_cast<std::size_t>(top)]};
    if (!finite(out.value)) out.value = out.previous;
    return out;
}

}  // namespace

Complex TalbotContour::point(double th) const {
    const double mu = scale_nodes / t;
    const double cot_term = th == 0.0 ? 1.0 / kC : th / std::tan(kC * th);
    return mu * Complex(kA + kB * cot_term, kD * th);
}

Complex TalbotContour::derivative(double th) const {
    const double mu = scale_nodes / t;
    if (th == 0.0) return mu * Complex(0.0, kD);
    const double sn = std::sin(kC * th);
    return mu * Complex(kB / std::tan(kC * th) - kB * kC * th / (sn * sn), kD);
}

double TalbotContour::theta(int k) const {
    return -std::numbers::pi + (k + 0.5) * 2.0 * std::numbers::pi / nodes;
}

bool TalbotContour::encloses(Complex q) const {
    const double mu = scale_nodes / t;
    const double th = q.imag() / (kD * mu);
    if (std::abs(th) >= std::numbers::pi) return false;
    return q.real() < point(th).real();
}

Matrix talbot_invert(const MatrixTransform& f, double t, int nodes, int scale_nodes) {
    if (!(t > 0.0)) throw ValidationError("talbot inversion requires t > 0");
    if (nodes < 2 || scale_nodes < 2) throw ValidationError("talbot inversion requires at least two nodes");
    const TalbotContour c{t, nodes, scale_nodes};
    Matrix acc;
    for (int k = 0; k < nodes; ++k) {
        const double th = c.theta(k);
        const Complex s = c.point(th);
        const Complex w = std::exp(s * t) * c.derivative(th);
        const Matrix fs = f(s);
        if (k == 0) {
            acc = w * fs;
        } else {
            acc += w * fs;
        }
    }
    return acc / Complex(0.0, static_cast<double>(nodes));
}

Matrix talbot_invert(const MatrixTransform& f, double t, int nodes) { return talbot_invert(f, t, nodes, nodes); }

DeHoogResult dehoog_invert(const MatrixTransform& f, double t, const DeHoogOptions& options) {
    if (!(t > 0.0)) throw ValidationError("de Hoog inversion requires t > 0");
    if (options.terms < 1) throw ValidationError("de Hoog inversion requires at least one term");
    if (!(options.tolerance > 0.0 && options.tolerance < 1.0)) throw ValidationError("de Hoog tolerance must lie in (0, 1)");
    const int m = options.terms;
    const int n = 2 * m;
    const double period = options.period_factor * t;
    const double gamma = -0.5 * std::log(options.tolerance) / period;

    // Two one-sided series: f is complex-valued in general, so the negative
    // frequencies are not the conjugates of the positive ones.
    std::vector<Matrix> plus(static_cast<std::size_t>(n) + 1), minus(static_cast<std::size_t>(n) + 1);
    plus[0] = 0.5 * f(Complex(gamma, 0.0));
    minus[0] = plus[0];
    for (int k = 1; k <= n; ++k) {
        const double w = k * std::numbers::pi / period;
        plus[static_cast<std::size_t>(k)] = f(Complex(gamma, w));
        minus[static_cast<std::size_t>(k)] = f(Complex(gamma, -w));
    }
    const Eigen::Index rows = plus[0].rows();
    const Eigen::Index cols = plus[0].cols();

    double global = 0.0;
    for (int k = 0; k <= n; ++k) {
        global = std::max(global, plus[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
        global = std::max(global, minus[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
    }

    const Complex z = std::exp(Complex(0.0, std::numbers::pi * t / period));
    const double prefactor = std::exp(gamma * t) / (2.0 * period);
    DeHoogResult out{Matrix::Zero(rows, cols), 0.0};
    std::vector<Complex> ap(static_cast<std::size_t>(n) + 1), am(static_cast<std::size_t>(n) + 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            double local = 0.0;
            for (int k = 0; k <= n; ++k) {
                ap[static_cast<std::size_t>(k)] = plus[static_cast<std::size_t>(k)](i, j);
                am[static_cast<std::size_t>(k)] = minus[static_cast<std::size_t>(k)](i, j);
                local = std::max({local, std::abs(ap[static_cast<std::size_t>(k)]), std::abs(am[static_cast<std::size_t>(k)])});
            }
            if (local <= kNegligibleEntry * global) continue;
            const Accelerated sp = accelerate(ap, z, m);
            const Accelerated sm = accelerate(am, std::conj(z), m);
            out.value(i, j) = prefactor * (sp.value + sm.value);
            out.error_estimate = std::max(
                out.error_estimate, prefactor * (std::abs(sp.value - sp.previous) + std::abs(sm.value - sm.previous)));
        }
    }
    return out;
}

}  // namespace pmme::laplace
