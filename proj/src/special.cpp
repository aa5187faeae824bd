#include "pmme/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "pmme/errors.hpp"

namespace pmme::special {

namespace {

using cd = std::complex<double>;

// Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994) with 40
// terms, used near the origin; the Laplace continued fraction takes over for
// |z| >= 8 where it converges quickly.
constexpr int kTerms = 40;
constexpr double kSwitchRadius = 8.0;
constexpr int kFractionDepth = 60;

struct WeidemanTable {
    double l;
    std::array<double, kTerms> a;
};

const WeidemanTable& weideman_table() {
    static const WeidemanTable table = [] {
        WeidemanTable t{};
        constexpr int m = 2 * kTerms;
        constexpr int m2 = 2 * m;
        t.l = std::sqrt(kTerms / std::numbers::sqrt2);
        std::array<double, m2> f{};
        for (int k = -m + 1; k < m; ++k) {
            const double theta = k * std::numbers::pi / m;
            const double x = t.l * std::tan(theta / 2.0);
            // Position after fftshift of [0, g(−m+1), ..., g(m−1)].
            const int raw = k + m;
            const int shifted = (raw + m) % m2;
            f[static_cast<std::size_t>(shifted)] = std::exp(-x * x) * (t.l * t.l + x * x);
        }
        for (int n = 1; n <= kTerms; ++n) {
            double re = 0.0;
            for (int i = 0; i < m2; ++i) re += f[static_cast<std::size_t>(i)] * std::cos(2.0 * std::numbers::pi * n * i / m2);
            t.a[static_cast<std::size_t>(n - 1)] = re / m2;
        }
        return t;
    }();
    return table;
}

cd weideman(cd z) {
    const auto& t = weideman_table();
    const cd iz(-z.imag(), z.real());
    const cd denom = t.l - iz;
    const cd zz = (t.l + iz) / denom;
    cd p = 0.0;
    for (int n = kTerms - 1; n >= 0; --n) p = p * zz + t.a[static_cast<std::size_t>(n)];
    return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(std::numbers::pi)) / denom;
}

cd continued_fraction(cd z) {
    cd r = 0.0;
    for (int k = kFractionDepth; k >= 1; --k) r = (0.5 * k) / (z - r);
    return cd(0.0, 1.0 / std::sqrt(std::numbers::pi)) / (z - r);
}

}  // namespace

cd faddeeva_upper(cd z) {
    if (z.imag() < 0.0) throw ValidationError("faddeeva_upper requires Im z >= 0");
    return std::abs(z) < kSwitchRadius ? weideman(z) : continued_fraction(z);
}

cd erfcx(cd z) {
    if (z.real() < 0.0) throw ValidationError("erfcx requires Re z >= 0");
    return faddeeva_upper(cd(-z.imag(), z.real()));
}

}  // namespace pmme::special
