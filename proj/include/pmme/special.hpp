#pragma once

#include <complex>

namespace pmme::special {

// Faddeeva function w(z) = e^{−z²} erfc(−iz) for Im z ≥ 0. Relative
// accuracy is about 1e-13 over the closed upper half-plane.
std::complex<double> faddeeva_upper(std::complex<double> z);

// Scaled complementary error function erfcx(z) = e^{z²} erfc(z) for
// Re z ≥ 0.
std::complex<double> erfcx(std::complex<double> z);

}  // namespace pmme::special
