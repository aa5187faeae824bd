// Numerical inverse Laplace transforms of matrix-valued functions.

#pragma once

#include <functional>

#include "pmme/qcore.hpp"

namespace pmme::laplace {

using MatrixTransform = std::function<Matrix(Complex)>;

// Weideman's optimized cotangent contour
//   s(θ) = μ(−0.6122 + 0.5017 θ cot(0.6407 θ) + 0.2645 i θ),  μ = scale_nodes / t,
// sampled by the midpoint rule at `nodes` points. Passing nodes = 2·scale_nodes
// refines the quadrature on the same contour, which is how the doubling
// error estimate is formed.
struct TalbotContour {
    double t;
    int nodes;
    int scale_nodes;

    Complex point(double theta) const;
    Complex derivative(double theta) const;
    double theta(int k) const;
    // True if q lies strictly inside the region the contour wraps.
    bool encloses(Complex q) const;
};

Matrix talbot_invert(const MatrixTransform& f, double t, int nodes, int scale_nodes);
Matrix talbot_invert(const MatrixTransform& f, double t, int nodes);

struct DeHoogOptions {
    int terms = 20;            // M; the series uses 2M + 1 samples
    double tolerance = 1e-12;  // sets the abscissa of the Bromwich line
    double period_factor = 2.0;
};

struct DeHoogResult {
    Matrix value;
    // Entry-wise change between the last two continued-fraction
    // approximants.
    double error_estimate = 0.0;
};

// de Hoog, Knight and Stokes: Fourier series on a vertical line accelerated
// by a continued fraction built with the quotient-difference algorithm.
// Entries whose QD table breaks down are truncated at the last finite depth.
DeHoogResult dehoog_invert(const MatrixTransform& f, double t, const DeHoogOptions& options = {});

}  // namespace pmme::laplace
