#include "pmme/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "parallel.hpp"
#include "pmme/errors.hpp"
#include "pmme/laplace.hpp"
#include "pmme/log.hpp"

namespace pmme::solver {

namespace {

constexpr double kStateTolerance = 1e-8;
constexpr double kDetTolerance = 1e-12;
constexpr double kTraceDriftTolerance = 1e-6;
constexpr double kStepFactor = 1e-2;
constexpr double kGridTolerance = 1e-9;

std::string fmt_time(double t) {
    std::ostringstream os;
    os.precision(10);
    os << t;
    return os.str();
}

Matrix diag_exp(const std::vector<Complex>& lam, double t) {
    const auto n = static_cast<Eigen::Index>(lam.size());
    Matrix w = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) w(i, i) = std::exp(lam[static_cast<std::size_t>(i)] * t);
    return w;
}

void validate_grid(const std::vector<double>& times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) {
            throw ValidationError("time grid entries must be finite and non-negative");
        }
        if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("time grid must be strictly increasing");
    }
}

// Points where Ω(s)⁻¹ is expected to be singular or nearly so; the Talbot
// contour must wrap them.
std::vector<Complex> singularity_proxies(const PMMEProblem& p) {
    std::vector<Complex> out = p.spectral().eigenvalues;
    const double a = p.kernel().convergence_abscissa();
    if (std::isfinite(a)) {
        for (const auto& l : p.spectral().eigenvalues) out.push_back(l + a);
    }
    return out;
}

Matrix invert_talbot(const PMMEProblem& p, double t, const SolverOptions& opt, double& err) {
    const laplace::TalbotContour contour{t, opt.nodes, opt.nodes};
    for (const auto& q : singularity_proxies(p)) {
        if (!contour.encloses(q)) {
            throw NumericalError("Talbot contour at t = " + fmt_time(t) + " does not enclose the singularity near " +
                                 fmt_time(q.real()) + (q.imag() < 0 ? " - " : " + ") + fmt_time(std::abs(q.imag())) +
                                 "i; increase nodes or switch the inversion method to dehoog");
        }
    }
    auto f = [&p](Complex s) { return omega_inverse(p, s); };
    Matrix w = laplace::talbot_invert(f, t, opt.nodes, opt.nodes);
    err = 0.0;
    if (opt.check_doubling) {
        const Matrix w2 = laplace::talbot_invert(f, t, 2 * opt.nodes, opt.nodes);
        err = (w - w2).cwiseAbs().maxCoeff();
        if (!(err <= opt.doubling_tolerance)) {
            throw NumericalError("Talbot inversion at t = " + fmt_time(t) + " changes by " + fmt_time(err) +
                                 " under node doubling (tolerance " + fmt_time(opt.doubling_tolerance) +
                                 "); switch to the de Hoog method (solver.method \"dehoog\")");
        }
    }
    return w;
}

Matrix invert_dehoog(const PMMEProblem& p, double t, const SolverOptions& opt, double& err) {
    laplace::DeHoogOptions dh;
    dh.terms = opt.dehoog_terms;
    dh.tolerance = opt.dehoog_tolerance;
    auto f = [&p](Complex s) { return omega_inverse(p, s); };
    const auto r = laplace::dehoog_invert(f, t, dh);
    err = r.error_estimate;
    if (!(err <= opt.dehoog_error_tolerance)) {
        throw NumericalError("de Hoog inversion at t = " + fmt_time(t) + " has error estimate " + fmt_time(err) +
                             " (tolerance " + fmt_time(opt.dehoog_error_tolerance) + ")");
    }
    return r.value;
}

double grid_spacing(const PropagatorW& w) {
    if (w.times.size() < 2 || w.times.front() != 0.0) {
        throw ValidationError("the time-local generator needs a uniform grid starting at t = 0");
    }
    const double h = w.times[1] - w.times[0];
    for (std::size_t i = 1; i < w.times.size(); ++i) {
        if (std::abs(w.times[i] - static_cast<double>(i) * h) > kGridTolerance * std::max(1.0, w.times[i])) {
            throw ValidationError("the time-local generator needs a uniform grid");
        }
    }
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem

PMMEProblem::PMMEProblem(Superoperator l, Superoperator e, SpectralDecomposition sd, MemoryKernel k, Matrix em)
    : generator_(std::move(l)),
      measurement_(std::move(e)),
      spectral_(std::move(sd)),
      kernel_(std::move(k)),
      e_matrix_(std::move(em)) {}

PMMEProblem PMMEProblem::create(const Superoperator& generator, const Superoperator& measurement_map,
                                MemoryKernel kernel) {
    if (generator.hilbert_dim() != measurement_map.hilbert_dim()) {
        throw ValidationError("generator and measurement map act on different dimensions");
    }
    const double tp = measurement_map.trace_preservation_error();
    if (tp > kChannelTolerance) {
        throw ValidationError("measurement map is not trace preserving (deviation " + fmt_time(tp) + ")");
    }
    const Matrix c = qcore::choi_of(measurement_map).matrix();
    if (qcore::hermiticity_error(c) > kChannelTolerance) {
        throw ValidationError("measurement map is not Hermiticity preserving");
    }
    const double min_eig = qcore::min_eigenvalue_hermitian(c);
    if (min_eig < -kChannelTolerance) {
        throw ValidationError("measurement map is not completely positive (Choi eigenvalue " + fmt_time(min_eig) + ")");
    }
    auto sd = lindblad::spectral_decompose(generator);
    Matrix em = sd.left_matrix * measurement_map.matrix() * sd.right_matrix;
    return PMMEProblem(generator, measurement_map, std::move(sd), std::move(kernel), std::move(em));
}

Matrix PMMEProblem::semigroup(double t) const {
    return spectral_.right_matrix * diag_exp(spectral_.eigenvalues, t) * spectral_.left_matrix;
}

// ---------------------------------------------------------------------------
// Laplace domain

Matrix build_omega(const PMMEProblem& problem, Complex s) {
    const auto& lam = problem.spectral().eigenvalues;
    const Matrix& em = problem.e_matrix();
    const int n = problem.size();
    Matrix omega(n, n);
    for (int j = 0; j < n; ++j) {
        const Complex kj = problem.kernel().laplace_shifted(s, lam[static_cast<std::size_t>(j)]);
        for (int i = 0; i < n; ++i) {
            omega(j, i) = (i == j ? s : Complex(0.0)) - lam[static_cast<std::size_t>(i)] * em(j, i) * kj;
        }
    }
    return omega;
}

Matrix omega_inverse(const PMMEProblem& problem, Complex s) {
    const auto& lam = problem.spectral().eigenvalues;
    const Matrix& em = problem.e_matrix();
    const int n = problem.size();
    Matrix omega(n, n);
    Vector row_scale(n);
    const double log_s = std::log(std::abs(s));
    for (int j = 0; j < n; ++j) {
        const auto k = problem.kernel().transform_scaled(s - lam[static_cast<std::size_t>(j)]);
        double coupling = 0.0;
        for (int i = 0; i < n; ++i) coupling = std::max(coupling, std::abs(lam[static_cast<std::size_t>(i)] * em(j, i)));
        // Rows whose kernel term dwarfs s are scaled down so that the LU
        // factorization sees entries of comparable size.
        double log_row = 0.0;
        const double mag = std::abs(k.mantissa);
        if (coupling > 0.0 && mag > 0.0) {
            log_row = -std::max(0.0, k.log_scale + std::log(mag * coupling) - log_s);
        }
        const Complex kj = mag > 0.0 ? k.mantissa * std::exp(k.log_scale + log_row) : Complex(0.0);
        const double sc = std::exp(log_row);
        row_scale(j) = sc;
        for (int i = 0; i < n; ++i) {
            omega(j, i) = (i == j ? sc * s : Complex(0.0)) - lam[static_cast<std::size_t>(i)] * em(j, i) * kj;
        }
    }
    Matrix inv = omega.fullPivLu().solve(Matrix(row_scale.asDiagonal()));
    if (!inv.allFinite()) {
        throw NumericalError("Omega(s) is singular at s = " + fmt_time(s.real()) + " + " + fmt_time(s.imag()) + "i");
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Propagator

std::size_t PropagatorW::index_of(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t - kGridTolerance * std::max(1.0, std::abs(t)));
    if (it == times.end() || std::abs(*it - t) > kGridTolerance * std::max(1.0, std::abs(t))) {
        throw ValidationError("time " + fmt_time(t) + " is not on the propagator grid; re-solve on a grid containing it");
    }
    return static_cast<std::size_t>(it - times.begin());
}

std::vector<double> uniform_grid(double t_max, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("grid spacing must be positive");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ValidationError("grid end must be non-negative");
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * dt;
    return g;
}

PropagatorW solve_W(const PMMEProblem& problem, const std::vector<double>& times, const SolverOptions& options) {
    validate_grid(times);
    if (options.nodes < 4) throw ValidationError("Talbot inversion needs at least 4 nodes");
    PropagatorW out;
    out.times = times;
    out.matrices.resize(times.size());
    const int n = problem.size();

    if (problem.kernel().is_delta()) {
        for (std::size_t k = 0; k < times.size(); ++k) out.matrices[k] = diag_exp(problem.spectral().eigenvalues, times[k]);
        return out;
    }

    std::vector<double> errors(times.size(), 0.0);
    detail::parallel_for(times.size(), options.threads, [&](std::size_t k) {
        const double t = times[k];
        if (t == 0.0) {
            out.matrices[k] = Matrix::Identity(n, n);
            return;
        }
        out.matrices[k] = options.method == InversionMethod::Talbot ? invert_talbot(problem, t, options, errors[k])
                                                                    : invert_dehoog(problem, t, options, errors[k]);
    });
    out.max_error_estimate = *std::max_element(errors.begin(), errors.end());
    log::debug("solve_W: " + std::to_string(times.size()) + " grid points, max error estimate " +
               fmt_time(out.max_error_estimate));
    return out;
}

Matrix propagate(const PMMEProblem& problem, const PropagatorW& w, const DensityMatrix& rho0, double t) {
    if (rho0.dim() != problem.hilbert_dim()) throw ValidationError("initial state dimension mismatch");
    const Matrix& wt = w.at(t);
    const auto& sd = problem.spectral();
    const Matrix rho = qcore::unvec(sd.right_matrix * (wt * (sd.left_matrix * qcore::vec(rho0.matrix()))),
                                    problem.hilbert_dim());
    const double herm = qcore::hermiticity_error(rho);
    if (herm > kStateTolerance) {
        throw NumericalError("propagated state at t = " + fmt_time(t) + " deviates from Hermiticity by " + fmt_time(herm));
    }
    const double trace_err = std::abs(rho.trace() - 1.0);
    if (trace_err > kStateTolerance) {
        throw NumericalError("propagated state at t = " + fmt_time(t) + " has trace error " + fmt_time(trace_err));
    }
    if (herm > 0.0) log::debug("propagate: symmetrized Hermiticity deviation " + fmt_time(herm) + " at t = " + fmt_time(t));
    return 0.5 * (rho + rho.adjoint());
}

// ---------------------------------------------------------------------------
// Direct integrator

const Matrix& DirectTrajectory::at(double t) const {
    const double x = t / dt;
    const auto k = static_cast<long long>(std::llround(x));
    if (k < 0 || static_cast<std::size_t>(k) >= states.size() ||
        std::abs(static_cast<double>(k) * dt - t) > kGridTolerance * std::max(1.0, std::abs(t))) {
        throw ValidationError("time " + fmt_time(t) + " is not on the integrator grid");
    }
    return states[static_cast<std::size_t>(k)];
}

DirectTrajectory integrate_pmme_direct(const PMMEProblem& problem, const DensityMatrix& rho0, double t_max, double dt) {
    if (rho0.dim() != problem.hilbert_dim()) throw ValidationError("initial state dimension mismatch");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step size must be positive");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ValidationError("t_max must be non-negative");
    double lam_max = 0.0;
    for (const auto& l : problem.spectral().eigenvalues) lam_max = std::max(lam_max, std::abs(l));
    if (lam_max > 0.0 && dt > kStepFactor / lam_max) {
        throw ValidationError("step size " + fmt_time(dt) + " exceeds 1e-2 / max|lambda| = " + fmt_time(kStepFactor / lam_max));
    }

    const int d = problem.hilbert_dim();
    const Eigen::Index n2 = static_cast<Eigen::Index>(d) * d;
    const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
    const Matrix& l = problem.generator().matrix();
    const Matrix id = Matrix::Identity(n2, n2);

    DirectTrajectory out;
    out.dt = dt;
    out.times.resize(steps + 1);
    out.states.resize(steps + 1);
    std::vector<Vector> r(steps + 1);
    r[0] = qcore::vec(rho0.matrix());

    if (problem.kernel().is_delta()) {
        const Matrix step = (id - 0.5 * dt * l).partialPivLu().solve(id + 0.5 * dt * l);
        for (std::size_t m = 0; m < steps; ++m) r[m + 1] = step * r[m];
    } else {
        // K_j = k(j dt) e^{ℒ j dt} ℰ ℒ, with the semigroup built from a
        // matrix exponential rather than the damping basis.
        const Matrix el = problem.measurement_map().matrix() * l;
        const Matrix p = (l * dt).exp();
        std::vector<Matrix> kj(steps + 1);
        Matrix power = id;
        for (std::size_t j = 0; j <= steps; ++j) {
            kj[j] = problem.kernel().evaluate(static_cast<double>(j) * dt) * (power * el);
            power = power * p;
        }
        const auto lhs = (id - 0.25 * dt * dt * kj[0]).partialPivLu();
        Vector f_prev = Vector::Zero(n2);  // ∫₀^{t_m} K ρ at t_m
        for (std::size_t m = 0; m < steps; ++m) {
            // Trapezoid for ∫₀^{t_{m+1}} K(t′) ρ(t_{m+1} − t′) dt′ without the
            // unknown j = 0 term.
            Vector partial = 0.5 * (kj[m + 1] * r[0]);
            for (std::size_t j = 1; j <= m; ++j) partial += kj[j] * r[m + 1 - j];
            partial *= dt;
            r[m + 1] = lhs.solve(r[m] + 0.5 * dt * (f_prev + partial));
            f_prev = partial + 0.5 * dt * (kj[0] * r[m + 1]);
        }
    }

    for (std::size_t m = 0; m <= steps; ++m) {
        out.times[m] = static_cast<double>(m) * dt;
        out.states[m] = qcore::unvec(r[m], d);
        out.max_trace_drift = std::max(out.max_trace_drift, std::abs(out.states[m].trace() - 1.0));
    }
    if (out.max_trace_drift > kTraceDriftTolerance) {
        throw NumericalError("direct integrator trace drift " + fmt_time(out.max_trace_drift) + " exceeds 1e-6; reduce dt");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Maps

Superoperator dynamical_map(const PMMEProblem& problem, const PropagatorW& w, double t) {
    const auto& sd = problem.spectral();
    return Superoperator(sd.right_matrix * w.at(t) * sd.left_matrix);
}

Superoperator inverse_map(const PMMEProblem& problem, const PropagatorW& w, double t) {
    const Matrix& wt = w.at(t);
    const Complex det = wt.determinant();
    if (!(std::abs(det) > kDetTolerance)) {
        throw NumericalError("dynamical map is not invertible at t = " + fmt_time(t) + " (|det W| = " +
                             fmt_time(std::abs(det)) + ")");
    }
    const auto& sd = problem.spectral();
    return Superoperator(sd.right_matrix * wt.partialPivLu().inverse() * sd.left_matrix);
}

Superoperator nz_kernel(const PMMEProblem& problem, double t_prime) {
    if (!(t_prime >= 0.0) || !std::isfinite(t_prime)) throw ValidationError("kernel time must be non-negative");
    const int d = problem.hilbert_dim();
    if (problem.kernel().is_delta()) {
        return t_prime == 0.0 ? problem.generator() : Superoperator::zero(d);
    }
    const double k = problem.kernel().evaluate(t_prime);
    return Superoperator(k * problem.semigroup(t_prime) * problem.measurement_map().matrix() *
                         problem.generator().matrix());
}

Superoperator tcl_generator(const PMMEProblem& problem, const PropagatorW& w, double t) {
    if (problem.kernel().is_delta()) return problem.generator();
    const double h = grid_spacing(w);
    const std::size_t n = w.index_of(t);
    if (n == 0) return Superoperator::zero(problem.hilbert_dim());
    const auto& sd = problem.spectral();
    for (std::size_t i = 0; i <= n; ++i) {
        if (!(std::abs(w.matrices[i].determinant()) > kDetTolerance)) {
            throw NumericalError("dynamical map is singular at t = " + fmt_time(w.times[i]) +
                                 " inside the time-local generator window");
        }
    }
    const Matrix el = problem.measurement_map().matrix() * problem.generator().matrix();
    const Eigen::Index n2 = el.rows();
    Matrix integral = Matrix::Zero(n2, n2);
    for (std::size_t j = 0; j <= n; ++j) {
        const double weight = (j == 0 || j == n) ? 0.5 : 1.0;
        const double tj = w.times[j];
        const Matrix phi = sd.right_matrix * w.matrices[n - j] * sd.left_matrix;
        integral += (weight * problem.kernel().evaluate(tj)) * problem.semigroup(tj) * el * phi;
    }
    integral *= h;
    return Superoperator(integral * inverse_map(problem, w, t).matrix());
}

// ---------------------------------------------------------------------------
// Complete positivity

Matrix choi_from_w(const PMMEProblem& problem, const Matrix& w) {
    const auto& sd = problem.spectral();
    const int n = problem.size();
    const int d = problem.hilbert_dim();
    Matrix c = Matrix::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (w(i, j) == Complex(0.0)) continue;
            c += w(i, j) * qcore::tensor_product(sd.left_ops[static_cast<std::size_t>(j)].transpose(),
                                                 sd.right_ops[static_cast<std::size_t>(i)]);
        }
    }
    return c;
}

CpScan cp_scan(const PMMEProblem& problem, const PropagatorW& w, unsigned threads) {
    CpScan scan;
    scan.points.resize(w.times.size());
    detail::parallel_for(w.times.size(), threads, [&](std::size_t k) {
        const double t = w.times[k];
        const Matrix c = choi_from_w(problem, w.matrices[k]);
        const Matrix reference = qcore::choi_of(dynamical_map(problem, w, t)).matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
        scan.points[k] = {t, es.eigenvalues().minCoeff(), (c - reference).cwiseAbs().maxCoeff()};
    });
    for (const auto& p : scan.points) {
        scan.completely_positive = scan.completely_positive && p.min_eigenvalue >= CpScan::kCpTolerance;
        scan.max_mismatch = std::max(scan.max_mismatch, p.construction_mismatch);
    }
    scan.constructions_agree = scan.max_mismatch <= CpScan::kMismatchTolerance;
    return scan;
}

}  // namespace pmme::solver
