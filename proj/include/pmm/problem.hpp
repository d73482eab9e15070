#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "pmm/rng.hpp"

namespace pmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One noise realization; interpretation is instance-specific.
using Sample = Eigen::VectorXd;

// Constants backing the problem assumptions: diameter of the simple set,
// oscillation/norm bounds on the sampled objective and constraints,
// subgradient bounds, and a strictly feasible (Slater) point with margin.
struct ConstantsBundle {
    double D0 = 0.0;       // diameter bound of X0
    double nu_f = 0.0;     // oscillation bound of F over X0 x samples
    double nu_g = 0.0;     // bound on ||G(x, xi)||
    double kappa_f = 0.0;  // bound on ||subgrad F||
    double kappa_g = 0.0;  // bound on each constraint subgradient column norm
    double eps0 = 0.0;     // Slater margin
    Vector slater_point;   // x_hat with true_g_i(x_hat) <= -eps0
};

// Throws std::invalid_argument if any scalar field is not strictly positive.
void validate_bundle(const ConstantsBundle& c);

// Convex stochastic program with expectation constraints
//   min E[F(x, xi)]  s.t.  E[G_i(x, xi)] <= 0,  x in X0.
// Oracles are pure functions of (x, xi); instances are immutable after
// construction and safe to share across runs.
struct StochasticProgram {
    int n = 0;  // decision dimension
    int p = 0;  // number of expectation constraints

    // Draws realization xi_t from the stream at step t.
    std::function<Sample(const SampleStream&, long)> sample;
    // Uniform sampler over X0 (used by spot-check validation).
    std::function<Vector(const SampleStream&, long)> sample_X0;

    std::function<double(const Vector&, const Sample&)> eval_F;
    std::function<Vector(const Vector&, const Sample&)> eval_G;     // length p
    std::function<Vector(const Vector&, const Sample&)> subgrad_F;  // length n
    std::function<Matrix(const Vector&, const Sample&)> subgrad_G;  // n x p, columnwise
    std::function<Vector(const Vector&)> project_X0;

    ConstantsBundle constants;

    // Closed-form expectations, present for synthetic instances.
    std::function<double(const Vector&)> true_f;
    std::function<Vector(const Vector&)> true_g;
};

// Componentwise clamp onto the nonnegative orthant.
Vector project_nonneg(const Vector& v);

// Euclidean projection onto the box [lo, hi]; throws if lo_i > hi_i.
Vector project_box(const Vector& y, const Vector& lo, const Vector& hi);

// Euclidean projection onto the closed ball B(center, radius); radius > 0.
Vector project_ball(const Vector& y, const Vector& center, double radius);

// Monte Carlo spot check of the assumption constants over X0.
struct ValidationReport {
    long n_samples = 0;
    double max_G_norm = 0.0;
    double max_F_subgrad_norm = 0.0;
    double max_G_subgrad_col_norm = 0.0;
    Vector slater_g_mean;    // empirical g_i(x_hat)
    Vector slater_g_stderr;  // standard error of the mean, per constraint
    bool nu_g_violated = false;
    bool kappa_f_violated = false;
    bool kappa_g_violated = false;
    bool slater_violated = false;

    bool ok() const {
        return !nu_g_violated && !kappa_f_violated && !kappa_g_violated &&
               !slater_violated;
    }
};

ValidationReport validate_constants(const StochasticProgram& program,
                                    long n_samples, std::uint64_t seed);

// Max over F and all G_i of the sup-norm gap between central finite
// differences and the reported subgradients at (x, xi). Meaningful only
// where the instance is differentiable; tiny h hits cancellation and is
// caller misuse, not an error.
double finite_diff_check(const StochasticProgram& program, const Vector& x,
                         const Sample& xi, double h);

std::string format_validation_report(const ValidationReport& report,
                                     const ConstantsBundle& constants);

}  // namespace pmm
