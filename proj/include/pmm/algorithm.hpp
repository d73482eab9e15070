#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmm/problem.hpp"

namespace pmm {

enum class ParamRule {
    Explicit,     // use the given value
    InvSqrtT,     // T^{-1/2}
    SqrtT,        // T^{1/2}
};

ParamRule parse_param_rule(const std::string& s);
std::string to_string(ParamRule r);

struct AlgoConfig {
    long T = 0;
    double sigma = 1.0;
    double alpha = 1.0;
    ParamRule sigma_rule = ParamRule::InvSqrtT;
    ParamRule alpha_rule = ParamRule::SqrtT;
    double inner_tol = 1e-8;
    int inner_max_iter = 10000;
    std::uint64_t seed = 0;
    std::optional<Vector> x0;          // default: project_X0(0)
    std::optional<Vector> comparator;  // record F/G at this point on the same samples
};

// sigma and alpha after applying the rules for horizon T.
struct ResolvedParams {
    double sigma;
    double alpha;
};
ResolvedParams resolve_params(const AlgoConfig& config);

struct StepRecord {
    long t = 0;
    double f_sample = 0.0;
    Vector g_sample;  // length p
    double f_comparator = 0.0;
    Vector g_comparator;
    double lambda_norm = 0.0;
    double step_norm = 0.0;
    int inner_iters = 0;
    bool inner_converged = true;
};

struct RunTrace {
    std::string algorithm;  // "pmmsopt" or "projected_sa"
    std::string instance;
    long T = 0;
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    std::uint64_t master_seed = 0;
    double sigma = 0.0;
    double alpha = 0.0;
    double inner_tol = 0.0;
    int inner_max_iter = 0;
    bool has_comparator = false;
    std::vector<StepRecord> steps;
    Vector x_avg;         // (1/T) sum of pre-update iterates
    Vector final_lambda;  // lambda^T
};

// Everything visible to a per-iteration observer; used by the invariant and
// acceptance tests, which need quantities the trace does not keep.
struct IterObservation {
    long t;
    const Sample& xi;
    const Vector& x_t;
    const Vector& x_next;
    const Vector& lambda_t;
    const Vector& lambda_next;
    int inner_iters;
    double inner_residual;
};
using IterObserver = std::function<void(const IterObservation&)>;

// Sampled augmented Lagrangian
//   F(x, xi) + (1/(2 sigma)) (||[lambda + sigma G(x, xi)]_+||^2 - ||lambda||^2).
double aug_lagrangian(const StochasticProgram& program, const Vector& x,
                      const Vector& lambda, const Sample& xi, double sigma);

// Subgradient of x -> aug_lagrangian:
//   v0(x, xi) + V(x, xi) [lambda + sigma G(x, xi)]_+.
Vector aug_lagrangian_subgrad(const StochasticProgram& program, const Vector& x,
                              const Vector& lambda, const Sample& xi,
                              double sigma);

struct SubproblemResult {
    Vector x;
    int iters = 0;
    double residual = 0.0;
    bool converged() const { return residual_ok; }
    bool residual_ok = false;
};

// Approximately minimizes
//   phi(x) = aug_lagrangian(x) + (alpha/2) ||x - x_t||^2   over X0,
// stopping when the fixed-point residual ||x - P(x - d(x)/alpha)|| drops
// below inner_tol. Projected gradient steps with backtracking on a
// sufficient-decrease test; a diminishing-step subgradient move is the
// fallback when backtracking bottoms out at a kink. Returns the iterate with
// the best residual seen.
SubproblemResult solve_subproblem(const StochasticProgram& program,
                                  const Vector& x_t, const Vector& lambda_t,
                                  const Sample& xi, double sigma, double alpha,
                                  double inner_tol, int inner_max_iter);

// [lambda + sigma g_val]_+.
Vector update_multiplier(const Vector& lambda, const Vector& g_val, double sigma);

// Upper bound on ||x^{t+1} - x^t|| given the current multiplier norm:
//   (2 kappa_f + sqrt(p) kappa_g ||lambda|| + nu_g sqrt(p) kappa_g sigma)
//     / (2 alpha - p kappa_g^2 sigma).
// Requires 2 alpha - p kappa_g^2 sigma > 0.
double step_bound(const ConstantsBundle& constants, int p, double sigma,
                  double alpha, double lambda_norm);

// Runs the proximal method-of-multipliers iteration for config.T steps.
// Per-step records pair the pre-update iterate x^t with the sample xi_t drawn
// at step t (the regret summands). Deterministic given (program, config).
RunTrace run_pmmsopt(const StochasticProgram& program, const AlgoConfig& config,
                     std::uint64_t master_seed = 0,
                     const IterObserver& observer = nullptr);

}  // namespace pmm
