#include "pmm/algorithm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmm {

ParamRule parse_param_rule(const std::string& s) {
    if (s == "explicit") return ParamRule::Explicit;
    if (s == "T^-1/2") return ParamRule::InvSqrtT;
    if (s == "T^1/2") return ParamRule::SqrtT;
    throw std::invalid_argument("unknown parameter rule: " + s);
}

std::string to_string(ParamRule r) {
    switch (r) {
        case ParamRule::Explicit: return "explicit";
        case ParamRule::InvSqrtT: return "T^-1/2";
        case ParamRule::SqrtT: return "T^1/2";
    }
    return "?";
}

static double apply_rule(ParamRule rule, double value, long T) {
    switch (rule) {
        case ParamRule::Explicit: return value;
        case ParamRule::InvSqrtT: return 1.0 / std::sqrt(static_cast<double>(T));
        case ParamRule::SqrtT: return std::sqrt(static_cast<double>(T));
    }
    return value;
}

ResolvedParams resolve_params(const AlgoConfig& config) {
    if (config.T < 1) throw std::invalid_argument("AlgoConfig: T must be >= 1");
    ResolvedParams r;
    r.sigma = apply_rule(config.sigma_rule, config.sigma, config.T);
    r.alpha = apply_rule(config.alpha_rule, config.alpha, config.T);
    if (!(r.sigma > 0) || !(r.alpha > 0)) {
        throw std::invalid_argument("AlgoConfig: sigma and alpha must be > 0");
    }
    return r;
}

double aug_lagrangian(const StochasticProgram& program, const Vector& x,
                      const Vector& lambda, const Sample& xi, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("aug_lagrangian: sigma must be > 0");
    const double f = program.eval_F(x, xi);
    if (program.p == 0) return f;
    const Vector shifted = project_nonneg(lambda + sigma * program.eval_G(x, xi));
    return f + (shifted.squaredNorm() - lambda.squaredNorm()) / (2.0 * sigma);
}

Vector aug_lagrangian_subgrad(const StochasticProgram& program, const Vector& x,
                              const Vector& lambda, const Sample& xi,
                              double sigma) {
    Vector g = program.subgrad_F(x, xi);
    if (program.p == 0) return g;
    const Vector shifted = project_nonneg(lambda + sigma * program.eval_G(x, xi));
    g += program.subgrad_G(x, xi) * shifted;
    return g;
}

SubproblemResult solve_subproblem(const StochasticProgram& program,
                                  const Vector& x_t, const Vector& lambda_t,
                                  const Sample& xi, double sigma, double alpha,
                                  double inner_tol, int inner_max_iter) {
    if (!(alpha > 0)) throw std::invalid_argument("solve_subproblem: alpha must be > 0");

    auto phi = [&](const Vector& x) {
        return aug_lagrangian(program, x, lambda_t, xi, sigma) +
               0.5 * alpha * (x - x_t).squaredNorm();
    };
    auto grad = [&](const Vector& x) -> Vector {
        return aug_lagrangian_subgrad(program, x, lambda_t, xi, sigma) +
               alpha * (x - x_t);
    };

    Vector x = program.project_X0(x_t);
    double phi_x = phi(x);
    SubproblemResult best;
    best.x = x;
    best.residual = std::numeric_limits<double>::infinity();

    double step = 1.0 / alpha;
    const double step_min = 1e-18 / alpha;
    int k = 0;
    for (; k < inner_max_iter; ++k) {
        const Vector d = grad(x);
        const double residual =
            (x - program.project_X0(x - d / alpha)).norm();
        if (residual < best.residual) {
            best.residual = residual;
            best.x = x;
        }
        if (residual <= inner_tol) break;

        // Backtracking projected-gradient step; the sufficient-decrease test
        // phi(cand) <= phi(x) - ||cand - x||^2 / (2 step) is guaranteed once
        // step <= 1/L on smooth stretches.
        bool moved = false;
        while (step >= step_min) {
            const Vector cand = program.project_X0(x - step * d);
            const double phi_cand = phi(cand);
            if (phi_cand <= phi_x - (cand - x).squaredNorm() / (2.0 * step)) {
                x = cand;
                phi_x = phi_cand;
                step = std::min(step * 2.0, 1e6 / alpha);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // Kink: fall back to a diminishing-step subgradient move.
            x = program.project_X0(x - (2.0 / (alpha * (k + 2))) * d);
            phi_x = phi(x);
            step = 1.0 / alpha;
        }
    }
    best.iters = k;
    best.residual_ok = best.residual <= inner_tol;
    return best;
}

Vector update_multiplier(const Vector& lambda, const Vector& g_val, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("update_multiplier: sigma must be > 0");
    return project_nonneg(lambda + sigma * g_val);
}

double step_bound(const ConstantsBundle& constants, int p, double sigma,
                  double alpha, double lambda_norm) {
    const double denom = 2.0 * alpha - p * constants.kappa_g * constants.kappa_g * sigma;
    if (!(denom > 0)) {
        throw std::invalid_argument("step_bound: requires 2 alpha - p kappa_g^2 sigma > 0");
    }
    const double sp = std::sqrt(static_cast<double>(p));
    return (2.0 * constants.kappa_f + sp * constants.kappa_g * lambda_norm +
            constants.nu_g * sp * constants.kappa_g * sigma) /
           denom;
}

RunTrace run_pmmsopt(const StochasticProgram& program, const AlgoConfig& config,
                     std::uint64_t master_seed, const IterObserver& observer) {
    const ResolvedParams params = resolve_params(config);
    if (program.p >= 1) {
        // Enforced up front: the step bound below needs it.
        const double denom = 2.0 * params.alpha -
                             program.p * program.constants.kappa_g *
                                 program.constants.kappa_g * params.sigma;
        if (!(denom > 0)) {
            throw std::invalid_argument(
                "run_pmmsopt: resolved (sigma, alpha) violate 2 alpha - p kappa_g^2 sigma > 0");
        }
    }

    SampleStream stream(master_seed, config.seed);
    Vector x = config.x0 ? program.project_X0(*config.x0)
                         : program.project_X0(Vector::Zero(program.n));
    Vector lambda = Vector::Zero(program.p);

    RunTrace trace;
    trace.algorithm = "pmmsopt";
    trace.T = config.T;
    trace.seed = config.seed;
    trace.run_id = config.seed;
    trace.master_seed = master_seed;
    trace.sigma = params.sigma;
    trace.alpha = params.alpha;
    trace.inner_tol = config.inner_tol;
    trace.inner_max_iter = config.inner_max_iter;
    trace.has_comparator = config.comparator.has_value();
    trace.steps.reserve(config.T);

    Vector x_sum = Vector::Zero(program.n);
    for (long t = 0; t < config.T; ++t) {
        const Sample xi = program.sample(stream, t);

        StepRecord rec;
        rec.t = t;
        rec.f_sample = program.eval_F(x, xi);
        rec.g_sample = program.p > 0 ? program.eval_G(x, xi) : Vector(0);
        rec.lambda_norm = lambda.norm();
        if (trace.has_comparator) {
            rec.f_comparator = program.eval_F(*config.comparator, xi);
            rec.g_comparator =
                program.p > 0 ? program.eval_G(*config.comparator, xi) : Vector(0);
        }
        x_sum += x;

        const SubproblemResult sub =
            solve_subproblem(program, x, lambda, xi, params.sigma, params.alpha,
                             config.inner_tol, config.inner_max_iter);
        const Vector g_next =
            program.p > 0 ? program.eval_G(sub.x, xi) : Vector(0);
        const Vector lambda_next = update_multiplier(lambda, g_next, params.sigma);

        rec.step_norm = (sub.x - x).norm();
        rec.inner_iters = sub.iters;
        rec.inner_converged = sub.residual_ok;

        if (!std::isfinite(rec.f_sample) || !rec.g_sample.allFinite() ||
            !sub.x.allFinite() || !lambda_next.allFinite()) {
            throw std::runtime_error("run_pmmsopt: oracle returned a non-finite value");
        }
        if (observer) {
            observer(IterObservation{t, xi, x, sub.x, lambda, lambda_next,
                                     sub.iters, sub.residual});
        }
        trace.steps.push_back(std::move(rec));
        x = sub.x;
        lambda = lambda_next;
    }
    trace.x_avg = x_sum / static_cast<double>(config.T);
    trace.final_lambda = lambda;
    return trace;
}

}  // namespace pmm
