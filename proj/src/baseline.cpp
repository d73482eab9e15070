#include "pmm/baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace pmm {

RunTrace run_projected_sa(const StochasticProgram& program,
                          const std::function<Vector(const Vector&)>& proj_phi,
                          const BaselineConfig& config,
                          std::uint64_t master_seed,
                          const IterObserver& observer) {
    if (config.T < 1) throw std::invalid_argument("BaselineConfig: T must be >= 1");
    const double gamma =
        config.gamma ? *config.gamma
                     : program.constants.D0 /
                           (program.constants.kappa_f *
                            std::sqrt(static_cast<double>(config.T)));
    if (!(gamma > 0)) {
        throw std::invalid_argument("BaselineConfig: gamma must be > 0");
    }

    SampleStream stream(master_seed, config.seed);
    Vector x = proj_phi(config.x0 ? *config.x0 : Vector::Zero(program.n));
    const Vector lambda = Vector::Zero(program.p);

    RunTrace trace;
    trace.algorithm = "projected_sa";
    trace.T = config.T;
    trace.seed = config.seed;
    trace.run_id = config.seed;
    trace.master_seed = master_seed;
    trace.sigma = 0.0;
    trace.alpha = gamma;  // reuses the slot; the CSV header names it
    trace.has_comparator = config.comparator.has_value();
    trace.steps.reserve(config.T);

    Vector x_sum = Vector::Zero(program.n);
    for (long t = 0; t < config.T; ++t) {
        const Sample xi = program.sample(stream, t);

        StepRecord rec;
        rec.t = t;
        rec.f_sample = program.eval_F(x, xi);
        rec.g_sample = program.p > 0 ? program.eval_G(x, xi) : Vector(0);
        rec.lambda_norm = 0.0;
        if (trace.has_comparator) {
            rec.f_comparator = program.eval_F(*config.comparator, xi);
            rec.g_comparator =
                program.p > 0 ? program.eval_G(*config.comparator, xi) : Vector(0);
        }
        x_sum += x;

        const Vector x_next = proj_phi(x - gamma * program.subgrad_F(x, xi));
        rec.step_norm = (x_next - x).norm();
        rec.inner_iters = 0;
        rec.inner_converged = true;

        if (!std::isfinite(rec.f_sample) || !x_next.allFinite()) {
            throw std::runtime_error(
                "run_projected_sa: oracle returned a non-finite value");
        }
        if (observer) {
            observer(IterObservation{t, xi, x, x_next, lambda, lambda, 0, 0.0});
        }
        trace.steps.push_back(std::move(rec));
        x = x_next;
    }
    trace.x_avg = config.averaging ? Vector(x_sum / static_cast<double>(config.T))
                                   : x;
    trace.final_lambda = Vector::Zero(program.p);
    return trace;
}

}  // namespace pmm
