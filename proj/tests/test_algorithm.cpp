#include <doctest.h>

#include <cmath>

#include "pmm/algorithm.hpp"
#include "pmm/instances.hpp"

using namespace pmm;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

// n=1 program with constant-valued oracles, for arithmetic-level checks.
StochasticProgram constant_program(double f_val, double g_val) {
    StochasticProgram prog;
    prog.n = 1;
    prog.p = 1;
    prog.sample = [](const SampleStream&, long) { return Vector::Zero(1); };
    prog.eval_F = [f_val](const Vector&, const Sample&) { return f_val; };
    prog.eval_G = [g_val](const Vector&, const Sample&) { return vec1(g_val); };
    prog.subgrad_F = [](const Vector&, const Sample&) { return Vector::Zero(1); };
    prog.subgrad_G = [](const Vector&, const Sample&) { return Matrix::Zero(1, 1); };
    prog.project_X0 = [](const Vector& y) { return y; };
    return prog;
}

// n=1, p=0 smooth program: F = x^2/2 on X0 = [-1, 1].
StochasticProgram quadratic_p0() {
    StochasticProgram prog;
    prog.n = 1;
    prog.p = 0;
    prog.sample = [](const SampleStream&, long) { return Vector::Zero(1); };
    prog.eval_F = [](const Vector& x, const Sample&) { return 0.5 * x[0] * x[0]; };
    prog.subgrad_F = [](const Vector& x, const Sample&) { return x; };
    prog.project_X0 = [](const Vector& y) {
        return project_box(y, vec1(-1.0), vec1(1.0));
    };
    return prog;
}

// n=1: F = 0, G(x) = x, X0 = [-10, 10].
StochasticProgram hinge_program() {
    StochasticProgram prog;
    prog.n = 1;
    prog.p = 1;
    prog.sample = [](const SampleStream&, long) { return Vector::Zero(1); };
    prog.eval_F = [](const Vector&, const Sample&) { return 0.0; };
    prog.subgrad_F = [](const Vector&, const Sample&) { return Vector::Zero(1); };
    prog.eval_G = [](const Vector& x, const Sample&) { return x; };
    prog.subgrad_G = [](const Vector&, const Sample&) { return Matrix::Ones(1, 1); };
    prog.project_X0 = [](const Vector& y) {
        return project_box(y, vec1(-10.0), vec1(10.0));
    };
    return prog;
}

}  // namespace

TEST_CASE("parse_param_rule round trips and rejects unknowns") {
    for (ParamRule r : {ParamRule::Explicit, ParamRule::InvSqrtT, ParamRule::SqrtT}) {
        CHECK(parse_param_rule(to_string(r)) == r);
    }
    CHECK_THROWS_AS(parse_param_rule("linear"), std::invalid_argument);
}

TEST_CASE("resolve_params applies the T^{+-1/2} rules") {
    AlgoConfig config;
    config.T = 100;
    const ResolvedParams r = resolve_params(config);
    CHECK(r.sigma == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(r.alpha == doctest::Approx(10.0).epsilon(1e-15));

    config.sigma_rule = config.alpha_rule = ParamRule::Explicit;
    config.sigma = 0.3;
    config.alpha = 7.0;
    const ResolvedParams e = resolve_params(config);
    CHECK(e.sigma == 0.3);
    CHECK(e.alpha == 7.0);

    config.T = 0;
    CHECK_THROWS_AS(resolve_params(config), std::invalid_argument);
}

TEST_CASE("aug_lagrangian worked values") {
    // inactive constraint: hinge vanishes
    CHECK(aug_lagrangian(constant_program(2.0, -1.0), vec1(0.0), vec1(0.0),
                         Vector::Zero(1), 0.5) == doctest::Approx(2.0));
    // one-component arithmetic: (1.5^2 - 1) / (2 * 0.5)
    CHECK(aug_lagrangian(constant_program(0.0, 1.0), vec1(0.0), vec1(1.0),
                         Vector::Zero(1), 0.5) == doctest::Approx(1.25));
    // p = 0 reduces to F
    CHECK(aug_lagrangian(quadratic_p0(), vec1(0.6), Vector(0), Vector::Zero(1),
                         1.0) == doctest::Approx(0.18));
    CHECK_THROWS_AS(aug_lagrangian(constant_program(0.0, 0.0), vec1(0.0),
                                   vec1(0.0), Vector::Zero(1), 0.0),
                    std::invalid_argument);
}

TEST_CASE("aug_lagrangian_subgrad chain rule") {
    const Instance inst = make_scalar_toy(0.0);
    const Sample xi = Vector::Zero(1);
    // lambda = 0, G(x) < 0: hinge inactive, subgradient is v0
    const Vector at_feasible =
        aug_lagrangian_subgrad(inst.program, vec1(0.5), vec1(0.0), xi, 1.0);
    CHECK(at_feasible == inst.program.subgrad_F(vec1(0.5), xi));
    // scalar chain rule: 0 + 1 * [0.5]_+ = 0.5
    const Vector hinge =
        aug_lagrangian_subgrad(hinge_program(), vec1(0.5), vec1(0.0), xi, 1.0);
    CHECK(hinge[0] == doctest::Approx(0.5));
}

TEST_CASE("aug_lagrangian_subgrad matches finite differences on affine_qp") {
    const Instance inst = make_affine_qp(2, 1, 3, 0.25);
    const StochasticProgram& prog = inst.program;
    SampleStream s(17, 0);
    const double h = 1e-5;
    for (long t = 0; t < 50; ++t) {
        const Vector center =
            0.5 * (inst.descriptor.box_lo + inst.descriptor.box_hi);
        const Vector x = center + 0.5 * (prog.sample_X0(s, t) - center);
        const Sample xi = prog.sample(s, t);
        Vector lambda(1);
        lambda[0] = s.uniform(t, 50);
        const double sigma = 0.5;
        // keep away from the hinge kink
        if (std::abs(lambda[0] + sigma * prog.eval_G(x, xi)[0]) < 1e-3) continue;
        const Vector d = aug_lagrangian_subgrad(prog, x, lambda, xi, sigma);
        for (int j = 0; j < prog.n; ++j) {
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double fd = (aug_lagrangian(prog, xp, lambda, xi, sigma) -
                               aug_lagrangian(prog, xm, lambda, xi, sigma)) /
                              (2 * h);
            CHECK(std::abs(fd - d[j]) <= 1e-6);
        }
    }
}

TEST_CASE("solve_subproblem closed-form quadratic") {
    const SubproblemResult r =
        solve_subproblem(quadratic_p0(), vec1(1.0), Vector(0), Vector::Zero(1),
                         1.0, 1.0, 1e-10, 10000);
    CHECK(r.converged());
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("solve_subproblem piecewise objective") {
    // minimize 0.5 [x]_+^2 + 0.5 (x-1)^2, stationary at x = 0.5
    const SubproblemResult r =
        solve_subproblem(hinge_program(), vec1(1.0), vec1(0.0), Vector::Zero(1),
                         1.0, 1.0, 1e-10, 10000);
    CHECK(r.converged());
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("solve_subproblem with a dominant proximal term stays put") {
    const Instance inst = make_scalar_toy(0.0);
    const SubproblemResult r =
        solve_subproblem(inst.program, vec1(0.3), vec1(0.0), Vector::Zero(1),
                         0.1, 1e6, 1e-12, 10000);
    CHECK(std::abs(r.x[0] - 0.3) <= 10.0 * inst.program.constants.kappa_f / 1e6);
    CHECK_THROWS_AS(solve_subproblem(inst.program, vec1(0.3), vec1(0.0),
                                     Vector::Zero(1), 0.1, 0.0, 1e-8, 100),
                    std::invalid_argument);
}

TEST_CASE("update_multiplier arithmetic and nonexpansiveness") {
    Vector lambda(2), g(2);
    lambda << 0.5, 0.0;
    g << 1.0, -3.0;
    const Vector next = update_multiplier(lambda, g, 0.1);
    CHECK(next[0] == doctest::Approx(0.6));
    CHECK(next[1] == 0.0);

    CHECK(update_multiplier(Vector::Zero(2), -g.cwiseAbs(), 0.5) ==
          Vector::Zero(2));
    CHECK_THROWS_AS(update_multiplier(lambda, g, 0.0), std::invalid_argument);

    SampleStream s(5, 0);
    for (long t = 0; t < 1000; ++t) {
        Vector l(3), gv(3);
        for (int k = 0; k < 3; ++k) {
            l[k] = s.uniform(t, k);
            gv[k] = s.uniform_symmetric(t, 3 + k, 2.0);
        }
        const double sigma = 0.01 + s.uniform(t, 6);
        CHECK((update_multiplier(l, gv, sigma) - l).norm() <=
              sigma * gv.norm() + 1e-15);
    }
}

TEST_CASE("step_bound worked value and limits") {
    ConstantsBundle c;
    c.D0 = 2.0;
    c.nu_f = 1.0;
    c.nu_g = 1.0;
    c.kappa_f = 1.0;
    c.kappa_g = 1.0;
    c.eps0 = 0.5;
    CHECK(step_bound(c, 1, 0.1, 10.0, 0.0) ==
          doctest::Approx(2.1 / 19.9).epsilon(1e-12));
    // affine increasing in the multiplier norm
    const double slope = step_bound(c, 1, 0.1, 10.0, 1.0) -
                         step_bound(c, 1, 0.1, 10.0, 0.0);
    CHECK(slope > 0);
    CHECK(step_bound(c, 1, 0.1, 10.0, 2.0) ==
          doctest::Approx(step_bound(c, 1, 0.1, 10.0, 0.0) + 2.0 * slope));
    // p = 0 reduction
    CHECK(step_bound(c, 0, 0.1, 10.0, 0.0) == doctest::Approx(0.1));
    // violated precondition
    CHECK_THROWS_AS(step_bound(c, 1, 20.0, 10.0, 0.0), std::invalid_argument);
}

TEST_CASE("run_pmmsopt single noise-free step hits the stationary point") {
    const Instance inst = make_scalar_toy(0.0);
    AlgoConfig config;
    config.T = 1;
    config.sigma = 0.1;
    config.alpha = 100.0;
    config.sigma_rule = config.alpha_rule = ParamRule::Explicit;
    config.inner_tol = 1e-10;
    config.x0 = vec1(0.5);

    Vector x1, lambda1;
    const RunTrace trace = run_pmmsopt(
        inst.program, config, 0, [&](const IterObservation& obs) {
            x1 = obs.x_next;
            lambda1 = obs.lambda_next;
        });
    CHECK(std::abs(x1[0] - 0.49) <= 1e-6);
    CHECK(lambda1[0] == 0.0);
    CHECK(trace.steps.size() == 1);
    CHECK(trace.final_lambda.norm() <=
          trace.sigma * inst.program.constants.nu_g);
}

TEST_CASE("run_pmmsopt noise-free averaged iterate approaches the optimum") {
    const Instance inst = make_scalar_toy(0.0);
    AlgoConfig config;
    config.T = 10000;
    config.sigma = 0.01;
    config.alpha = 100.0;
    config.sigma_rule = config.alpha_rule = ParamRule::Explicit;
    config.x0 = vec1(0.5);
    const RunTrace trace = run_pmmsopt(inst.program, config);
    CHECK(std::abs(trace.x_avg[0]) <= 0.05);
}

TEST_CASE("run_pmmsopt is deterministic") {
    const Instance inst = make_scalar_toy(0.25);
    AlgoConfig config;
    config.T = 200;
    config.seed = 9;
    config.comparator = inst.descriptor.x_star;
    const RunTrace a = run_pmmsopt(inst.program, config, 4);
    const RunTrace b = run_pmmsopt(inst.program, config, 4);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        CHECK(a.steps[t].f_sample == b.steps[t].f_sample);
        CHECK(a.steps[t].g_sample == b.steps[t].g_sample);
        CHECK(a.steps[t].f_comparator == b.steps[t].f_comparator);
        CHECK(a.steps[t].lambda_norm == b.steps[t].lambda_norm);
        CHECK(a.steps[t].step_norm == b.steps[t].step_norm);
    }
    CHECK(a.x_avg == b.x_avg);
    CHECK(a.final_lambda == b.final_lambda);
}

TEST_CASE("run_pmmsopt multiplier drift inequalities hold along a run") {
    const Instance inst = make_scalar_toy(0.25);
    const ConstantsBundle& c = inst.program.constants;
    AlgoConfig config;
    config.T = 300;
    config.seed = 2;
    const ResolvedParams params = resolve_params(config);
    run_pmmsopt(inst.program, config, 0, [&](const IterObservation& obs) {
        const Vector g_next = inst.program.eval_G(obs.x_next, obs.xi);
        const double prev = obs.lambda_t.norm();
        const double next = obs.lambda_next.norm();
        CHECK(obs.lambda_next.minCoeff() >= 0.0);
        CHECK(std::abs(next - prev) <=
              params.sigma * g_next.norm() + 1e-12);
        CHECK(g_next.norm() <= c.nu_g + 1e-12);
        CHECK(next * next <= prev * prev +
                                 2.0 * params.sigma * obs.lambda_t.dot(g_next) +
                                 params.sigma * params.sigma * c.nu_g * c.nu_g +
                                 1e-12);
    });
}

TEST_CASE("run_pmmsopt rejects a sigma/alpha pair breaking the step bound") {
    const Instance inst = make_scalar_toy(0.25);
    AlgoConfig config;
    config.T = 10;
    config.sigma_rule = config.alpha_rule = ParamRule::Explicit;
    config.sigma = 10.0;
    config.alpha = 1.0;
    CHECK_THROWS_AS(run_pmmsopt(inst.program, config), std::invalid_argument);
}
