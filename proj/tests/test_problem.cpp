#include <doctest.h>

#include <cmath>

#include "pmm/instances.hpp"
#include "pmm/problem.hpp"

using namespace pmm;

namespace {

Vector vec(std::initializer_list<double> vals) {
    Vector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("project_nonneg clamps componentwise") {
    CHECK(project_nonneg(vec({0.6, -0.3})) == vec({0.6, 0.0}));
    CHECK(project_nonneg(vec({0.0, 0.0})) == vec({0.0, 0.0}));
    CHECK(project_nonneg(vec({-1.0, -2.0, 3.0})) == vec({0.0, 0.0, 3.0}));
}

TEST_CASE("project_box clamps and validates") {
    CHECK(project_box(vec({2.0, -3.0}), vec({-1.0, -1.0}), vec({1.0, 1.0})) ==
          vec({1.0, -1.0}));
    CHECK(project_box(vec({0.5}), vec({0.0}), vec({1.0})) == vec({0.5}));
    CHECK(project_box(vec({-0.2, 0.7, 5.0}), vec({0.0, 0.0, 0.0}),
                      vec({1.0, 1.0, 1.0})) == vec({0.0, 0.7, 1.0}));
    CHECK_THROWS_AS(project_box(vec({0.0}), vec({1.0}), vec({0.0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(project_box(vec({0.0}), vec({0.0, 0.0}), vec({1.0, 1.0})),
                    std::invalid_argument);
}

TEST_CASE("project_ball radial scaling") {
    CHECK((project_ball(vec({3.0, 4.0}), vec({0.0, 0.0}), 1.0) - vec({0.6, 0.8}))
              .norm() < 1e-15);
    CHECK(project_ball(vec({0.1, 0.0}), vec({0.0, 0.0}), 1.0) == vec({0.1, 0.0}));
    CHECK((project_ball(vec({2.0, 0.0}), vec({1.0, 0.0}), 0.5) - vec({1.5, 0.0}))
              .norm() < 1e-15);
    CHECK_THROWS_AS(project_ball(vec({1.0}), vec({0.0}), 0.0),
                    std::invalid_argument);
}

TEST_CASE("projections are idempotent and project_nonneg is nonexpansive") {
    SampleStream s(42, 0);
    for (long t = 0; t < 200; ++t) {
        Vector u(3), v(3);
        for (int k = 0; k < 3; ++k) {
            u[k] = s.uniform_symmetric(t, k, 5.0);
            v[k] = s.uniform_symmetric(t, 3 + k, 5.0);
        }
        const Vector pu = project_nonneg(u);
        CHECK(project_nonneg(pu) == pu);
        CHECK((project_nonneg(u) - project_nonneg(v)).norm() <=
              (u - v).norm() + 1e-15);

        const Vector lo = vec({-1.0, -2.0, 0.0});
        const Vector hi = vec({1.0, 0.5, 3.0});
        const Vector pb = project_box(u, lo, hi);
        CHECK(project_box(pb, lo, hi) == pb);

        const Vector pc = project_ball(u, v, 1.5);
        CHECK((project_ball(pc, v, 1.5) - pc).norm() < 1e-12);
    }
}

TEST_CASE("X0 points stay within the diameter bound") {
    const Instance inst = make_affine_qp(3, 2, 11, 0.25);
    const StochasticProgram& prog = inst.program;
    SampleStream s(7, 0);
    for (long t = 0; t < 500; ++t) {
        const Vector a = prog.project_X0(prog.sample_X0(s, t) * 3.0);
        const Vector b = prog.project_X0(-prog.sample_X0(s, t + 1000));
        CHECK((a - b).norm() <= prog.constants.D0 + 1e-12);
    }
}

TEST_CASE("validate_constants: scalar_toy passes, empirical max bounded") {
    const Instance inst = make_scalar_toy(0.5);
    const ValidationReport report = validate_constants(inst.program, 10000, 1);
    CHECK(report.ok());
    CHECK(report.max_G_norm <= 1.6);
    CHECK(report.slater_g_mean[0] == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("validate_constants flags a deliberately bad nu_g") {
    Instance inst = make_scalar_toy(0.25);
    inst.program.constants.nu_g = 0.01;
    const ValidationReport report = validate_constants(inst.program, 10000, 1);
    CHECK(report.nu_g_violated);
    CHECK_FALSE(report.ok());
}

TEST_CASE("validate_constants handles a single sample") {
    const Instance inst = make_scalar_toy(0.25);
    const ValidationReport report = validate_constants(inst.program, 1, 3);
    CHECK(report.n_samples == 1);
    CHECK(report.max_G_norm > 0.0);
    CHECK_THROWS_AS(validate_constants(inst.program, 0, 3), std::invalid_argument);
}

TEST_CASE("finite_diff_check is tiny on the smooth instance") {
    const Instance inst = make_affine_qp(2, 1, 5, 0.25);
    const StochasticProgram& prog = inst.program;
    SampleStream s(9, 0);
    for (long t = 0; t < 100; ++t) {
        // interior point: shrink a sampled point toward the box center
        const Vector center =
            0.5 * (inst.descriptor.box_lo + inst.descriptor.box_hi);
        const Vector x = center + 0.5 * (prog.sample_X0(s, t) - center);
        const Sample xi = prog.sample(s, t);
        CHECK(finite_diff_check(prog, x, xi, 1e-5) <= 1e-5);
    }
}

TEST_CASE("finite_diff_check is exact for a linear objective") {
    const Instance inst = make_scalar_toy(0.0);
    const Sample xi = Vector::Zero(1);
    CHECK(finite_diff_check(inst.program, vec({0.3}), xi, 1e-3) < 1e-10);
    CHECK(finite_diff_check(inst.program, vec({0.3}), xi, 0.1) < 1e-10);
    CHECK_THROWS_AS(finite_diff_check(inst.program, vec({0.3}), xi, 0.0),
                    std::invalid_argument);
}

TEST_CASE("validate_bundle rejects nonpositive constants") {
    ConstantsBundle c{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, Vector::Zero(1)};
    CHECK_NOTHROW(validate_bundle(c));
    c.eps0 = 0.0;
    CHECK_THROWS_AS(validate_bundle(c), std::invalid_argument);
}

TEST_CASE("format_validation_report mentions flags") {
    Instance inst = make_scalar_toy(0.25);
    inst.program.constants.kappa_f = 1e-3;
    const ValidationReport report = validate_constants(inst.program, 1000, 1);
    const std::string text = format_validation_report(report, inst.program.constants);
    CHECK(text.find("VIOLATED") != std::string::npos);
    CHECK(text.find("FLAGS RAISED") != std::string::npos);
}
