#include <doctest.h>

#include <cmath>
#include <limits>

#include "pmm/instances.hpp"

using namespace pmm;

namespace {

Vector vec(std::initializer_list<double> vals) {
    Vector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

// Brute-force grid search: minimize true_f subject to true_g <= 0 over the
// box, resolution `step` per axis. n <= 2 only.
std::pair<Vector, double> grid_minimize(const StochasticProgram& prog,
                                        const Vector& lo, const Vector& hi,
                                        double step) {
    REQUIRE(prog.n <= 2);
    Vector best;
    double best_f = std::numeric_limits<double>::infinity();
    Vector x(prog.n);
    const long n0 = std::lround((hi[0] - lo[0]) / step);
    const long n1 = prog.n == 2 ? std::lround((hi[1] - lo[1]) / step) : 0;
    for (long i = 0; i <= n0; ++i) {
        x[0] = lo[0] + i * step;
        for (long j = 0; j <= n1; ++j) {
            if (prog.n == 2) x[1] = lo[1] + j * step;
            if (prog.true_g(x).maxCoeff() > 0) continue;
            const double f = prog.true_f(x);
            if (f < best_f) {
                best_f = f;
                best = x;
            }
        }
    }
    return {best, best_f};
}

Instance explicit_qp(double b1, double noise_amp) {
    AffineQpParams params;
    params.mu = vec({2.0, 0.0});
    params.A = Matrix::Zero(2, 1);
    params.A(0, 0) = 1.0;
    params.b = Vector::Constant(1, b1);
    params.box_lo = vec({-1.0, -2.0});
    params.box_hi = vec({3.0, 2.0});
    params.noise_amp = noise_amp;
    return make_affine_qp(params);
}

}  // namespace

TEST_CASE("scalar_toy definition and constants") {
    const Instance inst = make_scalar_toy(0.0);
    CHECK(inst.program.true_g(vec({0.3}))[0] == doctest::Approx(-0.3));
    CHECK(inst.program.true_f(vec({0.3})) == doctest::Approx(0.3));
    const ConstantsBundle& c = inst.program.constants;
    CHECK(c.D0 == 2.0);
    CHECK(c.kappa_f == 1.0);
    CHECK(c.kappa_g == 1.0);
    CHECK(c.nu_g == 1.0);
    CHECK(c.eps0 == 1.0);
    // Slater point: true_g(1) = -1 <= -eps0
    CHECK(inst.program.true_g(c.slater_point)[0] <= -c.eps0);
    CHECK(make_scalar_toy(0.5).program.constants.nu_g == doctest::Approx(1.5));
    CHECK_THROWS_AS(make_scalar_toy(0.6), std::invalid_argument);
    CHECK_THROWS_AS(make_scalar_toy(-0.1), std::invalid_argument);
}

TEST_CASE("affine_qp explicit geometry matches the closed form") {
    const Instance inst = explicit_qp(1.0, 0.0);
    CHECK((inst.descriptor.x_star - vec({1.0, 0.0})).norm() < 1e-12);
    CHECK(inst.descriptor.f_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(inst.program.true_g(inst.descriptor.x_star)[0]) <= 1e-12);
    // shifting b1 slides the optimum along the constraint normal
    const Instance shifted = explicit_qp(1.1, 0.0);
    CHECK((shifted.descriptor.x_star - vec({1.1, 0.0})).norm() < 1e-12);
}

TEST_CASE("exact_solution agrees with grid brute force") {
    const Instance toy = make_scalar_toy(0.0);
    const auto [toy_x, toy_f] = exact_solution(toy.descriptor);
    CHECK(toy_x == Vector::Zero(1));
    CHECK(toy_f == 0.0);
    const auto [gx, gf] =
        grid_minimize(toy.program, vec({-1.0}), vec({1.0}), 1e-3);
    CHECK(std::abs(gx[0] - toy_x[0]) <= 1e-3);
    CHECK(std::abs(gf - toy_f) <= 1e-3);

    const Instance qp = explicit_qp(1.0, 0.0);
    const auto [qx, qf] = grid_minimize(qp.program, qp.descriptor.box_lo,
                                        qp.descriptor.box_hi, 1e-3);
    CHECK((qx - qp.descriptor.x_star).norm() <= 2e-3);
    CHECK(std::abs(qf - qp.descriptor.f_star) <= 1e-3);
}

TEST_CASE("generated affine_qp geometry invariants") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 17ULL}) {
        const Instance inst = make_affine_qp(3, 2, seed, 0.25);
        const InstanceDescriptor& d = inst.descriptor;
        const Vector g_star = inst.program.true_g(d.x_star);
        CHECK(std::abs(g_star[0]) <= 1e-12);           // constraint 1 active
        CHECK(g_star.tail(d.p - 1).maxCoeff() < 0.0);  // the rest inactive
        CHECK(((d.x_star - d.box_lo).array() > 0).all());
        CHECK(((d.box_hi - d.x_star).array() > 0).all());
        // Slater margin as declared
        const Vector g_hat = inst.program.true_g(d.slater_point);
        CHECK(g_hat.maxCoeff() <= -inst.program.constants.eps0 + 1e-12);
        CHECK(inst.program.constants.eps0 >= 0.1);
        // constraint normals are unit vectors
        for (int i = 0; i < d.p; ++i) {
            CHECK(d.A.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(make_affine_qp(0, 1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_affine_qp(2, 0, 1, 0.1), std::invalid_argument);
}

TEST_CASE("generated instances pass validate_constants at 1e5 samples") {
    for (const Instance& inst :
         {make_scalar_toy(0.25), make_affine_qp(2, 1, 4, 0.25),
          make_affine_qp(3, 3, 9, 0.5)}) {
        const ValidationReport report = validate_constants(inst.program, 100000, 2);
        CHECK(report.ok());
    }
}

TEST_CASE("sampled oracles are unbiased for the closed-form expectations") {
    const Instance inst = make_affine_qp(2, 2, 8, 0.5);
    const StochasticProgram& prog = inst.program;
    const Vector x = 0.5 * (inst.descriptor.box_lo + inst.descriptor.box_hi);
    SampleStream s(13, 1);
    const long N = 100000;
    double f_sum = 0, f_sq = 0;
    Vector g_sum = Vector::Zero(prog.p), g_sq = Vector::Zero(prog.p);
    for (long t = 0; t < N; ++t) {
        const Sample xi = prog.sample(s, t);
        const double f = prog.eval_F(x, xi);
        f_sum += f;
        f_sq += f * f;
        const Vector g = prog.eval_G(x, xi);
        g_sum += g;
        g_sq += g.cwiseProduct(g);
    }
    const double f_mean = f_sum / N;
    const double f_se = std::sqrt((f_sq / N - f_mean * f_mean) / N);
    CHECK(std::abs(f_mean - prog.true_f(x)) <= 4.0 * f_se);
    for (int i = 0; i < prog.p; ++i) {
        const double g_mean = g_sum[i] / N;
        const double g_se = std::sqrt((g_sq[i] / N - g_mean * g_mean) / N);
        CHECK(std::abs(g_mean - prog.true_g(x)[i]) <= 4.0 * g_se);
    }
}

TEST_CASE("finite differences agree at interior points") {
    const Instance inst = make_affine_qp(2, 1, 5, 0.25);
    SampleStream s(3, 0);
    const Vector center = 0.5 * (inst.descriptor.box_lo + inst.descriptor.box_hi);
    for (long t = 0; t < 10; ++t) {
        const Vector x =
            center + 0.5 * (inst.program.sample_X0(s, t) - center);
        CHECK(finite_diff_check(inst.program, x, inst.program.sample(s, t),
                                1e-5) <= 1e-6);
    }
}

TEST_CASE("make_instance registry") {
    const Instance toy = make_instance("scalar_toy", {{"noise_amp", "0.5"}});
    CHECK(toy.program.constants.nu_g == doctest::Approx(1.5));
    const Instance qp = make_instance(
        "affine_qp",
        {{"n", "3"}, {"p", "2"}, {"seed", "11"}, {"noise_amp", "0.1"}});
    CHECK(qp.descriptor.n == 3);
    CHECK(qp.descriptor.p == 2);
    CHECK(qp.descriptor.gen_seed == 11);
    CHECK_THROWS_AS(make_instance("portfolio", {}), std::invalid_argument);
}

TEST_CASE("phi_projection: scalar_toy clamps onto [0, 1]") {
    const Instance inst = make_scalar_toy(0.25);
    const auto proj = phi_projection(inst);
    CHECK(proj(vec({-0.5}))[0] == 0.0);
    CHECK(proj(vec({0.5}))[0] == 0.5);
    CHECK(proj(vec({2.0}))[0] == 1.0);
}

TEST_CASE("phi_projection: affine_qp Dykstra output is feasible and optimal") {
    const Instance inst = make_affine_qp(2, 2, 6, 0.25);
    const auto proj = phi_projection(inst);
    const StochasticProgram& prog = inst.program;
    SampleStream s(29, 0);

    std::vector<Vector> feasible = {inst.descriptor.x_star,
                                    inst.descriptor.slater_point};
    for (long t = 0; t < 50; ++t) {
        const Vector y = prog.sample_X0(s, t) +
                         vec({s.uniform_symmetric(t, 50, 2.0),
                              s.uniform_symmetric(t, 51, 2.0)});
        const Vector px = proj(y);
        CHECK(prog.true_g(px).maxCoeff() <= 1e-9);
        CHECK((project_box(px, inst.descriptor.box_lo, inst.descriptor.box_hi) -
               px).norm() <= 1e-9);
        feasible.push_back(px);
        // variational inequality of the Euclidean projection
        for (const Vector& z : feasible) {
            CHECK((y - px).dot(z - px) <= 1e-7);
        }
    }
}
