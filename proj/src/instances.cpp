#include "pmm/instances.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pmm {

namespace {

double param_or(const std::map<std::string, std::string>& params,
                const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stod(it->second);
}

long long param_or_int(const std::map<std::string, std::string>& params,
                       const std::string& key, long long fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stoll(it->second);
}

// max over the box of ||x - center||, attained at a corner.
double max_box_distance(const Vector& lo, const Vector& hi, const Vector& center) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
        const double d = std::max(std::abs(lo[j] - center[j]),
                                  std::abs(hi[j] - center[j]));
        sq += d * d;
    }
    return std::sqrt(sq);
}

ConstantsBundle affine_qp_constants(const Vector& mu, const Matrix& A,
                                    const Vector& b, const Vector& lo,
                                    const Vector& hi, double amp,
                                    const Vector& slater, double eps0) {
    const int n = static_cast<int>(mu.size());
    const int p = static_cast<int>(b.size());
    const Vector center = 0.5 * (lo + hi);
    const Vector half = 0.5 * (hi - lo);

    ConstantsBundle c;
    c.D0 = (hi - lo).norm();
    const double max_dist = max_box_distance(lo, hi, mu) + amp * std::sqrt(double(n));
    c.kappa_f = max_dist;
    c.nu_f = 0.5 * max_dist * max_dist;  // F >= 0, so sup bounds the oscillation
    double kg = 0.0, ng_sq = 0.0;
    for (int i = 0; i < p; ++i) {
        kg = std::max(kg, A.col(i).norm());
        const double m = std::abs(A.col(i).dot(center) - b[i]) +
                         A.col(i).cwiseAbs().dot(half) + amp;
        ng_sq += m * m;
    }
    c.kappa_g = kg;
    c.nu_g = std::sqrt(ng_sq);
    c.eps0 = eps0;
    c.slater_point = slater;
    return c;
}

StochasticProgram affine_qp_program(const Vector& mu, const Matrix& A,
                                    const Vector& b, const Vector& lo,
                                    const Vector& hi, double amp,
                                    const ConstantsBundle& constants) {
    const int n = static_cast<int>(mu.size());
    const int p = static_cast<int>(b.size());
    StochasticProgram prog;
    prog.n = n;
    prog.p = p;
    prog.constants = constants;
    prog.sample = [n, p, amp](const SampleStream& s, long t) {
        Sample xi(n + p);
        for (int k = 0; k < n + p; ++k) xi[k] = s.uniform_symmetric(t, k, amp);
        return xi;
    };
    prog.sample_X0 = [n, lo, hi](const SampleStream& s, long t) {
        Vector x(n);
        for (int j = 0; j < n; ++j) {
            x[j] = lo[j] + (hi[j] - lo[j]) * s.uniform(t, 100 + j);
        }
        return x;
    };
    prog.eval_F = [n, mu](const Vector& x, const Sample& xi) {
        return 0.5 * (x - mu - xi.head(n)).squaredNorm();
    };
    prog.subgrad_F = [n, mu](const Vector& x, const Sample& xi) -> Vector {
        return x - mu - xi.head(n);
    };
    prog.eval_G = [n, p, A, b](const Vector& x, const Sample& xi) -> Vector {
        return A.transpose() * x - b + xi.tail(p);
    };
    prog.subgrad_G = [A](const Vector&, const Sample&) { return A; };
    prog.project_X0 = [lo, hi](const Vector& y) { return project_box(y, lo, hi); };
    prog.true_f = [n, mu, amp](const Vector& x) {
        return 0.5 * (x - mu).squaredNorm() + n * amp * amp / 6.0;
    };
    prog.true_g = [A, b](const Vector& x) -> Vector { return A.transpose() * x - b; };
    return prog;
}

Instance assemble_affine_qp(const Vector& mu, const Matrix& A, const Vector& b,
                            const Vector& lo, const Vector& hi, double amp,
                            std::uint64_t gen_seed) {
    const int n = static_cast<int>(mu.size());
    const int p = static_cast<int>(b.size());
    const Vector a1 = A.col(0);
    const double viol = a1.dot(mu) - b[0];
    if (!(viol > 0)) {
        throw std::invalid_argument("affine_qp: constraint 1 must be violated at mu");
    }
    const Vector x_star = mu - (viol / a1.squaredNorm()) * a1;
    const Vector g_star = A.transpose() * x_star - b;
    if (std::abs(g_star[0]) > 1e-12) {
        throw std::logic_error("affine_qp: constraint 1 not active at x*");
    }
    for (int i = 1; i < p; ++i) {
        if (!(g_star[i] < -1e-6)) {
            throw std::invalid_argument("affine_qp: constraint " + std::to_string(i + 1) +
                                        " not strictly inactive at x*");
        }
        // Only constraint 1 may separate mu from the feasible region.
        if (!(A.col(i).dot(mu) - b[i] < 0)) {
            throw std::invalid_argument("affine_qp: constraint " + std::to_string(i + 1) +
                                        " violated at mu");
        }
    }
    if (((x_star - lo).array() < 1e-6).any() || ((hi - x_star).array() < 1e-6).any()) {
        throw std::invalid_argument("affine_qp: x* not strictly inside the box");
    }

    const Vector slater = x_star - (0.5 / a1.squaredNorm()) * a1;
    const Vector g_slater = A.transpose() * slater - b;
    const double eps0 = -g_slater.maxCoeff();
    if (!(eps0 > 0)) {
        throw std::invalid_argument("affine_qp: Slater candidate infeasible");
    }
    if (((slater - lo).array() < 0).any() || ((hi - slater).array() < 0).any()) {
        throw std::invalid_argument("affine_qp: Slater point outside the box");
    }

    const ConstantsBundle constants =
        affine_qp_constants(mu, A, b, lo, hi, amp, slater, eps0);
    validate_bundle(constants);

    Instance inst;
    inst.program = affine_qp_program(mu, A, b, lo, hi, amp, constants);
    inst.descriptor.name = "affine_qp";
    inst.descriptor.n = n;
    inst.descriptor.p = p;
    inst.descriptor.noise_amp = amp;
    inst.descriptor.gen_seed = gen_seed;
    inst.descriptor.x_star = x_star;
    inst.descriptor.f_star = 0.5 * viol * viol / a1.squaredNorm() + n * amp * amp / 6.0;
    inst.descriptor.slater_point = slater;
    inst.descriptor.mu = mu;
    inst.descriptor.A = A;
    inst.descriptor.b = b;
    inst.descriptor.box_lo = lo;
    inst.descriptor.box_hi = hi;
    return inst;
}

}  // namespace

Instance make_scalar_toy(double noise_amp) {
    if (noise_amp < 0 || noise_amp > 0.5) {
        throw std::invalid_argument("make_scalar_toy: noise_amp must lie in [0, 0.5]");
    }
    ConstantsBundle c;
    c.D0 = 2.0;
    c.nu_f = 2.2;
    c.nu_g = 1.0 + noise_amp;
    c.kappa_f = 1.0;
    c.kappa_g = 1.0;
    c.eps0 = 1.0;
    c.slater_point = Vector::Constant(1, 1.0);

    StochasticProgram prog;
    prog.n = 1;
    prog.p = 1;
    prog.constants = c;
    prog.sample = [noise_amp](const SampleStream& s, long t) {
        Sample xi(1);
        xi[0] = noise_amp > 0 ? s.uniform_symmetric(t, 0, noise_amp) : 0.0;
        return xi;
    };
    prog.sample_X0 = [](const SampleStream& s, long t) {
        Vector x(1);
        x[0] = 2.0 * s.uniform(t, 100) - 1.0;
        return x;
    };
    prog.eval_F = [](const Vector& x, const Sample&) { return x[0]; };
    prog.subgrad_F = [](const Vector&, const Sample&) { return Vector::Constant(1, 1.0); };
    prog.eval_G = [](const Vector& x, const Sample& xi) {
        return Vector::Constant(1, -x[0] + xi[0]);
    };
    prog.subgrad_G = [](const Vector&, const Sample&) {
        return Matrix::Constant(1, 1, -1.0);
    };
    prog.project_X0 = [](const Vector& y) {
        return project_box(y, Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    };
    prog.true_f = [](const Vector& x) { return x[0]; };
    prog.true_g = [](const Vector& x) { return Vector::Constant(1, -x[0]); };

    Instance inst;
    inst.program = std::move(prog);
    inst.descriptor.name = "scalar_toy";
    inst.descriptor.n = 1;
    inst.descriptor.p = 1;
    inst.descriptor.noise_amp = noise_amp;
    inst.descriptor.x_star = Vector::Zero(1);
    inst.descriptor.f_star = 0.0;
    inst.descriptor.slater_point = c.slater_point;
    return inst;
}

Instance make_affine_qp(int n, int p, std::uint64_t seed, double noise_amp) {
    if (n < 1 || p < 1) {
        throw std::invalid_argument("make_affine_qp: requires n >= 1, p >= 1");
    }
    if (noise_amp < 0) {
        throw std::invalid_argument("make_affine_qp: noise_amp must be >= 0");
    }
    for (int attempt = 0; attempt < 100; ++attempt) {
        SampleStream s(seed, 0xAF1E + attempt);
        Vector mu(n);
        for (int j = 0; j < n; ++j) mu[j] = 0.5 + s.uniform(0, j);

        Matrix A(n, p);
        bool degenerate = false;
        for (int i = 0; i < p; ++i) {
            Vector a(n);
            for (int j = 0; j < n; ++j) a[j] = s.uniform_symmetric(1 + i, j, 1.0);
            if (a.norm() < 0.3) {
                degenerate = true;
                break;
            }
            A.col(i) = a / a.norm();
        }
        if (degenerate) continue;

        const double delta = 0.3 + 0.4 * s.uniform(200, 0);
        Vector b(p);
        b[0] = A.col(0).dot(mu) - delta;
        const Vector x_star = mu - delta * A.col(0);
        for (int i = 1; i < p; ++i) {
            const double margin = 0.6 + 0.4 * s.uniform(200, i);
            b[i] = A.col(i).dot(x_star) + margin;
        }

        Vector lo(n), hi(n);
        const Vector slater_candidate = x_star - 0.5 * A.col(0);
        for (int j = 0; j < n; ++j) {
            lo[j] = std::min({mu[j], x_star[j], slater_candidate[j]}) - 1.5;
            hi[j] = std::max({mu[j], x_star[j], slater_candidate[j]}) + 1.5;
        }

        try {
            Instance inst = assemble_affine_qp(mu, A, b, lo, hi, noise_amp, seed);
            if (inst.program.constants.eps0 < 0.1) continue;
            return inst;
        } catch (const std::invalid_argument&) {
            continue;  // bad geometry draw
        }
    }
    throw std::runtime_error("make_affine_qp: no valid geometry after 100 retries");
}

Instance make_affine_qp(const AffineQpParams& params) {
    if (params.mu.size() == 0 || params.b.size() == 0 ||
        params.A.rows() != params.mu.size() || params.A.cols() != params.b.size()) {
        throw std::invalid_argument("make_affine_qp: inconsistent parameter shapes");
    }
    return assemble_affine_qp(params.mu, params.A, params.b, params.box_lo,
                              params.box_hi, params.noise_amp, 0);
}

std::pair<Vector, double> exact_solution(const InstanceDescriptor& descriptor) {
    return {descriptor.x_star, descriptor.f_star};
}

Instance make_instance(const std::string& name,
                       const std::map<std::string, std::string>& params) {
    if (name == "scalar_toy") {
        return make_scalar_toy(param_or(params, "noise_amp", 0.25));
    }
    if (name == "affine_qp") {
        return make_affine_qp(static_cast<int>(param_or_int(params, "n", 2)),
                              static_cast<int>(param_or_int(params, "p", 1)),
                              static_cast<std::uint64_t>(param_or_int(params, "seed", 1)),
                              param_or(params, "noise_amp", 0.25));
    }
    throw std::invalid_argument("unknown instance: " + name);
}

std::function<Vector(const Vector&)> phi_projection(const Instance& instance) {
    if (instance.descriptor.name == "scalar_toy") {
        return [](const Vector& y) {
            return project_box(y, Vector::Zero(1), Vector::Constant(1, 1.0));
        };
    }
    if (instance.descriptor.name == "affine_qp") {
        const Matrix A = instance.descriptor.A;
        const Vector b = instance.descriptor.b;
        const Vector lo = instance.descriptor.box_lo;
        const Vector hi = instance.descriptor.box_hi;
        const int p = static_cast<int>(b.size());
        // Dykstra's alternating projections over the box and each halfspace.
        return [A, b, lo, hi, p](const Vector& y) {
            Vector x = y;
            std::vector<Vector> corrections(p + 1, Vector::Zero(y.size()));
            for (int cycle = 0; cycle < 10000; ++cycle) {
                const Vector x_before = x;
                {
                    const Vector z = x + corrections[0];
                    const Vector px = project_box(z, lo, hi);
                    corrections[0] = z - px;
                    x = px;
                }
                for (int i = 0; i < p; ++i) {
                    const Vector z = x + corrections[i + 1];
                    const Vector a = A.col(i);
                    const double excess = a.dot(z) - b[i];
                    const Vector px =
                        excess > 0 ? Vector(z - (excess / a.squaredNorm()) * a) : z;
                    corrections[i + 1] = z - px;
                    x = px;
                }
                if ((x - x_before).norm() <= 1e-13) break;
            }
            return x;
        };
    }
    throw std::invalid_argument("phi_projection: no registered projection for " +
                                instance.descriptor.name);
}

}  // namespace pmm
