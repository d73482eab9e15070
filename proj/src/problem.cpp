#include "pmm/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pmm {

void validate_bundle(const ConstantsBundle& c) {
    if (!(c.D0 > 0) || !(c.nu_f > 0) || !(c.nu_g > 0) || !(c.kappa_f > 0) ||
        !(c.kappa_g > 0) || !(c.eps0 > 0)) {
        throw std::invalid_argument("ConstantsBundle: all scalar fields must be > 0");
    }
}

Vector project_nonneg(const Vector& v) {
    return v.cwiseMax(0.0);
}

Vector project_box(const Vector& y, const Vector& lo, const Vector& hi) {
    if (lo.size() != y.size() || hi.size() != y.size()) {
        throw std::invalid_argument("project_box: dimension mismatch");
    }
    if ((lo.array() > hi.array()).any()) {
        throw std::invalid_argument("project_box: lo > hi in some coordinate");
    }
    return y.cwiseMax(lo).cwiseMin(hi);
}

Vector project_ball(const Vector& y, const Vector& center, double radius) {
    if (!(radius > 0)) {
        throw std::invalid_argument("project_ball: radius must be > 0");
    }
    const Vector d = y - center;
    const double norm = d.norm();
    if (norm <= radius) return y;
    return center + (radius / norm) * d;
}

ValidationReport validate_constants(const StochasticProgram& program,
                                    long n_samples, std::uint64_t seed) {
    if (n_samples < 1) {
        throw std::invalid_argument("validate_constants: n_samples must be >= 1");
    }
    const ConstantsBundle& c = program.constants;
    // Independent streams for the X0 covering samples and the noise.
    SampleStream xs(seed, 0xA110C8ED);
    SampleStream noise(seed, 0x5EEDED);

    ValidationReport report;
    report.n_samples = n_samples;
    report.slater_g_mean = Vector::Zero(program.p);
    report.slater_g_stderr = Vector::Zero(program.p);
    Vector slater_sq = Vector::Zero(program.p);

    const Vector x_hat = program.project_X0(c.slater_point);
    for (long i = 0; i < n_samples; ++i) {
        const Vector x = program.sample_X0(xs, i);
        const Sample xi = program.sample(noise, i);

        if (program.p > 0) {
            const Vector g = program.eval_G(x, xi);
            report.max_G_norm = std::max(report.max_G_norm, g.norm());
            const Matrix V = program.subgrad_G(x, xi);
            for (int j = 0; j < program.p; ++j) {
                report.max_G_subgrad_col_norm =
                    std::max(report.max_G_subgrad_col_norm, V.col(j).norm());
            }
            const Vector g_hat = program.eval_G(x_hat, xi);
            report.slater_g_mean += g_hat;
            slater_sq += g_hat.cwiseProduct(g_hat);
        }
        report.max_F_subgrad_norm =
            std::max(report.max_F_subgrad_norm, program.subgrad_F(x, xi).norm());
    }

    if (program.p > 0) {
        report.slater_g_mean /= static_cast<double>(n_samples);
        for (int j = 0; j < program.p; ++j) {
            const double mean = report.slater_g_mean[j];
            const double var = std::max(
                0.0, slater_sq[j] / static_cast<double>(n_samples) - mean * mean);
            report.slater_g_stderr[j] =
                std::sqrt(var / static_cast<double>(n_samples));
            if (mean > -c.eps0 + 3.0 * report.slater_g_stderr[j]) {
                report.slater_violated = true;
            }
        }
    }
    report.nu_g_violated = report.max_G_norm > c.nu_g;
    report.kappa_f_violated = report.max_F_subgrad_norm > c.kappa_f;
    report.kappa_g_violated = report.max_G_subgrad_col_norm > c.kappa_g;
    return report;
}

double finite_diff_check(const StochasticProgram& program, const Vector& x,
                         const Sample& xi, double h) {
    if (!(h > 0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
    double worst = 0.0;

    const Vector vF = program.subgrad_F(x, xi);
    for (int j = 0; j < program.n; ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (program.eval_F(xp, xi) - program.eval_F(xm, xi)) / (2 * h);
        worst = std::max(worst, std::abs(fd - vF[j]));
    }
    if (program.p > 0) {
        const Matrix V = program.subgrad_G(x, xi);
        for (int j = 0; j < program.n; ++j) {
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Vector fd =
                (program.eval_G(xp, xi) - program.eval_G(xm, xi)) / (2 * h);
            for (int i = 0; i < program.p; ++i) {
                worst = std::max(worst, std::abs(fd[i] - V(j, i)));
            }
        }
    }
    return worst;
}

std::string format_validation_report(const ValidationReport& report,
                                     const ConstantsBundle& constants) {
    std::ostringstream out;
    out << "samples: " << report.n_samples << "\n";
    out << "max ||G(x,xi)||        = " << report.max_G_norm
        << "  (nu_g = " << constants.nu_g
        << (report.nu_g_violated ? ")  VIOLATED" : ")  ok") << "\n";
    out << "max ||v0(x,xi)||       = " << report.max_F_subgrad_norm
        << "  (kappa_f = " << constants.kappa_f
        << (report.kappa_f_violated ? ")  VIOLATED" : ")  ok") << "\n";
    out << "max_i ||v_i(x,xi)||    = " << report.max_G_subgrad_col_norm
        << "  (kappa_g = " << constants.kappa_g
        << (report.kappa_g_violated ? ")  VIOLATED" : ")  ok") << "\n";
    for (Eigen::Index i = 0; i < report.slater_g_mean.size(); ++i) {
        out << "g_" << (i + 1) << "(x_hat) ~ " << report.slater_g_mean[i]
            << " +/- " << report.slater_g_stderr[i]
            << "  (need <= -eps0 = " << -constants.eps0 << ")\n";
    }
    if (report.slater_violated) out << "slater margin VIOLATED\n";
    out << (report.ok() ? "no flags" : "FLAGS RAISED") << "\n";
    return out.str();
}

}  // namespace pmm
