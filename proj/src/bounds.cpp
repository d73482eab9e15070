#include "pmm/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace pmm {

namespace {

struct Kappa04 {
    double k0, k1, k2, k3, k4;
};

Kappa04 kappa04(const ConstantsBundle& c) {
    validate_bundle(c);
    Kappa04 k;
    k.k0 = 2.0 * c.nu_f / c.eps0;
    k.k1 = c.D0 * c.D0 / c.eps0;
    k.k2 = 0.0;
    k.k3 = c.nu_g * c.nu_g / c.eps0 - c.nu_g;
    k.k4 = 2.0 * c.nu_g + c.eps0 / 2.0 +
           (8.0 * c.nu_g * c.nu_g / c.eps0) *
               std::log(32.0 * c.nu_g * c.nu_g / (c.eps0 * c.eps0));
    return k;
}

// pi(T, eta) with log(1/eta) passed explicitly so omega_c stays finite when
// eta = e^{-T^{1/4}} underflows.
double pi_bound_log(const ConstantsBundle& c, int p, double T,
                    double log_inv_eta) {
    const Kappa04 k = kappa04(c);
    const double sp = std::sqrt(static_cast<double>(p));
    const double kg2 = c.kappa_g * c.kappa_g;
    const double lead = 1.0 + 2.0 * sp * kg2;
    const double sqrtT = std::sqrt(T);
    return k.k3 * lead + 2.0 * sp * c.nu_g * kg2 +
           (lead * (k.k0 + k.k1 + k.k4) + 4.0 * c.kappa_g * c.kappa_f) * sqrtT +
           8.0 * lead * (c.nu_g * c.nu_g / c.eps0) * sqrtT *
               (std::log(T + 1.0) + log_inv_eta);
}

double beta_bound_log(const ConstantsBundle& c, double T, double log_inv_eta) {
    const Kappa04 k = kappa04(c);
    const double sqrtT = std::sqrt(T);
    const double log_2_eta = std::log(2.0) + log_inv_eta;    // log(2/eta)
    const double log_2T_eta = std::log(2.0 * T) + log_inv_eta;  // log(2T/eta)
    return 0.5 * (c.kappa_f * c.kappa_f + c.nu_g * c.nu_g) * sqrtT +
           0.5 * c.D0 * c.D0 * sqrtT +
           std::sqrt(2.0) * c.nu_g * std::sqrt(log_2_eta) *
               ((k.k0 + k.k1 + k.k4) * sqrtT + k.k3 +
                (8.0 * c.nu_g * c.nu_g / c.eps0) * sqrtT * log_2T_eta);
}

void require_eta(double eta) {
    if (!(eta > 0.0) || !(eta < 1.0)) {
        throw std::invalid_argument("eta must lie in (0, 1)");
    }
}

}  // namespace

BoundConstants kappa_constants(const ConstantsBundle& constants, int p) {
    if (p < 1) {
        throw std::invalid_argument("kappa_constants: requires p >= 1");
    }
    const Kappa04 k = kappa04(constants);
    BoundConstants out;
    out.kappa0 = k.k0;
    out.kappa1 = k.k1;
    out.kappa2 = k.k2;
    out.kappa3 = k.k3;
    out.kappa4 = k.k4;
    out.kappa_star = k.k0 + k.k1 + k.k3 + k.k4;
    const double kg2 = constants.kappa_g * constants.kappa_g;
    out.kappa_c = out.kappa_star + 4.0 * constants.kappa_g * constants.kappa_f +
                  2.0 * std::sqrt(static_cast<double>(p)) *
                      (out.kappa_star + constants.nu_g) * kg2;
    out.kappa_o = 0.5 * (constants.kappa_f * constants.kappa_f +
                         constants.D0 * constants.D0 +
                         constants.nu_g * constants.nu_g);
    return out;
}

double theta_drift(const ConstantsBundle& c, double sigma, double alpha,
                   long s) {
    if (!(sigma > 0) || !(alpha > 0) || s < 1) {
        throw std::invalid_argument("theta_drift: requires sigma > 0, alpha > 0, s >= 1");
    }
    return 0.5 * c.eps0 * sigma * s + c.nu_g * sigma * (s - 1) +
           alpha * c.D0 * c.D0 / (c.eps0 * s) + 2.0 * c.nu_f / c.eps0 +
           sigma * c.nu_g * c.nu_g / c.eps0;
}

double psi_bound(const ConstantsBundle& c, double sigma, double alpha, long s) {
    return theta_drift(c, sigma, alpha, s) +
           (c.nu_g + (8.0 * c.nu_g * c.nu_g / c.eps0) *
                         std::log(32.0 * c.nu_g * c.nu_g / (c.eps0 * c.eps0))) *
               sigma * s;
}

double phi_bound(const ConstantsBundle& c, double sigma, double alpha, long s,
                 double mu) {
    if (!(mu > 0.0) || !(mu < 1.0)) {
        throw std::invalid_argument("phi_bound: mu must lie in (0, 1)");
    }
    return psi_bound(c, sigma, alpha, s) +
           (8.0 * c.nu_g * c.nu_g / c.eps0) * std::log(1.0 / mu) * sigma * s;
}

DriftParams::DriftParams(double theta_, double delta_max_, double zeta_, long t0_)
    : theta(theta_), delta_max(delta_max_), zeta(zeta_), t0(t0_) {
    if (!(theta > 0) || !(delta_max > 0) || !(zeta > 0) || zeta > delta_max ||
        t0 < 1) {
        throw std::invalid_argument(
            "DriftParams: need theta > 0, 0 < zeta <= delta_max, t0 >= 1");
    }
}

double drift_tail_z(double theta, double delta_max, double zeta, long t0,
                    double mu) {
    DriftParams params(theta, delta_max, zeta, t0);  // validates hypotheses
    if (!(mu > 0.0) || !(mu < 1.0)) {
        throw std::invalid_argument("drift_tail_z: mu must lie in (0, 1)");
    }
    const double ratio = 4.0 * delta_max * delta_max / zeta;
    return theta + t0 * delta_max +
           t0 * ratio * std::log(8.0 * delta_max * delta_max / (zeta * zeta)) +
           t0 * ratio * std::log(1.0 / mu);
}

double pi_bound(const ConstantsBundle& c, int p, long long T, double eta) {
    if (T < 1 || p < 1) throw std::invalid_argument("pi_bound: requires T >= 1, p >= 1");
    require_eta(eta);
    return pi_bound_log(c, p, static_cast<double>(T), std::log(1.0 / eta));
}

double beta_bound(const ConstantsBundle& c, long long T, double eta) {
    if (T < 1) throw std::invalid_argument("beta_bound: requires T >= 1");
    require_eta(eta);
    return beta_bound_log(c, static_cast<double>(T), std::log(1.0 / eta));
}

double omega_c(const ConstantsBundle& c, int p, long long T) {
    if (T < 1 || p < 1) throw std::invalid_argument("omega_c: requires T >= 1, p >= 1");
    const double Td = static_cast<double>(T);
    return pi_bound_log(c, p, Td, std::pow(Td, 0.25)) / Td;
}

double omega_o(const ConstantsBundle& c, long long T) {
    if (T < 1) throw std::invalid_argument("omega_o: requires T >= 1");
    const double Td = static_cast<double>(T);
    return beta_bound_log(c, Td, std::pow(Td, 0.25)) / Td;
}

long s_for_horizon(long long T) {
    if (T < 1) throw std::invalid_argument("s_for_horizon: requires T >= 1");
    return static_cast<long>(std::ceil(std::sqrt(static_cast<double>(T))));
}

DriftReport check_drift(const RunTrace& trace, const ConstantsBundle& constants,
                        long s) {
    if (s < 1) throw std::invalid_argument("check_drift: requires s >= 1");
    const double bound = trace.sigma * constants.nu_g;
    const long T = static_cast<long>(trace.steps.size());

    // lambda norms at t = 0..T (the final one from the stored multiplier).
    std::vector<double> norms(T + 1);
    for (long t = 0; t < T; ++t) norms[t] = trace.steps[t].lambda_norm;
    norms[T] = trace.final_lambda.norm();

    DriftReport report;
    report.theta = theta_drift(constants, trace.sigma, trace.alpha, s);
    for (long t = 0; t < T; ++t) {
        if (std::abs(norms[t + 1] - norms[t]) > bound + 1e-12) {
            ++report.violations;
        }
    }
    double sum_below = 0.0, sum_above = 0.0;
    for (long t = 0; t + s <= T; ++t) {
        const double drift = norms[t + s] - norms[t];
        if (norms[t] < report.theta) {
            ++report.windows_below;
            sum_below += drift;
        } else {
            ++report.windows_above;
            sum_above += drift;
        }
    }
    if (report.windows_below > 0) report.mean_drift_below = sum_below / report.windows_below;
    if (report.windows_above > 0) report.mean_drift_above = sum_above / report.windows_above;
    return report;
}

}  // namespace pmm
