#pragma once

#include <vector>

#include "pmm/algorithm.hpp"
#include "pmm/problem.hpp"

namespace pmm {

// Closed-form constants entering the regret and tail bounds. Natural
// logarithm throughout. kappa3 may be negative when nu_g < eps0.
struct BoundConstants {
    double kappa0 = 0.0;      // 2 nu_f / eps0
    double kappa1 = 0.0;      // D0^2 / eps0
    double kappa2 = 0.0;      // identically zero
    double kappa3 = 0.0;      // nu_g^2 / eps0 - nu_g
    double kappa4 = 0.0;      // 2 nu_g + eps0/2 + (8 nu_g^2/eps0) log(32 nu_g^2/eps0^2)
    double kappa_star = 0.0;  // kappa0 + kappa1 + kappa3 + kappa4
    double kappa_c = 0.0;     // expected constraint-violation coefficient
    double kappa_o = 0.0;     // expected objective-regret coefficient
};

// Requires p >= 1 (the Slater-based constants are undefined without
// constraints).
BoundConstants kappa_constants(const ConstantsBundle& constants, int p);

// Drift threshold
//   theta(sigma, alpha, s) = eps0 sigma s / 2 + nu_g sigma (s-1)
//     + alpha D0^2 / (eps0 s) + 2 nu_f / eps0 + sigma nu_g^2 / eps0.
double theta_drift(const ConstantsBundle& constants, double sigma, double alpha,
                   long s);

// psi = theta + [nu_g + (8 nu_g^2/eps0) log(32 nu_g^2/eps0^2)] sigma s;
// also equals kappa0 + kappa1 alpha/s + kappa2 s + kappa3 sigma + kappa4 sigma s.
double psi_bound(const ConstantsBundle& constants, double sigma, double alpha,
                 long s);

// phi = psi + (8 nu_g^2/eps0) log(1/mu) sigma s, for mu in (0, 1).
double phi_bound(const ConstantsBundle& constants, double sigma, double alpha,
                 long s, double mu);

// Drift-process parameters; construction enforces 0 < zeta <= delta_max.
struct DriftParams {
    DriftParams(double theta, double delta_max, double zeta, long t0);
    double theta;
    double delta_max;
    double zeta;
    long t0;
};

// Tail level z with Pr{Z(t) >= z} <= mu for a drift process:
//   z = theta + t0 delta_max + t0 (4 delta_max^2/zeta) [log(8 delta_max^2/zeta^2)
//       + log(1/mu)].
double drift_tail_z(double theta, double delta_max, double zeta, long t0,
                    double mu);

// High-probability cumulative constraint-violation level at confidence 1-eta.
double pi_bound(const ConstantsBundle& constants, int p, long long T, double eta);

// High-probability cumulative objective-regret level at confidence 1-eta.
double beta_bound(const ConstantsBundle& constants, long long T, double eta);

// omega_c(T) = pi(T, e^{-T^{1/4}})/T and omega_o(T) = beta(T, e^{-T^{1/4}})/T,
// evaluated via log(1/eta) = T^{1/4} so that large T does not underflow.
double omega_c(const ConstantsBundle& constants, int p, long long T);
double omega_o(const ConstantsBundle& constants, long long T);

// s = ceil(sqrt(T)), the window length used when instantiating the drift
// bounds at horizon T.
long s_for_horizon(long long T);

// Per-trace drift diagnostics: hard check of the per-step multiplier bound
// | ||lambda^{t+1}|| - ||lambda^t|| | <= sigma nu_g, plus empirical
// window-mean drifts of ||lambda|| split by whether the window start is
// above or below theta(sigma, alpha, s).
struct DriftReport {
    long violations = 0;          // steps breaking the per-step bound
    double theta = 0.0;           // threshold used for the split
    long windows_below = 0;       // windows starting with ||lambda|| < theta
    long windows_above = 0;
    double mean_drift_below = 0.0;  // mean of ||lambda^{t+s}|| - ||lambda^t||
    double mean_drift_above = 0.0;
};

DriftReport check_drift(const RunTrace& trace, const ConstantsBundle& constants,
                        long s);

}  // namespace pmm
