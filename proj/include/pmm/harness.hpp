#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmm/algorithm.hpp"
#include "pmm/bounds.hpp"
#include "pmm/instances.hpp"

namespace pmm {

// Parsed experiment configuration. File format: flat `key = value` lines
// grouped under [instance] and [algorithm] sections; all keys are echoed
// into the report for provenance.
struct ExperimentConfig {
    // [instance]
    std::string instance_name;
    std::map<std::string, std::string> instance_params;

    // [algorithm]
    std::string algorithm = "pmmsopt";  // or "projected_sa"
    std::vector<long> horizons;
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 0;
    ParamRule sigma_rule = ParamRule::InvSqrtT;
    ParamRule alpha_rule = ParamRule::SqrtT;
    double sigma = 1.0;
    double alpha = 1.0;
    double inner_tol = 1e-8;
    int inner_max_iter = 10000;
    std::optional<double> gamma;  // baseline step size
    std::optional<std::vector<double>> x0;
    std::vector<double> eta_grid = {0.5};

    // Raw key/value echo, keyed "section.key", in file order.
    std::vector<std::pair<std::string, std::string>> raw;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization; parse_config(config_to_text(c)) reproduces c.
// run_experiment drops this next to the traces so a report can be rebuilt
// from the output directory alone.
std::string config_to_text(const ExperimentConfig& config);

// Throws std::invalid_argument on an invalid config (empty seed list,
// duplicate seeds, horizons not strictly increasing, unknown algorithm...).
void validate_config(const ExperimentConfig& config);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares fit of log(value) against log(T); needs at least 3 points
// with positive values.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

// Fraction of values that are <= bound.
double empirical_tail(const std::vector<double>& values, double bound);

// Regret of one run, computed from its trace columns.
struct RegretRecord {
    long T = 0;
    std::uint64_t seed = 0;
    std::optional<double> r_obj;  // sum F(x^t, xi_t) - sum F(x*, xi_t)
    Vector r_cv;                  // per-constraint sum G_i(x^t, xi_t)
};

struct HorizonAggregate {
    long T = 0;
    long runs = 0;
    double mean_r_obj = 0.0;
    double mean_r_cv_max = 0.0;   // max over constraints of mean R_cv_i
    Vector mean_r_cv;             // per constraint
    double kappa_o_sqrtT = 0.0;
    double kappa_c_sqrtT = 0.0;
    std::vector<std::pair<double, double>> pi_eta;    // (eta, pi(T, eta))
    std::vector<std::pair<double, double>> beta_eta;  // (eta, beta(T, eta))
    double omega_c = 0.0;
    double omega_o = 0.0;
};

struct RegretReport {
    int schema_version = 1;
    std::vector<RegretRecord> records;
    std::vector<HorizonAggregate> horizons;
    // Fits of the mean normalized regrets against T; the raw means are
    // clamped below at 1e-6 T (i.e. 1e-6 after normalization) so the
    // log-log fit stays defined.
    std::optional<RateFit> cv_rate;
    std::optional<RateFit> obj_rate;
    std::vector<std::pair<std::string, std::string>> config_echo;
};

// Pure function of the traces: cumulative regrets along with the
// theoretical bounds evaluated from the instance constants.
// Objective regret needs comparator columns; constraint regret never does.
RegretReport aggregate(const std::vector<RunTrace>& traces,
                       const InstanceDescriptor& descriptor,
                       const ConstantsBundle& constants,
                       const std::vector<double>& eta_grid);

std::string report_to_json(const RegretReport& report);

// Runs every (T, seed) cell, writes one trace CSV per run plus report.json
// under out_dir. Cells run concurrently when jobs > 1; results are merged in
// deterministic (T, seed) order either way. Returns the report.
RegretReport run_experiment(const ExperimentConfig& config,
                            const std::string& out_dir, int jobs = 1);

// Serial reference for the parallel cell loop; used by tests and the
// benchmark to pin down that threading does not change results.
std::vector<RunTrace> run_cells_serial(const ExperimentConfig& config);
std::vector<RunTrace> run_cells_parallel(const ExperimentConfig& config, int jobs);

// Rebuilds a report from stored traces (no re-run).
RegretReport aggregate_dir(const std::string& traces_dir);

}  // namespace pmm
