#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pmm/bounds.hpp"
#include "pmm/harness.hpp"

namespace {

std::map<std::string, std::string> split_params(
    const std::vector<std::string>& pairs) {
    std::map<std::string, std::string> params;
    for (const std::string& kv : pairs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--param", "expected key=value, got " + kv);
        }
        params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return params;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic proximal method-of-multipliers experiment driver"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path, out_dir = "out";
    int jobs = 1;
    run->add_option("--config", config_path, "Experiment config (INI)")->required();
    run->add_option("--out", out_dir, "Output directory for traces and report");
    run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    // aggregate
    auto* agg = app.add_subcommand(
        "aggregate", "Rebuild report.json from a directory of stored traces");
    std::string traces_dir;
    agg->add_option("--traces", traces_dir, "Directory with config.ini and trace CSVs")
        ->required();

    // bounds
    auto* bounds = app.add_subcommand(
        "bounds", "Print the regret-bound constants for an instance");
    std::string instance_name = "scalar_toy";
    std::vector<std::string> param_pairs;
    long long horizon = 10000;
    double eta = 0.5;
    bounds->add_option("--instance", instance_name, "scalar_toy or affine_qp");
    bounds->add_option("--param", param_pairs, "Instance parameter key=value");
    bounds->add_option("--T", horizon, "Horizon")->check(CLI::PositiveNumber);
    bounds->add_option("--eta", eta, "Tail probability in (0,1)");

    // validate
    auto* validate = app.add_subcommand(
        "validate", "Monte-Carlo check of an instance's declared constants");
    long samples = 100000;
    std::uint64_t val_seed = 0;
    validate->add_option("--instance", instance_name, "scalar_toy or affine_qp");
    validate->add_option("--param", param_pairs, "Instance parameter key=value");
    validate->add_option("--samples", samples, "Sample count")->check(CLI::PositiveNumber);
    validate->add_option("--seed", val_seed, "Sampling seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            pmm::run_experiment(pmm::load_config(config_path), out_dir, jobs);
            std::cout << "wrote " << out_dir << "/report.json\n";
        } else if (*agg) {
            std::cout << pmm::report_to_json(pmm::aggregate_dir(traces_dir));
        } else if (*bounds) {
            const pmm::Instance inst =
                pmm::make_instance(instance_name, split_params(param_pairs));
            const pmm::ConstantsBundle& c = inst.program.constants;
            const pmm::BoundConstants k =
                pmm::kappa_constants(c, inst.descriptor.p);
            std::printf("instance     %s (n=%d, p=%d)\n", instance_name.c_str(),
                        inst.descriptor.n, inst.descriptor.p);
            std::printf("kappa0..4    %.10g %.10g %.10g %.10g %.10g\n", k.kappa0,
                        k.kappa1, k.kappa2, k.kappa3, k.kappa4);
            std::printf("kappa_star   %.10g\n", k.kappa_star);
            std::printf("kappa_c      %.10g\n", k.kappa_c);
            std::printf("kappa_o      %.10g\n", k.kappa_o);
            std::printf("s(T)         %ld\n", pmm::s_for_horizon(horizon));
            std::printf("pi(T,eta)    %.10g\n",
                        pmm::pi_bound(c, inst.descriptor.p, horizon, eta));
            std::printf("beta(T,eta)  %.10g\n", pmm::beta_bound(c, horizon, eta));
            std::printf("omega_c(T)   %.10g\n",
                        pmm::omega_c(c, inst.descriptor.p, horizon));
            std::printf("omega_o(T)   %.10g\n", pmm::omega_o(c, horizon));
        } else if (*validate) {
            const pmm::Instance inst =
                pmm::make_instance(instance_name, split_params(param_pairs));
            const pmm::ValidationReport report =
                pmm::validate_constants(inst.program, samples, val_seed);
            std::cout << pmm::format_validation_report(report,
                                                       inst.program.constants);
            return report.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
