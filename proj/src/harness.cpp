#include "pmm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <omp.h>

#include "pmm/baseline.hpp"
#include "pmm/trace_io.hpp"

namespace pmm {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(const std::string& value) {
    std::string cleaned = value;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream in(cleaned);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::invalid_argument("bad numeric list: " + value);
    return out;
}

template <class T>
std::vector<T> parse_integers(const std::string& value) {
    std::vector<T> out;
    for (double v : parse_doubles(value)) {
        T i = static_cast<T>(v);
        if (static_cast<double>(i) != v) {
            throw std::invalid_argument("expected integers: " + value);
        }
        out.push_back(i);
    }
    return out;
}

template <class T>
T parse_one(const std::string& value) {
    const auto v = parse_integers<T>(value);
    if (v.size() != 1) throw std::invalid_argument("expected one integer: " + value);
    return v[0];
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ' ';
        out += parts[i];
    }
    return out;
}

RunTrace run_cell(const Instance& instance, const ExperimentConfig& config,
                  long T, std::uint64_t seed) {
    std::optional<Vector> x0;
    if (config.x0) {
        x0 = Eigen::Map<const Vector>(config.x0->data(),
                                      static_cast<Eigen::Index>(config.x0->size()));
    }
    RunTrace trace;
    if (config.algorithm == "pmmsopt") {
        AlgoConfig cfg;
        cfg.T = T;
        cfg.sigma = config.sigma;
        cfg.alpha = config.alpha;
        cfg.sigma_rule = config.sigma_rule;
        cfg.alpha_rule = config.alpha_rule;
        cfg.inner_tol = config.inner_tol;
        cfg.inner_max_iter = config.inner_max_iter;
        cfg.seed = seed;
        cfg.x0 = x0;
        cfg.comparator = instance.descriptor.x_star;
        trace = run_pmmsopt(instance.program, cfg, config.master_seed);
    } else {
        BaselineConfig cfg;
        cfg.T = T;
        cfg.gamma = config.gamma;
        cfg.seed = seed;
        cfg.x0 = x0;
        cfg.comparator = instance.descriptor.x_star;
        trace = run_projected_sa(instance.program, phi_projection(instance), cfg,
                                 config.master_seed);
    }
    trace.instance = config.instance_name;
    return trace;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "instance" && section != "algorithm") {
                throw std::invalid_argument("config: unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected `key = value` inside a section");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        }
        config.raw.emplace_back(section + "." + key, value);

        if (section == "instance") {
            if (key == "name") {
                config.instance_name = value;
            } else {
                config.instance_params[key] = value;
            }
            continue;
        }
        if (key == "algorithm") {
            config.algorithm = value;
        } else if (key == "horizons") {
            config.horizons = parse_integers<long>(value);
        } else if (key == "seeds") {
            config.seeds = parse_integers<std::uint64_t>(value);
        } else if (key == "master_seed") {
            config.master_seed = parse_one<std::uint64_t>(value);
        } else if (key == "sigma_rule") {
            config.sigma_rule = parse_param_rule(value);
        } else if (key == "alpha_rule") {
            config.alpha_rule = parse_param_rule(value);
        } else if (key == "sigma") {
            config.sigma = std::stod(value);
        } else if (key == "alpha") {
            config.alpha = std::stod(value);
        } else if (key == "inner_tol") {
            config.inner_tol = std::stod(value);
        } else if (key == "inner_max_iter") {
            config.inner_max_iter = static_cast<int>(parse_one<long>(value));
        } else if (key == "gamma") {
            config.gamma = std::stod(value);
        } else if (key == "x0") {
            config.x0 = parse_doubles(value);
        } else if (key == "eta_grid") {
            config.eta_grid = parse_doubles(value);
        } else {
            throw std::invalid_argument("config: unknown key `" + key +
                                        "` in [algorithm]");
        }
    }
    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_text(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "[instance]\n";
    out << "name = " << config.instance_name << "\n";
    for (const auto& [key, value] : config.instance_params) {
        out << key << " = " << value << "\n";
    }
    out << "\n[algorithm]\n";
    out << "algorithm = " << config.algorithm << "\n";
    {
        std::vector<std::string> parts;
        for (long T : config.horizons) parts.push_back(std::to_string(T));
        out << "horizons = " << join(parts) << "\n";
    }
    {
        std::vector<std::string> parts;
        for (auto s : config.seeds) parts.push_back(std::to_string(s));
        out << "seeds = " << join(parts) << "\n";
    }
    out << "master_seed = " << config.master_seed << "\n";
    out << "sigma_rule = " << to_string(config.sigma_rule) << "\n";
    out << "alpha_rule = " << to_string(config.alpha_rule) << "\n";
    out << "sigma = " << fmt(config.sigma) << "\n";
    out << "alpha = " << fmt(config.alpha) << "\n";
    out << "inner_tol = " << fmt(config.inner_tol) << "\n";
    out << "inner_max_iter = " << config.inner_max_iter << "\n";
    if (config.gamma) out << "gamma = " << fmt(*config.gamma) << "\n";
    if (config.x0) {
        std::vector<std::string> parts;
        for (double v : *config.x0) parts.push_back(fmt(v));
        out << "x0 = " << join(parts) << "\n";
    }
    {
        std::vector<std::string> parts;
        for (double v : config.eta_grid) parts.push_back(fmt(v));
        out << "eta_grid = " << join(parts) << "\n";
    }
    return out.str();
}

void validate_config(const ExperimentConfig& config) {
    if (config.instance_name.empty()) {
        throw std::invalid_argument("config: [instance] name is required");
    }
    if (config.algorithm != "pmmsopt" && config.algorithm != "projected_sa") {
        throw std::invalid_argument("config: unknown algorithm " + config.algorithm);
    }
    if (config.horizons.empty()) {
        throw std::invalid_argument("config: horizons must be non-empty");
    }
    for (std::size_t i = 0; i < config.horizons.size(); ++i) {
        if (config.horizons[i] < 1 ||
            (i > 0 && config.horizons[i] <= config.horizons[i - 1])) {
            throw std::invalid_argument(
                "config: horizons must be >= 1 and strictly increasing");
        }
    }
    if (config.seeds.empty()) {
        throw std::invalid_argument("config: seeds must be non-empty");
    }
    if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() !=
        config.seeds.size()) {
        throw std::invalid_argument("config: duplicate seeds");
    }
    if (!(config.sigma > 0) || !(config.alpha > 0)) {
        throw std::invalid_argument("config: sigma and alpha must be > 0");
    }
    if (!(config.inner_tol > 0) || config.inner_max_iter < 1) {
        throw std::invalid_argument("config: inner_tol > 0 and inner_max_iter >= 1 required");
    }
    if (config.gamma && !(*config.gamma > 0)) {
        throw std::invalid_argument("config: gamma must be > 0");
    }
    if (config.eta_grid.empty()) {
        throw std::invalid_argument("config: eta_grid must be non-empty");
    }
    for (double eta : config.eta_grid) {
        if (!(eta > 0) || !(eta < 1)) {
            throw std::invalid_argument("config: eta_grid entries must lie in (0, 1)");
        }
    }
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
    std::vector<std::pair<double, double>> logs;
    for (const auto& [T, v] : points) {
        if (T > 0 && v > 0) logs.emplace_back(std::log(T), std::log(v));
    }
    if (logs.size() < 3) {
        throw std::invalid_argument("rate_fit: needs at least 3 positive points");
    }
    const double n = static_cast<double>(logs.size());
    double sx = 0, sy = 0;
    for (const auto& [x, y] : logs) sx += x, sy += y;
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : logs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx <= 0) throw std::invalid_argument("rate_fit: horizons are all equal");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r2 = syy > 1e-30 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

double empirical_tail(const std::vector<double>& values, double bound) {
    if (values.empty()) {
        throw std::invalid_argument("empirical_tail: empty sample");
    }
    const auto hits = std::count_if(values.begin(), values.end(),
                                    [bound](double v) { return v <= bound; });
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

RegretReport aggregate(const std::vector<RunTrace>& traces,
                       const InstanceDescriptor& descriptor,
                       const ConstantsBundle& constants,
                       const std::vector<double>& eta_grid) {
    if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
    const int p = descriptor.p;
    const BoundConstants bc = kappa_constants(constants, p);

    RegretReport report;
    std::map<long, std::vector<std::size_t>> by_T;
    for (const RunTrace& trace : traces) {
        if (static_cast<long>(trace.steps.size()) != trace.T) {
            throw std::invalid_argument("aggregate: trace step count does not match T");
        }
        RegretRecord rec;
        rec.T = trace.T;
        rec.seed = trace.seed;
        rec.r_cv = Vector::Zero(p);
        double r_obj = 0.0;
        for (const StepRecord& step : trace.steps) {
            rec.r_cv += step.g_sample;
            if (trace.has_comparator) r_obj += step.f_sample - step.f_comparator;
        }
        if (trace.has_comparator) rec.r_obj = r_obj;
        by_T[trace.T].push_back(report.records.size());
        report.records.push_back(std::move(rec));
    }

    std::vector<std::pair<double, double>> cv_points, obj_points;
    for (const auto& [T, idx] : by_T) {
        HorizonAggregate agg;
        agg.T = T;
        agg.runs = static_cast<long>(idx.size());
        agg.mean_r_cv = Vector::Zero(p);
        double obj_sum = 0.0;
        long obj_runs = 0;
        for (std::size_t i : idx) {
            const RegretRecord& rec = report.records[i];
            agg.mean_r_cv += rec.r_cv.cwiseMax(0.0);
            if (rec.r_obj) {
                obj_sum += *rec.r_obj;
                ++obj_runs;
            }
        }
        agg.mean_r_cv /= static_cast<double>(agg.runs);
        agg.mean_r_cv_max = p > 0 ? agg.mean_r_cv.maxCoeff() : 0.0;
        if (obj_runs > 0) agg.mean_r_obj = obj_sum / static_cast<double>(obj_runs);

        const double sqrtT = std::sqrt(static_cast<double>(T));
        agg.kappa_o_sqrtT = bc.kappa_o * sqrtT;
        agg.kappa_c_sqrtT = bc.kappa_c * sqrtT;
        for (double eta : eta_grid) {
            agg.pi_eta.emplace_back(eta, pi_bound(constants, p, T, eta));
            agg.beta_eta.emplace_back(eta, beta_bound(constants, T, eta));
        }
        agg.omega_c = pmm::omega_c(constants, p, T);
        agg.omega_o = pmm::omega_o(constants, T);

        const double Td = static_cast<double>(T);
        cv_points.emplace_back(Td, std::max(agg.mean_r_cv_max, 1e-6 * Td) / Td);
        if (obj_runs > 0) {
            obj_points.emplace_back(Td, std::max(agg.mean_r_obj, 1e-6 * Td) / Td);
        }
        report.horizons.push_back(std::move(agg));
    }
    if (cv_points.size() >= 3) report.cv_rate = rate_fit(cv_points);
    if (obj_points.size() >= 3) report.obj_rate = rate_fit(obj_points);
    return report;
}

std::string report_to_json(const RegretReport& report) {
    using json = nlohmann::ordered_json;
    json root;
    root["schema_version"] = report.schema_version;

    json config = json::object();
    for (const auto& [key, value] : report.config_echo) config[key] = value;
    root["config"] = config;

    json records = json::array();
    for (const RegretRecord& rec : report.records) {
        json r;
        r["T"] = rec.T;
        r["seed"] = rec.seed;
        if (rec.r_obj) {
            r["r_obj"] = *rec.r_obj;
        } else {
            r["r_obj"] = nullptr;
        }
        r["r_cv"] = std::vector<double>(rec.r_cv.begin(), rec.r_cv.end());
        records.push_back(std::move(r));
    }
    root["records"] = records;

    json horizons = json::array();
    for (const HorizonAggregate& agg : report.horizons) {
        json h;
        h["T"] = agg.T;
        h["runs"] = agg.runs;
        h["mean_r_obj"] = agg.mean_r_obj;
        h["mean_r_cv"] = std::vector<double>(agg.mean_r_cv.begin(), agg.mean_r_cv.end());
        h["mean_r_cv_max"] = agg.mean_r_cv_max;
        h["kappa_o_sqrtT"] = agg.kappa_o_sqrtT;
        h["kappa_c_sqrtT"] = agg.kappa_c_sqrtT;
        json pi = json::array(), beta = json::array();
        for (const auto& [eta, v] : agg.pi_eta) {
            pi.push_back(json{{"eta", eta}, {"value", v}});
        }
        for (const auto& [eta, v] : agg.beta_eta) {
            beta.push_back(json{{"eta", eta}, {"value", v}});
        }
        h["pi"] = pi;
        h["beta"] = beta;
        h["omega_c"] = agg.omega_c;
        h["omega_o"] = agg.omega_o;
        horizons.push_back(std::move(h));
    }
    root["horizons"] = horizons;

    auto fit_json = [](const std::optional<RateFit>& fit) -> json {
        if (!fit) return nullptr;
        return json{{"slope", fit->slope},
                    {"intercept", fit->intercept},
                    {"r2", fit->r2}};
    };
    root["rates"] = json{{"cv", fit_json(report.cv_rate)},
                         {"obj", fit_json(report.obj_rate)}};
    return root.dump(2) + "\n";
}

std::vector<RunTrace> run_cells_serial(const ExperimentConfig& config) {
    validate_config(config);
    const Instance instance = make_instance(config.instance_name, config.instance_params);
    std::vector<RunTrace> traces;
    traces.reserve(config.horizons.size() * config.seeds.size());
    for (long T : config.horizons) {
        for (std::uint64_t seed : config.seeds) {
            traces.push_back(run_cell(instance, config, T, seed));
        }
    }
    return traces;
}

std::vector<RunTrace> run_cells_parallel(const ExperimentConfig& config, int jobs) {
    validate_config(config);
    if (jobs < 1) throw std::invalid_argument("run_cells_parallel: jobs must be >= 1");
    const Instance instance = make_instance(config.instance_name, config.instance_params);

    struct Cell {
        long T;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (long T : config.horizons) {
        for (std::uint64_t seed : config.seeds) cells.push_back({T, seed});
    }
    std::vector<RunTrace> traces(cells.size());
    std::exception_ptr error;

    // Cells are independent runs: each has its own sample stream keyed by
    // (master_seed, seed) and touches only its own output slot.
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cells.size()); ++i) {
        try {
            traces[i] = run_cell(instance, config, cells[i].T, cells[i].seed);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return traces;
}

RegretReport run_experiment(const ExperimentConfig& config,
                            const std::string& out_dir, int jobs) {
    validate_config(config);
    std::filesystem::create_directories(out_dir);

    const std::vector<RunTrace> traces =
        jobs > 1 ? run_cells_parallel(config, jobs) : run_cells_serial(config);
    for (const RunTrace& trace : traces) {
        write_trace_csv(out_dir + "/" + trace_filename(trace.T, trace.seed), trace);
    }

    const std::string canonical = config_to_text(config);
    {
        std::ofstream out(out_dir + "/config.ini");
        if (!out) throw std::runtime_error("run_experiment: cannot write config.ini");
        out << canonical;
    }

    const Instance instance = make_instance(config.instance_name, config.instance_params);
    RegretReport report = aggregate(traces, instance.descriptor,
                                    instance.program.constants, config.eta_grid);
    report.config_echo = parse_config(canonical).raw;

    std::ofstream out(out_dir + "/report.json");
    if (!out) throw std::runtime_error("run_experiment: cannot write report.json");
    out << report_to_json(report);
    return report;
}

RegretReport aggregate_dir(const std::string& traces_dir) {
    const ExperimentConfig config = load_config(traces_dir + "/config.ini");
    std::vector<RunTrace> traces;
    for (long T : config.horizons) {
        for (std::uint64_t seed : config.seeds) {
            traces.push_back(
                read_trace_csv(traces_dir + "/" + trace_filename(T, seed)));
        }
    }
    const Instance instance = make_instance(config.instance_name, config.instance_params);
    RegretReport report = aggregate(traces, instance.descriptor,
                                    instance.program.constants, config.eta_grid);
    report.config_echo = parse_config(config_to_text(config)).raw;
    return report;
}

}  // namespace pmm
