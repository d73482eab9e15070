#include "pmm/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pmm {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_vector(const Vector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt(v[i]);
    }
    return out;
}

Vector parse_vector(const std::string& s) {
    std::istringstream in(s);
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    Vector out(static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = vals[static_cast<std::size_t>(i)];
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    return fields;
}

}  // namespace

void write_trace_csv(const std::string& path, const RunTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);

    const int p = static_cast<int>(trace.final_lambda.size());
    out << "# algorithm = " << trace.algorithm << "\n";
    out << "# instance = " << trace.instance << "\n";
    out << "# T = " << trace.T << "\n";
    out << "# run_id = " << trace.run_id << "\n";
    out << "# seed = " << trace.seed << "\n";
    out << "# master_seed = " << trace.master_seed << "\n";
    out << "# sigma = " << fmt(trace.sigma) << "\n";
    out << "# alpha = " << fmt(trace.alpha) << "\n";
    out << "# inner_tol = " << fmt(trace.inner_tol) << "\n";
    out << "# inner_max_iter = " << trace.inner_max_iter << "\n";
    out << "# has_comparator = " << (trace.has_comparator ? 1 : 0) << "\n";
    out << "# n = " << trace.x_avg.size() << "\n";
    out << "# p = " << p << "\n";
    out << "# x_avg = " << fmt_vector(trace.x_avg) << "\n";
    out << "# final_lambda = " << fmt_vector(trace.final_lambda) << "\n";

    out << "run_id,seed,t,f_sample";
    if (trace.has_comparator) out << ",f_comparator";
    for (int i = 1; i <= p; ++i) out << ",g_sample_" << i;
    if (trace.has_comparator) {
        for (int i = 1; i <= p; ++i) out << ",g_comparator_" << i;
    }
    out << ",lambda_norm,step_norm,inner_iters,inner_flag\n";

    for (const StepRecord& rec : trace.steps) {
        out << trace.run_id << ',' << trace.seed << ',' << rec.t << ','
            << fmt(rec.f_sample);
        if (trace.has_comparator) out << ',' << fmt(rec.f_comparator);
        for (int i = 0; i < p; ++i) out << ',' << fmt(rec.g_sample[i]);
        if (trace.has_comparator) {
            for (int i = 0; i < p; ++i) out << ',' << fmt(rec.g_comparator[i]);
        }
        out << ',' << fmt(rec.lambda_norm) << ',' << fmt(rec.step_norm) << ','
            << rec.inner_iters << ',' << (rec.inner_converged ? 1 : 0) << "\n";
    }
    if (!out) throw std::runtime_error("write_trace_csv: write failed for " + path);
}

RunTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);

    RunTrace trace;
    std::map<std::string, std::string> meta;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            meta[trim(line.substr(1, eq - 1))] = trim(line.substr(eq + 1));
            continue;
        }
        header = split_csv(line);
        break;
    }
    if (header.empty()) throw std::runtime_error("read_trace_csv: no header row in " + path);

    auto meta_str = [&](const std::string& key) {
        auto it = meta.find(key);
        if (it == meta.end()) {
            throw std::runtime_error("read_trace_csv: missing '# " + key + "' in " + path);
        }
        return it->second;
    };
    trace.algorithm = meta_str("algorithm");
    trace.instance = meta_str("instance");
    trace.T = std::stol(meta_str("T"));
    trace.run_id = std::stoull(meta_str("run_id"));
    trace.seed = std::stoull(meta_str("seed"));
    trace.master_seed = std::stoull(meta_str("master_seed"));
    trace.sigma = std::stod(meta_str("sigma"));
    trace.alpha = std::stod(meta_str("alpha"));
    trace.inner_tol = std::stod(meta_str("inner_tol"));
    trace.inner_max_iter = std::stoi(meta_str("inner_max_iter"));
    trace.has_comparator = meta_str("has_comparator") == "1";
    trace.x_avg = parse_vector(meta_str("x_avg"));
    trace.final_lambda = parse_vector(meta_str("final_lambda"));

    const int p = std::stoi(meta_str("p"));
    std::vector<std::string> expected = {"run_id", "seed", "t", "f_sample"};
    if (trace.has_comparator) expected.push_back("f_comparator");
    for (int i = 1; i <= p; ++i) expected.push_back("g_sample_" + std::to_string(i));
    if (trace.has_comparator) {
        for (int i = 1; i <= p; ++i) expected.push_back("g_comparator_" + std::to_string(i));
    }
    expected.insert(expected.end(), {"lambda_norm", "step_norm", "inner_iters", "inner_flag"});
    if (header != expected) {
        throw std::runtime_error("read_trace_csv: unexpected column layout in " + path);
    }

    trace.steps.reserve(trace.T);
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != expected.size()) {
            throw std::runtime_error("read_trace_csv: malformed row in " + path);
        }
        std::size_t c = 2;  // skip run_id, seed echoes
        StepRecord rec;
        rec.t = std::stol(fields[c++]);
        rec.f_sample = std::stod(fields[c++]);
        if (trace.has_comparator) rec.f_comparator = std::stod(fields[c++]);
        rec.g_sample = Vector(p);
        for (int i = 0; i < p; ++i) rec.g_sample[i] = std::stod(fields[c++]);
        if (trace.has_comparator) {
            rec.g_comparator = Vector(p);
            for (int i = 0; i < p; ++i) rec.g_comparator[i] = std::stod(fields[c++]);
        }
        rec.lambda_norm = std::stod(fields[c++]);
        rec.step_norm = std::stod(fields[c++]);
        rec.inner_iters = std::stoi(fields[c++]);
        rec.inner_converged = fields[c++] == "1";
        trace.steps.push_back(std::move(rec));
    }
    if (static_cast<long>(trace.steps.size()) != trace.T) {
        throw std::runtime_error("read_trace_csv: row count does not match T in " + path);
    }
    return trace;
}

std::string trace_filename(long T, std::uint64_t seed) {
    return "trace_T" + std::to_string(T) + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace pmm
