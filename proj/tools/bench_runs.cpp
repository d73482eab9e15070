// Times the serial cell loop against the OpenMP one on the same experiment
// and checks that both produce identical traces.

#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include "pmm/harness.hpp"

namespace {

bool traces_equal(const std::vector<pmm::RunTrace>& a,
                  const std::vector<pmm::RunTrace>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].T != b[i].T || a[i].seed != b[i].seed ||
            a[i].x_avg != b[i].x_avg || a[i].final_lambda != b[i].final_lambda ||
            a[i].steps.size() != b[i].steps.size()) {
            return false;
        }
        for (std::size_t t = 0; t < a[i].steps.size(); ++t) {
            const pmm::StepRecord& ra = a[i].steps[t];
            const pmm::StepRecord& rb = b[i].steps[t];
            if (ra.f_sample != rb.f_sample || ra.g_sample != rb.g_sample ||
                ra.lambda_norm != rb.lambda_norm || ra.step_norm != rb.step_norm) {
                return false;
            }
        }
    }
    return true;
}

template <class F>
double time_ms(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    pmm::ExperimentConfig config;
    if (argc > 1) {
        config = pmm::load_config(argv[1]);
    } else {
        config = pmm::parse_config(
            "[instance]\n"
            "name = affine_qp\n"
            "n = 4\n"
            "p = 2\n"
            "seed = 7\n"
            "noise_amp = 0.25\n"
            "[algorithm]\n"
            "algorithm = pmmsopt\n"
            "horizons = 500 1000\n"
            "seeds = 1 2 3 4 5 6 7 8\n"
            "inner_tol = 1e-8\n");
    }
    const int jobs = argc > 2 ? std::stoi(argv[2]) : omp_get_max_threads();

    std::vector<pmm::RunTrace> serial, parallel;
    const double ms_serial = time_ms([&] { serial = pmm::run_cells_serial(config); });
    const double ms_parallel =
        time_ms([&] { parallel = pmm::run_cells_parallel(config, jobs); });

    std::printf("cells      %zu (%zu horizons x %zu seeds)\n", serial.size(),
                config.horizons.size(), config.seeds.size());
    std::printf("serial     %10.1f ms\n", ms_serial);
    std::printf("parallel   %10.1f ms  (jobs = %d)\n", ms_parallel, jobs);
    std::printf("speedup    %10.2fx\n", ms_serial / ms_parallel);
    if (!traces_equal(serial, parallel)) {
        std::printf("MISMATCH: parallel traces differ from serial reference\n");
        return 1;
    }
    std::printf("traces identical\n");
    return 0;
}
