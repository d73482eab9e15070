#pragma once

#include <string>

#include "pmm/algorithm.hpp"

namespace pmm {

// Trace CSV: `# key = value` header lines (run metadata, x_avg, final
// multiplier), then a column header and one row per step. Columns:
//   run_id, seed, t, f_sample, f_comparator, g_sample_1..p,
//   g_comparator_1..p, lambda_norm, step_norm, inner_iters, inner_flag
// Comparator columns are omitted when the run had no comparator. Doubles are
// written with 17 significant digits so a round trip is exact.
void write_trace_csv(const std::string& path, const RunTrace& trace);
RunTrace read_trace_csv(const std::string& path);

std::string trace_filename(long T, std::uint64_t seed);

}  // namespace pmm
