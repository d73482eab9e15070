#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "pmm/algorithm.hpp"

namespace pmm {

struct BaselineConfig {
    long T = 0;
    // Step size; defaults to D0 / (kappa_f sqrt(T)) when unset.
    std::optional<double> gamma;
    std::uint64_t seed = 0;
    bool averaging = true;
    std::optional<Vector> x0;
    std::optional<Vector> comparator;
};

// Projected stochastic subgradient baseline
//   x^{j+1} = P_Phi(x^j - gamma v0(x^j, xi_j))
// with iterate averaging. Consumes the same sample stream contract as
// run_pmmsopt (common random numbers) and fills the same trace schema;
// multiplier fields stay zero. proj_phi must be an exact Euclidean
// projection onto the feasible region for this instance.
RunTrace run_projected_sa(const StochasticProgram& program,
                          const std::function<Vector(const Vector&)>& proj_phi,
                          const BaselineConfig& config,
                          std::uint64_t master_seed = 0,
                          const IterObserver& observer = nullptr);

}  // namespace pmm
