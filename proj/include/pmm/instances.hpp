#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "pmm/problem.hpp"

namespace pmm {

// Synthetic instance metadata: generator parameters, the closed-form optimum,
// and (for the affine instance) the geometry needed to rebuild it exactly.
struct InstanceDescriptor {
    std::string name;
    int n = 0;
    int p = 0;
    double noise_amp = 0.0;
    std::uint64_t gen_seed = 0;
    Vector x_star;
    double f_star = 0.0;
    Vector slater_point;
    // affine_qp geometry (empty for scalar_toy)
    Vector mu;
    Matrix A;  // n x p, constraint normals columnwise
    Vector b;
    Vector box_lo, box_hi;
};

struct Instance {
    StochasticProgram program;
    InstanceDescriptor descriptor;
};

// 1-D toy: F(x, xi) = x, G(x, xi) = -x + zeta with zeta uniform on
// [-noise_amp, noise_amp], X0 = [-1, 1]. Optimum x* = 0, f* = 0.
// Requires noise_amp in [0, 0.5].
Instance make_scalar_toy(double noise_amp);

// Quadratic objective with affine expectation constraints:
//   F(x, xi) = 0.5 ||x - (mu + xi_obj)||^2,
//   G_i(x, xi) = a_i' x - b_i + xi_cons_i,
// noise uniform and bounded, X0 a box. Geometry is drawn from the seed and
// retried (at most 100 times) until exactly constraint 1 is active at the
// optimum x* = mu - a_1 (a_1' mu - b_1)/||a_1||^2, which lies strictly inside
// the box, and the Slater margin is at least 0.1.
Instance make_affine_qp(int n, int p, std::uint64_t seed, double noise_amp);

// Explicit-geometry constructor for pinned test cases. Validates the
// single-active-constraint design and throws if it does not hold.
struct AffineQpParams {
    Vector mu;
    Matrix A;
    Vector b;
    Vector box_lo, box_hi;
    double noise_amp = 0.0;
};
Instance make_affine_qp(const AffineQpParams& params);

// The closed-form optimum stored in the descriptor.
std::pair<Vector, double> exact_solution(const InstanceDescriptor& descriptor);

// Registry used by the CLI and config files. Recognized names: "scalar_toy"
// (key noise_amp) and "affine_qp" (keys n, p, seed, noise_amp).
Instance make_instance(const std::string& name,
                       const std::map<std::string, std::string>& params);

// Exact Euclidean projection onto the feasible region Phi (intersected with
// X0) where it is cheap: clamp for scalar_toy, Dykstra's alternating
// projections over box and halfspaces for affine_qp.
std::function<Vector(const Vector&)> phi_projection(const Instance& instance);

}  // namespace pmm
