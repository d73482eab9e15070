#pragma once

#include <cstdint>

namespace pmm {

// splitmix64 finalizer; full-period 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based sample stream. A draw is addressed by (master seed, run id,
// step t, draw index k), so any realization can be regenerated without
// replaying the stream and two algorithms can consume common random numbers
// by sharing (master seed, run id).
class SampleStream {
public:
    SampleStream(std::uint64_t master_seed, std::uint64_t run_id)
        : base_(splitmix64(splitmix64(master_seed) ^
                           (run_id * 0x9e3779b97f4a7c15ULL + 1))) {}

    // Uniform double in [0, 1).
    double uniform(std::uint64_t t, std::uint64_t k) const {
        std::uint64_t z = splitmix64(splitmix64(base_ + t) + k);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    // Uniform double in [-amp, amp].
    double uniform_symmetric(std::uint64_t t, std::uint64_t k, double amp) const {
        return amp * (2.0 * uniform(t, k) - 1.0);
    }

    std::uint64_t base() const { return base_; }

private:
    std::uint64_t base_;
};

}  // namespace pmm
