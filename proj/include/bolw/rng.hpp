#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "bolw/hash.hpp"

namespace bolw {

using RngEngine = std::mt19937_64;

// Every random stage derives its own engine from the single top-level seed
// and a stage name, so stages are reproducible independently of each other.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stage) {
    std::uint64_t h = fnv1a64(stage);
    h ^= base + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

inline RngEngine make_engine(std::uint64_t base, std::string_view stage) {
    return RngEngine(derive_seed(base, stage));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(RngEngine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Symmetric Dirichlet draw via normalized per-component Gamma variates.
std::vector<double> dirichlet_symmetric(RngEngine& eng, double alpha, std::size_t dim);

/// Categorical sampler over a fixed probability vector; precomputes the CDF.
class DiscreteSampler {
public:
    explicit DiscreteSampler(std::span<const double> probs);
    std::size_t operator()(RngEngine& eng) const;

private:
    std::vector<double> cdf_;
};

} // namespace bolw
