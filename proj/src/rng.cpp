#include "bolw/rng.hpp"

#include <algorithm>
#include <cmath>

namespace bolw {

std::vector<double> dirichlet_symmetric(RngEngine& eng, double alpha, std::size_t dim) {
    std::vector<double> out(dim);
    double total = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        std::gamma_distribution<double> gamma(alpha, 1.0);
        out[i] = gamma(eng);
        total += out[i];
    }
    if (total <= 0.0) {
        // All gamma draws underflowed (tiny alpha); fall back to uniform.
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(dim));
        return out;
    }
    for (double& v : out) v /= total;
    return out;
}

DiscreteSampler::DiscreteSampler(std::span<const double> probs) {
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf_[i] = acc;
    }
    // Normalize so the last entry is exactly 1 regardless of input scale.
    if (acc > 0.0) {
        for (double& c : cdf_) c /= acc;
    } else {
        for (std::size_t i = 0; i < cdf_.size(); ++i)
            cdf_[i] = static_cast<double>(i + 1) / static_cast<double>(cdf_.size());
    }
    cdf_.back() = 1.0;
}

std::size_t DiscreteSampler::operator()(RngEngine& eng) const {
    const double u = uniform01(eng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
}

} // namespace bolw
