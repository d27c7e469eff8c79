#include <cmath>
#include <cstdint>
#include <vector>

#include "bolw/errors.hpp"
#include "bolw/rng.hpp"
#include "lda_internal.hpp"

namespace bolw {

// Collapsed Gibbs sampler over token-topic assignments, used as the
// small-instance oracle for the variational path. Intentionally serial:
// each token's conditional depends on every earlier resample in the sweep.
TopicModel fit_gibbs(const ImageLabelMatrix& matrix, const LdaConfig& config) {
    config.validate();
    if (config.gibbs.iterations <= config.gibbs.burn_in)
        throw Error(Errc::invalid_config, "gibbs.iterations must exceed gibbs.burn_in");

    const std::size_t n = matrix.row_count();
    const std::size_t m = matrix.col_count();
    if (n == 0 || m == 0) throw Error(Errc::empty_corpus, "matrix is empty");
    detail::check_weights_finite(matrix);

    struct Token {
        std::uint32_t doc;
        std::uint32_t word;
    };
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, v] : matrix.rows[i]) {
            const double r = std::round(v);
            if (std::abs(v - r) > 1e-9 || r < 0.0)
                throw Error(Errc::non_integer_weights,
                            "row " + std::to_string(i + 1) + ": entry " + std::to_string(v) +
                                " is not a non-negative integer; the Gibbs oracle only runs "
                                "on binary/count matrices");
            for (std::int64_t c = 0; c < static_cast<std::int64_t>(r); ++c)
                tokens.push_back({static_cast<std::uint32_t>(i), j});
        }
    }
    if (tokens.empty()) throw Error(Errc::empty_corpus, "matrix has no tokens");

    const std::size_t k_count = config.k;
    const double alpha = config.alpha;
    const double beta = config.beta;
    const double beta_total = beta * static_cast<double>(m);

    std::vector<std::int64_t> ndk(n * k_count, 0);
    std::vector<std::int64_t> nkw(k_count * m, 0);
    std::vector<std::int64_t> nk(k_count, 0);
    std::vector<std::int64_t> nd(n, 0);
    std::vector<std::uint32_t> assignment(tokens.size());

    RngEngine eng = make_engine(config.seed, "gibbs");
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::uint32_t z = static_cast<std::uint32_t>(eng() % k_count);
        assignment[t] = z;
        ndk[tokens[t].doc * k_count + z] += 1;
        nkw[z * m + tokens[t].word] += 1;
        nk[z] += 1;
        nd[tokens[t].doc] += 1;
    }

    Dense phi_acc(k_count, m);
    Dense theta_acc(n, k_count);
    std::size_t samples = 0;
    std::vector<double> p(k_count);

    for (std::size_t sweep = 0; sweep < config.gibbs.iterations; ++sweep) {
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            const std::uint32_t d = tokens[t].doc;
            const std::uint32_t w = tokens[t].word;
            const std::uint32_t old_z = assignment[t];
            ndk[d * k_count + old_z] -= 1;
            nkw[old_z * m + w] -= 1;
            nk[old_z] -= 1;

            double total = 0.0;
            for (std::size_t k = 0; k < k_count; ++k) {
                p[k] = (static_cast<double>(ndk[d * k_count + k]) + alpha) *
                       (static_cast<double>(nkw[k * m + w]) + beta) /
                       (static_cast<double>(nk[k]) + beta_total);
                total += p[k];
            }
            const double u = uniform01(eng) * total;
            double acc = 0.0;
            std::uint32_t new_z = static_cast<std::uint32_t>(k_count - 1);
            for (std::size_t k = 0; k < k_count; ++k) {
                acc += p[k];
                if (u < acc) {
                    new_z = static_cast<std::uint32_t>(k);
                    break;
                }
            }
            assignment[t] = new_z;
            ndk[d * k_count + new_z] += 1;
            nkw[new_z * m + w] += 1;
            nk[new_z] += 1;
        }

        if (sweep >= config.gibbs.burn_in) {
            for (std::size_t k = 0; k < k_count; ++k)
                for (std::size_t w = 0; w < m; ++w)
                    phi_acc(k, w) += (static_cast<double>(nkw[k * m + w]) + beta) /
                                     (static_cast<double>(nk[k]) + beta_total);
            const double alpha_total = alpha * static_cast<double>(k_count);
            for (std::size_t d = 0; d < n; ++d)
                for (std::size_t k = 0; k < k_count; ++k)
                    theta_acc(d, k) += (static_cast<double>(ndk[d * k_count + k]) + alpha) /
                                       (static_cast<double>(nd[d]) + alpha_total);
            ++samples;
        }
    }

    const double inv = 1.0 / static_cast<double>(samples);
    for (double& v : phi_acc.data) v *= inv;
    for (double& v : theta_acc.data) v *= inv;

    TopicModel model;
    model.config = config;
    model.vocab_hash = matrix.vocab ? matrix.vocab->hash() : 0;
    model.phi = std::move(phi_acc);
    model.theta = std::move(theta_acc);
    return model;
}

} // namespace bolw
