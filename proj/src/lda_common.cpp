#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "bolw/errors.hpp"
#include "bolw/lda.hpp"
#include "bolw/rng.hpp"
#include "bolw/textio.hpp"

namespace bolw {

LdaConfig LdaConfig::defaults(std::size_t k, std::uint64_t seed) {
    LdaConfig cfg;
    cfg.k = k;
    cfg.alpha = 50.0 / static_cast<double>(k);
    cfg.beta = 0.1;
    cfg.seed = seed;
    return cfg;
}

void LdaConfig::validate() const {
    if (k < 2) throw Error(Errc::invalid_config, "k must be >= 2");
    if (!(alpha > 0.0)) throw Error(Errc::invalid_config, "alpha must be > 0");
    if (!(beta > 0.0)) throw Error(Errc::invalid_config, "beta must be > 0");
    if (!(vb.kappa > 0.5 && vb.kappa <= 1.0))
        throw Error(Errc::invalid_config, "vb.kappa must be in (0.5, 1]");
    if (!(vb.tau0 >= 0.0)) throw Error(Errc::invalid_config, "vb.tau0 must be >= 0");
    if (vb.batch_size == 0) throw Error(Errc::invalid_config, "vb.batch_size must be >= 1");
    if (vb.passes == 0) throw Error(Errc::invalid_config, "vb.passes must be >= 1");
    if (vb.doc_update_iters == 0)
        throw Error(Errc::invalid_config, "vb.doc_update_iters must be >= 1");
    if (!(vb.doc_convergence_tol >= 0.0))
        throw Error(Errc::invalid_config, "vb.doc_convergence_tol must be >= 0");
}

SimulatedCorpus simulate_corpus(const LdaConfig& config, std::span<const double> target_weights,
                                const Vocabulary& vocab) {
    config.validate();
    if (vocab.size() == 0) throw Error(Errc::empty_corpus, "vocabulary is empty");

    const std::size_t n = target_weights.size();
    std::vector<std::int64_t> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(target_weights[i]))
            throw Error(Errc::invalid_target_weight, "target weight is not finite");
        targets[i] = std::llround(target_weights[i]);
        if (targets[i] <= 0)
            throw Error(Errc::invalid_target_weight,
                        "target weight " + format_double(target_weights[i]) +
                            " rounds to " + std::to_string(targets[i]) +
                            "; the generator needs at least one draw per bag");
    }

    const std::size_t k_count = config.k;
    const std::size_t m = vocab.size();
    RngEngine eng = make_engine(config.seed, "simulate");

    SimulatedCorpus out;
    out.true_phi = Dense(k_count, m);
    std::vector<DiscreteSampler> word_samplers;
    word_samplers.reserve(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        const std::vector<double> row = dirichlet_symmetric(eng, config.beta, m);
        std::copy(row.begin(), row.end(), out.true_phi.row(k).begin());
        word_samplers.emplace_back(row);
    }

    out.true_theta = Dense(n, k_count);
    out.bags.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> theta = dirichlet_symmetric(eng, config.alpha, k_count);
        std::copy(theta.begin(), theta.end(), out.true_theta.row(i).begin());
        DiscreteSampler topic_sampler(theta);

        std::map<std::uint32_t, double> counts;
        for (std::int64_t draw = 0; draw < targets[i]; ++draw) {
            const std::size_t z = topic_sampler(eng);
            const std::size_t w = word_samplers[z](eng);
            counts[static_cast<std::uint32_t>(w)] += 1.0;
        }

        BagOfLabelWords bag;
        bag.entries.assign(counts.begin(), counts.end());
        bag.weight = static_cast<double>(targets[i]);
        out.bags.push_back(std::move(bag));
    }
    return out;
}

TopicReport top_labels(const TopicModel& model, std::size_t n) {
    const std::size_t m = model.phi.cols;
    const std::size_t take = std::min(n, m);

    TopicReport report;
    report.topics.resize(model.phi.rows);
    std::vector<std::size_t> order(m);
    for (std::size_t z = 0; z < model.phi.rows; ++z) {
        for (std::size_t j = 0; j < m; ++j) order[j] = j;
        const auto row = model.phi.row(z);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), [&](std::size_t a, std::size_t b) {
                              if (row[a] != row[b]) return row[a] > row[b];
                              return a < b; // ties by ascending vocabulary index
                          });
        auto& entries = report.topics[z];
        entries.reserve(take);
        for (std::size_t r = 0; r < take; ++r)
            entries.push_back({order[r], row[order[r]]});
    }
    return report;
}

void write_topic_report_csv(const TopicReport& report, const Vocabulary& vocab,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "topic,rank,service,text,probability\n";
    for (std::size_t z = 0; z < report.topics.size(); ++z) {
        for (std::size_t r = 0; r < report.topics[z].size(); ++r) {
            const auto& e = report.topics[z][r];
            if (e.label_index >= vocab.size())
                throw Error(Errc::index_out_of_range, "report label outside vocabulary");
            const LabelWord& w = vocab.words[e.label_index];
            out << (z + 1) << ',' << (r + 1) << ',' << to_string(w.service) << ','
                << csv_escape(w.text) << ',' << format_double(e.probability) << '\n';
        }
    }
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

void write_elbo_csv(std::span<const double> trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "update,elbo\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << (i + 1) << ',' << format_double(trace[i]) << '\n';
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

} // namespace bolw
