#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bolw/corpus.hpp"
#include "bolw/dense.hpp"
#include "bolw/exec.hpp"
#include "bolw/weighting.hpp"

namespace bolw {

struct VbConfig {
    std::size_t batch_size = 256;
    double kappa = 0.7; // learning-decay exponent, (0.5, 1]
    double tau0 = 1.0;  // learning-delay offset, >= 0
    std::size_t passes = 5;
    std::size_t doc_update_iters = 100;
    double doc_convergence_tol = 1e-4; // on mean absolute change of gamma
    // Forces rho_t = 1. Combined with batch_size >= N this turns the online
    // update into plain batch inference, whose bound is non-decreasing.
    bool unit_learning_rate = false;
};

struct GibbsConfig {
    std::size_t iterations = 2000;
    std::size_t burn_in = 500;
};

struct LdaConfig {
    std::size_t k = 10;
    double alpha = 5.0; // symmetric image-topic prior; default 50/K
    double beta = 0.1;  // symmetric topic-label prior
    std::uint64_t seed = 0;
    VbConfig vb;
    GibbsConfig gibbs;

    /// Standard priors for a given topic count: alpha = 50/K, beta = 0.1.
    static LdaConfig defaults(std::size_t k, std::uint64_t seed = 0);

    void validate() const; // throws Errc::invalid_config
};

/// Fitted model. phi rows are topic-label distributions, theta rows are
/// image-topic distributions; both row-stochastic with strictly positive
/// entries.
struct TopicModel {
    LdaConfig config;
    std::uint64_t vocab_hash = 0;
    Dense phi;   // K x M
    Dense theta; // N x K
    std::vector<double> elbo_trace; // one value per global update (VB only)
};

struct SimulatedCorpus {
    std::vector<BagOfLabelWords> bags;
    Dense true_theta; // N x K
    Dense true_phi;   // K x M
};

/// Generative sampler: phi ~ Dirichlet(beta) per topic, theta ~
/// Dirichlet(alpha) per image; each bag accumulates topic/label draws until
/// its weight reaches the target rounded to the nearest integer. A target
/// that rounds to zero is an error.
SimulatedCorpus simulate_corpus(const LdaConfig& config, std::span<const double> target_weights,
                                const Vocabulary& vocab);

/// Online variational Bayes. Accepts real-valued entries as fractional
/// counts. Documents are processed in row order, mini-batch by mini-batch;
/// the global update uses learning rate (tau0 + t)^(-kappa). Deterministic
/// for a fixed seed regardless of thread count.
TopicModel fit_vb(const ImageLabelMatrix& matrix, const LdaConfig& config,
                  Exec exec = Exec::parallel);

/// Collapsed Gibbs oracle. Requires non-negative integer entries; intended
/// for small corpora. The posterior means average the smoothed count
/// estimates over all post-burn-in sweeps. elbo_trace stays empty (there is
/// no variational bound on this path).
TopicModel fit_gibbs(const ImageLabelMatrix& matrix, const LdaConfig& config);

/// Folds new rows into a fitted model: phi stays fixed, per-document
/// variational updates run to convergence. Rows with no entries get the
/// uniform prior mixture.
Dense project(const TopicModel& model, const ImageLabelMatrix& matrix,
              Exec exec = Exec::parallel);

struct TopicReport {
    struct Entry {
        std::size_t label_index;
        double probability;
    };
    // topics[z] holds the top-n labels of phi^z in non-increasing
    // probability, ties broken by ascending vocabulary index.
    std::vector<std::vector<Entry>> topics;
    std::vector<std::string> names; // optional human-assigned topic names
};

TopicReport top_labels(const TopicModel& model, std::size_t n);

/// CSV columns: topic,rank,service,text,probability (1-based topic/rank).
void write_topic_report_csv(const TopicReport& report, const Vocabulary& vocab,
                            const std::filesystem::path& path);

struct LikelihoodRow {
    std::size_t k;
    double heldout_log_likelihood_per_token;
};

/// Per-K held-out likelihood survey: deterministic 90/10 split, fit on the
/// train rows, mean per-token variational bound on the held-out rows.
/// Duplicate K values collapse; rows come back sorted by K. When the
/// caller's alpha is the 50/k default it is re-derived as 50/K per entry.
std::vector<LikelihoodRow> log_likelihood_report(const ImageLabelMatrix& matrix,
                                                 const LdaConfig& config,
                                                 std::span<const std::size_t> k_values,
                                                 Exec exec = Exec::parallel);

/// ELBO trace CSV: update,elbo.
void write_elbo_csv(std::span<const double> trace, const std::filesystem::path& path);

} // namespace bolw
