#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "bolw/errors.hpp"
#include "bolw/rng.hpp"
#include "lda_internal.hpp"

namespace bolw {
namespace detail {

namespace {
inline double digamma(double x) { return boost::math::digamma(x); }
constexpr double kPhinormFloor = 1e-100; // keeps empty responsibilities off 0
} // namespace

void dirichlet_expectation_row(std::span<const double> gamma, std::span<double> out) {
    double total = 0.0;
    for (double g : gamma) total += g;
    const double psi_total = digamma(total);
    for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = digamma(gamma[k]) - psi_total;
}

void doc_estep(std::span<const Entry> terms, const Dense& exp_elog_topics, double alpha,
               std::size_t max_iters, double tol, std::vector<double>& gamma,
               EStepScratch& s, double* contrib, double* phinorm_out) {
    const std::size_t k_count = exp_elog_topics.rows;

    double total_weight = 0.0;
    for (const Entry& e : terms) total_weight += e.second;

    gamma.assign(k_count, alpha + total_weight / static_cast<double>(k_count));
    s.gamma_new.resize(k_count);
    s.exp_elog_theta.resize(k_count);
    s.phinorm.resize(terms.size());

    auto refresh_exp_elog_theta = [&] {
        dirichlet_expectation_row(gamma, s.exp_elog_theta);
        for (double& v : s.exp_elog_theta) v = std::exp(v);
    };
    auto compute_phinorms = [&] {
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::uint32_t w = terms[t].first;
            double acc = 0.0;
            for (std::size_t k = 0; k < k_count; ++k)
                acc += s.exp_elog_theta[k] * exp_elog_topics(k, w);
            s.phinorm[t] = acc + kPhinormFloor;
        }
    };

    refresh_exp_elog_theta();
    if (!terms.empty()) {
        for (std::size_t iter = 0; iter < max_iters; ++iter) {
            compute_phinorms();
            for (std::size_t k = 0; k < k_count; ++k) {
                double acc = 0.0;
                for (std::size_t t = 0; t < terms.size(); ++t)
                    acc += terms[t].second / s.phinorm[t] * exp_elog_topics(k, terms[t].first);
                s.gamma_new[k] = alpha + s.exp_elog_theta[k] * acc;
            }
            double change = 0.0;
            for (std::size_t k = 0; k < k_count; ++k)
                change += std::abs(s.gamma_new[k] - gamma[k]);
            gamma.swap(s.gamma_new);
            refresh_exp_elog_theta();
            if (change / static_cast<double>(k_count) < tol) break;
        }
    }

    if (contrib != nullptr || phinorm_out != nullptr) {
        // Recompute normalizers against the final gamma so responsibilities
        // sum to the term count exactly.
        compute_phinorms();
        if (phinorm_out != nullptr)
            std::copy(s.phinorm.begin(), s.phinorm.end(), phinorm_out);
        if (contrib != nullptr) {
            for (std::size_t t = 0; t < terms.size(); ++t) {
                const double scale = terms[t].second / s.phinorm[t];
                for (std::size_t k = 0; k < k_count; ++k)
                    contrib[t * k_count + k] =
                        scale * s.exp_elog_theta[k] * exp_elog_topics(k, terms[t].first);
            }
        }
    }
}

double doc_bound(std::span<const Entry> terms, std::span<const double> gamma,
                 std::span<const double> phinorm, double alpha) {
    const std::size_t k_count = gamma.size();
    double gamma_total = 0.0;
    for (double g : gamma) gamma_total += g;
    const double psi_total = digamma(gamma_total);

    double score = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t)
        score += terms[t].second * std::log(phinorm[t]);
    for (std::size_t k = 0; k < k_count; ++k) {
        const double elog = digamma(gamma[k]) - psi_total;
        score += (alpha - gamma[k]) * elog + std::lgamma(gamma[k]);
    }
    score -= std::lgamma(gamma_total);
    score += std::lgamma(alpha * static_cast<double>(k_count)) -
             static_cast<double>(k_count) * std::lgamma(alpha);
    return score;
}

double topics_bound(const Dense& lambda, double eta) {
    const std::size_t k_count = lambda.rows;
    const std::size_t m = lambda.cols;
    double score = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        double row_total = 0.0;
        for (double v : lambda.row(k)) row_total += v;
        const double psi_total = digamma(row_total);
        for (double v : lambda.row(k))
            score += (eta - v) * (digamma(v) - psi_total) + std::lgamma(v);
        score -= std::lgamma(row_total);
    }
    score += static_cast<double>(k_count) *
             (std::lgamma(eta * static_cast<double>(m)) -
              static_cast<double>(m) * std::lgamma(eta));
    return score;
}

void check_weights_finite(const ImageLabelMatrix& matrix) {
    for (std::size_t i = 0; i < matrix.row_count(); ++i)
        for (const auto& [j, v] : matrix.rows[i])
            if (!std::isfinite(v) || v < 0.0)
                throw Error(Errc::non_finite_weight,
                            "row " + std::to_string(i + 1) +
                                ": weights must be finite and >= 0");
}

Dense normalize_rows(const Dense& in) {
    Dense out(in.rows, in.cols);
    for (std::size_t r = 0; r < in.rows; ++r) {
        double total = 0.0;
        for (double v : in.row(r)) total += v;
        for (std::size_t c = 0; c < in.cols; ++c) out(r, c) = in(r, c) / total;
    }
    return out;
}

namespace {

struct BatchEStep {
    Dense gammas;                 // batch_docs x K
    std::vector<double> contrib;  // concatenated per-doc nnz x K blocks
    std::vector<double> phinorm;  // concatenated per-doc normalizers
    std::vector<std::size_t> contrib_offset; // per doc, into `contrib`
    std::vector<std::size_t> term_offset;    // per doc, into `phinorm`
};

// Runs the E-step over [begin, end). The parallel path computes exactly the
// same per-document values as the serial one (documents are independent);
// all cross-document reductions happen later, serially, in row order.
void run_batch_estep(const ImageLabelMatrix& matrix, std::size_t begin, std::size_t end,
                     const Dense& exp_elog_topics, double alpha, const VbConfig& vb,
                     Exec exec, BatchEStep& out) {
    const std::size_t docs = end - begin;
    const std::size_t k_count = exp_elog_topics.rows;

    out.gammas = Dense(docs, k_count);
    out.contrib_offset.assign(docs + 1, 0);
    out.term_offset.assign(docs + 1, 0);
    for (std::size_t d = 0; d < docs; ++d) {
        const std::size_t nnz = matrix.rows[begin + d].size();
        out.contrib_offset[d + 1] = out.contrib_offset[d] + nnz * k_count;
        out.term_offset[d + 1] = out.term_offset[d] + nnz;
    }
    out.contrib.assign(out.contrib_offset.back(), 0.0);
    out.phinorm.assign(out.term_offset.back(), 0.0);

    auto one_doc = [&](std::size_t d, EStepScratch& scratch, std::vector<double>& gamma) {
        const auto& row = matrix.rows[begin + d];
        doc_estep(row, exp_elog_topics, alpha, vb.doc_update_iters, vb.doc_convergence_tol,
                  gamma, scratch, out.contrib.data() + out.contrib_offset[d],
                  out.phinorm.data() + out.term_offset[d]);
        std::copy(gamma.begin(), gamma.end(), out.gammas.row(d).begin());
    };

    if (exec == Exec::parallel) {
#pragma omp parallel
        {
            EStepScratch scratch;
            std::vector<double> gamma;
#pragma omp for schedule(static)
            for (std::int64_t d = 0; d < static_cast<std::int64_t>(docs); ++d)
                one_doc(static_cast<std::size_t>(d), scratch, gamma);
        }
    } else {
        EStepScratch scratch;
        std::vector<double> gamma;
        for (std::size_t d = 0; d < docs; ++d) one_doc(d, scratch, gamma);
    }
}

} // namespace

TopicModel fit_vb_impl(const ImageLabelMatrix& matrix, const LdaConfig& config, Exec exec) {
    const std::size_t n = matrix.row_count();
    const std::size_t m = matrix.col_count();
    if (n == 0 || m == 0) throw Error(Errc::empty_corpus, "matrix is empty");
    if (matrix.nnz() == 0) throw Error(Errc::empty_corpus, "matrix has no nonzero row");
    check_weights_finite(matrix);

    const std::size_t k_count = config.k;
    const double eta = config.beta;
    const VbConfig& vb = config.vb;
    const std::size_t batch_size = std::clamp<std::size_t>(vb.batch_size, 1, n);

    // Random positive initialization of the global parameter, mean 1.
    Dense lambda(k_count, m);
    {
        RngEngine eng = make_engine(config.seed, "vb-init");
        std::gamma_distribution<double> init(100.0, 0.01);
        for (double& v : lambda.data) v = init(eng);
    }
    Dense exp_elog_beta(k_count, m);
    auto refresh_topics = [&] {
        for (std::size_t k = 0; k < k_count; ++k) {
            dirichlet_expectation_row(lambda.row(k), exp_elog_beta.row(k));
            for (double& v : exp_elog_beta.row(k)) v = std::exp(v);
        }
    };
    refresh_topics();

    std::vector<double> elbo_trace;
    Dense sstats(k_count, m);
    BatchEStep batch;
    std::size_t update = 0;

    for (std::size_t pass = 0; pass < vb.passes; ++pass) {
        for (std::size_t begin = 0; begin < n; begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, n);
            run_batch_estep(matrix, begin, end, exp_elog_beta, config.alpha, vb, exec, batch);

            // Sufficient statistics accumulate serially in row order, so the
            // result does not depend on the thread count.
            std::fill(sstats.data.begin(), sstats.data.end(), 0.0);
            for (std::size_t d = 0; d < end - begin; ++d) {
                const auto& row = matrix.rows[begin + d];
                const double* c = batch.contrib.data() + batch.contrib_offset[d];
                for (std::size_t t = 0; t < row.size(); ++t)
                    for (std::size_t k = 0; k < k_count; ++k)
                        sstats(k, row[t].first) += c[t * k_count + k];
            }

            const double rho =
                vb.unit_learning_rate
                    ? 1.0
                    : std::pow(vb.tau0 + static_cast<double>(update), -vb.kappa);
            const double scale =
                static_cast<double>(n) / static_cast<double>(end - begin);
            for (std::size_t idx = 0; idx < lambda.data.size(); ++idx)
                lambda.data[idx] = (1.0 - rho) * lambda.data[idx] +
                                   rho * (eta + scale * sstats.data[idx]);
            refresh_topics();
            ++update;

            // Bound estimate for the trace: batch documents re-scored against
            // the updated topics, extrapolated to the whole corpus.
            {
                const std::size_t docs = end - begin;
                std::vector<double> doc_scores(docs, 0.0);
                std::vector<double> gamma(k_count);
                EStepScratch scratch;
                for (std::size_t d = 0; d < docs; ++d) {
                    const auto& row = matrix.rows[begin + d];
                    std::copy(batch.gammas.row(d).begin(), batch.gammas.row(d).end(),
                              gamma.begin());
                    scratch.exp_elog_theta.resize(k_count);
                    dirichlet_expectation_row(gamma, scratch.exp_elog_theta);
                    for (double& v : scratch.exp_elog_theta) v = std::exp(v);
                    scratch.phinorm.resize(row.size());
                    for (std::size_t t = 0; t < row.size(); ++t) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k < k_count; ++k)
                            acc += scratch.exp_elog_theta[k] * exp_elog_beta(k, row[t].first);
                        scratch.phinorm[t] = acc + kPhinormFloor;
                    }
                    doc_scores[d] = doc_bound(row, gamma, scratch.phinorm, config.alpha);
                }
                double doc_total = 0.0;
                for (double v : doc_scores) doc_total += v;
                elbo_trace.push_back(doc_total * scale + topics_bound(lambda, eta));
            }
        }
    }

    TopicModel model;
    model.config = config;
    model.vocab_hash = matrix.vocab ? matrix.vocab->hash() : 0;
    model.phi = normalize_rows(lambda);
    model.elbo_trace = std::move(elbo_trace);

    // Final per-image mixtures: fold the corpus in against the point
    // estimate of phi, the same computation `project` runs.
    Dense log_phi(k_count, m);
    for (std::size_t idx = 0; idx < model.phi.data.size(); ++idx)
        log_phi.data[idx] = std::log(model.phi.data[idx]);
    model.theta = normalize_rows(infer_gamma(matrix, log_phi, config.alpha, vb, exec));
    return model;
}

Dense infer_gamma(const ImageLabelMatrix& matrix, const Dense& log_topics, double alpha,
                  const VbConfig& vb, Exec exec) {
    const std::size_t n = matrix.row_count();
    const std::size_t k_count = log_topics.rows;
    Dense exp_topics(k_count, log_topics.cols);
    for (std::size_t idx = 0; idx < log_topics.data.size(); ++idx)
        exp_topics.data[idx] = std::exp(log_topics.data[idx]);

    Dense gammas(n, k_count);
    auto one_doc = [&](std::size_t i, EStepScratch& scratch, std::vector<double>& gamma) {
        doc_estep(matrix.rows[i], exp_topics, alpha, vb.doc_update_iters,
                  vb.doc_convergence_tol, gamma, scratch, nullptr, nullptr);
        std::copy(gamma.begin(), gamma.end(), gammas.row(i).begin());
    };
    if (exec == Exec::parallel) {
#pragma omp parallel
        {
            EStepScratch scratch;
            std::vector<double> gamma;
#pragma omp for schedule(static)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
                one_doc(static_cast<std::size_t>(i), scratch, gamma);
        }
    } else {
        EStepScratch scratch;
        std::vector<double> gamma;
        for (std::size_t i = 0; i < n; ++i) one_doc(i, scratch, gamma);
    }
    return gammas;
}

} // namespace detail

TopicModel fit_vb(const ImageLabelMatrix& matrix, const LdaConfig& config, Exec exec) {
    config.validate();
    return detail::fit_vb_impl(matrix, config, exec);
}

Dense project(const TopicModel& model, const ImageLabelMatrix& matrix, Exec exec) {
    if (matrix.vocab && matrix.vocab->hash() != model.vocab_hash)
        throw Error(Errc::vocabulary_mismatch, "matrix vocabulary differs from the model's");
    if (matrix.col_count() != model.phi.cols)
        throw Error(Errc::vocabulary_mismatch,
                    "matrix has " + std::to_string(matrix.col_count()) +
                        " columns, model expects " + std::to_string(model.phi.cols));
    detail::check_weights_finite(matrix);

    Dense log_phi(model.phi.rows, model.phi.cols);
    for (std::size_t idx = 0; idx < model.phi.data.size(); ++idx)
        log_phi.data[idx] = std::log(model.phi.data[idx]);
    return detail::normalize_rows(
        detail::infer_gamma(matrix, log_phi, model.config.alpha, model.config.vb, exec));
}

std::vector<LikelihoodRow> log_likelihood_report(const ImageLabelMatrix& matrix,
                                                 const LdaConfig& config,
                                                 std::span<const std::size_t> k_values,
                                                 Exec exec) {
    if (k_values.empty()) throw Error(Errc::invalid_config, "k_values is empty");
    const std::size_t n = matrix.row_count();
    if (n < 2) throw Error(Errc::empty_corpus, "need at least 2 rows for a held-out split");
    detail::check_weights_finite(matrix);

    std::vector<std::size_t> ks(k_values.begin(), k_values.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (std::size_t k : ks)
        if (k < 1) throw Error(Errc::invalid_config, "k must be >= 1");

    // Deterministic 90/10 split: Fisher-Yates under the derived seed, then
    // both halves restored to row order.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngEngine eng = make_engine(config.seed, "likelihood-split");
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(eng() % (i + 1));
        std::swap(order[i], order[j]);
    }
    const std::size_t heldout_count = std::max<std::size_t>(1, n / 10);
    std::vector<std::size_t> heldout(order.begin(), order.begin() + heldout_count);
    std::vector<std::size_t> train(order.begin() + heldout_count, order.end());
    std::sort(heldout.begin(), heldout.end());
    std::sort(train.begin(), train.end());

    auto take_rows = [&](std::span<const std::size_t> idx) {
        ImageLabelMatrix sub;
        sub.vocab = matrix.vocab;
        sub.mode = matrix.mode;
        sub.rows.reserve(idx.size());
        sub.row_meta.reserve(idx.size());
        for (std::size_t i : idx) {
            sub.rows.push_back(matrix.rows[i]);
            sub.row_meta.push_back(matrix.row_meta.empty() ? RowMeta{} : matrix.row_meta[i]);
        }
        return sub;
    };
    const ImageLabelMatrix train_matrix = take_rows(train);
    const ImageLabelMatrix heldout_matrix = take_rows(heldout);
    if (train_matrix.nnz() == 0 || heldout_matrix.nnz() == 0)
        throw Error(Errc::empty_corpus, "split produced an empty side");

    const bool alpha_is_default =
        config.alpha == 50.0 / static_cast<double>(config.k);

    std::vector<LikelihoodRow> rows;
    for (std::size_t k : ks) {
        LdaConfig cfg = config;
        cfg.k = k;
        if (alpha_is_default) cfg.alpha = 50.0 / static_cast<double>(k);
        TopicModel model = detail::fit_vb_impl(train_matrix, cfg, exec);

        Dense log_phi(model.phi.rows, model.phi.cols);
        for (std::size_t idx = 0; idx < model.phi.data.size(); ++idx)
            log_phi.data[idx] = std::log(model.phi.data[idx]);
        Dense gammas =
            detail::infer_gamma(heldout_matrix, log_phi, cfg.alpha, cfg.vb, exec);

        Dense exp_topics = model.phi; // exp(log phi)
        double total_bound = 0.0;
        double total_tokens = 0.0;
        std::vector<double> exp_elog_theta(k);
        std::vector<double> phinorm;
        for (std::size_t d = 0; d < heldout_matrix.row_count(); ++d) {
            const auto& row = heldout_matrix.rows[d];
            detail::dirichlet_expectation_row(gammas.row(d), exp_elog_theta);
            for (double& v : exp_elog_theta) v = std::exp(v);
            phinorm.resize(row.size());
            for (std::size_t t = 0; t < row.size(); ++t) {
                double acc = 0.0;
                for (std::size_t kk = 0; kk < k; ++kk)
                    acc += exp_elog_theta[kk] * exp_topics(kk, row[t].first);
                phinorm[t] = acc + 1e-100;
            }
            total_bound += detail::doc_bound(row, gammas.row(d), phinorm, cfg.alpha);
            for (const auto& e : row) total_tokens += e.second;
        }
        rows.push_back({k, total_bound / total_tokens});
    }
    return rows;
}

} // namespace bolw
