#pragma once

// Internals shared by the variational and Gibbs estimators. Not installed.

#include <cstdint>
#include <span>
#include <vector>

#include "bolw/dense.hpp"
#include "bolw/exec.hpp"
#include "bolw/lda.hpp"
#include "bolw/weighting.hpp"

namespace bolw::detail {

using Entry = std::pair<std::uint32_t, double>;

/// E[log theta] for a Dirichlet(gamma) row: psi(gamma_k) - psi(sum gamma).
void dirichlet_expectation_row(std::span<const double> gamma, std::span<double> out);

struct EStepScratch {
    std::vector<double> gamma_new;
    std::vector<double> exp_elog_theta;
    std::vector<double> phinorm;
};

// One document's variational update against a fixed K x M log-topic matrix
// (digamma form during training, log phi when folding in). `exp_elog_topics`
// must be the elementwise exp of that matrix. On return `gamma` holds the
// converged per-document parameter. When `contrib` is non-null it receives
// nnz x K responsibilities scaled by the term counts, laid out term-major,
// recomputed self-consistently from the final gamma; `phinorm_out` (same
// condition) receives the final per-term normalizers.
void doc_estep(std::span<const Entry> terms, const Dense& exp_elog_topics, double alpha,
               std::size_t max_iters, double tol, std::vector<double>& gamma,
               EStepScratch& scratch, double* contrib, double* phinorm_out);

/// Per-document part of the variational bound, given the converged gamma
/// and the per-term normalizers from doc_estep.
double doc_bound(std::span<const Entry> terms, std::span<const double> gamma,
                 std::span<const double> phinorm, double alpha);

/// Topic part of the bound for the global parameter lambda with symmetric
/// prior eta.
double topics_bound(const Dense& lambda, double eta);

/// gamma rows for every matrix row with topics held fixed. `log_topics`
/// = log phi (point estimates). Deterministic for any thread count.
Dense infer_gamma(const ImageLabelMatrix& matrix, const Dense& log_topics, double alpha,
                  const VbConfig& vb, Exec exec);

/// fit_vb without the public config validation (the likelihood survey runs
/// K = 1, which LdaConfig::validate rejects).
TopicModel fit_vb_impl(const ImageLabelMatrix& matrix, const LdaConfig& config, Exec exec);

void check_weights_finite(const ImageLabelMatrix& matrix);

Dense normalize_rows(const Dense& in);

} // namespace bolw::detail
