#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bolw/lda.hpp"
#include "test_support.hpp"

using namespace bolw;
using namespace testsupport;

namespace {

Vocabulary synthetic_vocab(std::size_t m) {
    Vocabulary vocab;
    char name[16];
    for (std::size_t j = 0; j < m; ++j) {
        std::snprintf(name, sizeof name, "w%04zu", j);
        vocab.words.push_back({Service::ls1, name});
        vocab.doc_count.push_back(1);
    }
    vocab.total_images = 1;
    return vocab;
}

ImageLabelMatrix matrix_of(const std::vector<BagOfLabelWords>& bags,
                           std::shared_ptr<const Vocabulary> vocab) {
    std::vector<RowMeta> meta;
    for (std::size_t i = 0; i < bags.size(); ++i)
        meta.push_back({"img-" + std::to_string(i), "cam-" + std::to_string(i % 2),
                        static_cast<std::int64_t>(i) * 900});
    return matrix_from_bags(bags, std::move(meta), std::move(vocab));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

// Greedy max-similarity assignment between fitted and true topic rows;
// returns the per-pair cosines.
std::vector<double> greedy_match(const Dense& fitted, const Dense& truth) {
    const std::size_t k = fitted.rows;
    std::vector<std::vector<double>> sim(k, std::vector<double>(k));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) sim[a][b] = cosine(fitted.row(a), truth.row(b));
    std::vector<bool> used_a(k, false), used_b(k, false);
    std::vector<double> scores;
    for (std::size_t pick = 0; pick < k; ++pick) {
        double best = -2.0;
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < k; ++a) {
            if (used_a[a]) continue;
            for (std::size_t b = 0; b < k; ++b) {
                if (used_b[b]) continue;
                if (sim[a][b] > best) {
                    best = sim[a][b];
                    ba = a;
                    bb = b;
                }
            }
        }
        used_a[ba] = used_b[bb] = true;
        scores.push_back(best);
    }
    return scores;
}

void check_row_stochastic(const Dense& mat, double tol = 1e-8) {
    for (std::size_t r = 0; r < mat.rows; ++r) {
        double total = 0.0;
        for (double v : mat.row(r)) {
            CHECK(v > 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(tol));
    }
}

} // namespace

TEST_CASE("LdaConfig defaults use the standard priors") {
    LdaConfig cfg = LdaConfig::defaults(10);
    CHECK(cfg.alpha == 5.0); // 50/K with K = 10
    CHECK(cfg.beta == 0.1);
    CHECK(cfg.k == 10);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("LdaConfig validation enforces the invariants") {
    CHECK(code_of([] { LdaConfig::defaults(1).validate(); }) == Errc::invalid_config);
    LdaConfig bad = LdaConfig::defaults(4);
    bad.vb.kappa = 0.5; // boundary excluded
    CHECK(code_of([&] { bad.validate(); }) == Errc::invalid_config);
    bad.vb.kappa = 1.0;
    CHECK_NOTHROW(bad.validate());
    bad.alpha = 0.0;
    CHECK(code_of([&] { bad.validate(); }) == Errc::invalid_config);
    bad = LdaConfig::defaults(4);
    bad.vb.tau0 = -1.0;
    CHECK(code_of([&] { bad.validate(); }) == Errc::invalid_config);
}

TEST_CASE("single-document corpus stays normalized with a finite bound") {
    auto vocab = std::make_shared<Vocabulary>(synthetic_vocab(6));
    BagOfLabelWords bag;
    bag.entries = {{0u, 1.0}, {3u, 1.0}, {5u, 1.0}};
    bag.weight = 3.0;
    LdaConfig cfg = LdaConfig::defaults(2, 5);
    TopicModel model = fit_vb(matrix_of({bag}, vocab), cfg);

    check_row_stochastic(model.theta);
    check_row_stochastic(model.phi);
    REQUIRE(!model.elbo_trace.empty());
    for (double v : model.elbo_trace) CHECK(std::isfinite(v));
}

TEST_CASE("fit_vb rejects empty and non-finite input") {
    auto vocab = std::make_shared<Vocabulary>(synthetic_vocab(4));
    LdaConfig cfg = LdaConfig::defaults(2, 1);

    ImageLabelMatrix empty;
    empty.vocab = vocab;
    CHECK(code_of([&] { fit_vb(empty, cfg); }) == Errc::empty_corpus);

    // rows exist but carry no entries
    CHECK(code_of([&] { fit_vb(matrix_of({BagOfLabelWords{}}, vocab), cfg); }) ==
          Errc::empty_corpus);

    BagOfLabelWords bad;
    bad.entries = {{0u, std::numeric_limits<double>::quiet_NaN()}};
    bad.weight = 0.0;
    CHECK(code_of([&] { fit_vb(matrix_of({bad}, vocab), cfg); }) == Errc::non_finite_weight);
}

TEST_CASE("config echo keeps the resolved alpha") {
    auto vocab = std::make_shared<Vocabulary>(synthetic_vocab(8));
    LdaConfig cfg = LdaConfig::defaults(10, 3); // alpha = 50/10 = 5
    std::vector<BagOfLabelWords> bags;
    for (std::size_t i = 0; i < 12; ++i) {
        BagOfLabelWords bag;
        bag.entries = {{static_cast<std::uint32_t>(i % 8), 1.0}};
        bag.weight = 1.0;
        bags.push_back(bag);
    }
    TopicModel model = fit_vb(matrix_of(bags, vocab), cfg);
    CHECK(model.config.alpha == 5.0);
    CHECK(model.config.k == 10);
}

TEST_CASE("topic recovery on a well-separated simulated corpus") {
    // Sparse mixtures (small alpha) plus concentrated topics (small beta)
    // give documents that identify their topics.
    Vocabulary vocab = synthetic_vocab(50);
    LdaConfig cfg = LdaConfig::defaults(3, 11);
    cfg.alpha = 0.3;
    cfg.beta = 0.01;
    auto sim = simulate_corpus(cfg, std::vector<double>(500, 50.0), vocab);

    auto shared = std::make_shared<Vocabulary>(vocab);
    LdaConfig fit_cfg = LdaConfig::defaults(3, 17);
    fit_cfg.alpha = 0.5;
    fit_cfg.beta = 0.01;
    TopicModel model = fit_vb(matrix_of(sim.bags, shared), fit_cfg);

    auto scores = greedy_match(model.phi, sim.true_phi);
    REQUIRE(scores.size() == 3);
    for (double s : scores) CHECK(s >= 0.9);
    check_row_stochastic(model.phi);
    check_row_stochastic(model.theta);
}

TEST_CASE("full-batch unit-rate ELBO never decreases") {
    Vocabulary vocab = synthetic_vocab(30);
    LdaConfig cfg = LdaConfig::defaults(3, 13);
    cfg.beta = 0.05;
    auto sim = simulate_corpus(cfg, std::vector<double>(120, 25.0), vocab);

    LdaConfig fit_cfg = LdaConfig::defaults(3, 7);
    fit_cfg.vb.batch_size = 120;
    fit_cfg.vb.unit_learning_rate = true;
    fit_cfg.vb.passes = 30;
    fit_cfg.vb.doc_update_iters = 200;
    fit_cfg.vb.doc_convergence_tol = 1e-8;
    TopicModel model = fit_vb(matrix_of(sim.bags, std::make_shared<Vocabulary>(vocab)),
                              fit_cfg);

    REQUIRE(model.elbo_trace.size() == 30);
    for (std::size_t p = 1; p < model.elbo_trace.size(); ++p) {
        const double prev = model.elbo_trace[p - 1];
        const double cur = model.elbo_trace[p];
        CHECK(cur >= prev - 1e-6 * std::abs(prev));
    }
}

TEST_CASE("fits are bit-identical across runs and thread counts") {
    Vocabulary vocab = synthetic_vocab(25);
    LdaConfig cfg = LdaConfig::defaults(4, 19);
    auto sim = simulate_corpus(cfg, std::vector<double>(80, 15.0), vocab);
    auto shared = std::make_shared<Vocabulary>(vocab);
    ImageLabelMatrix matrix = matrix_of(sim.bags, shared);

    LdaConfig fit_cfg = LdaConfig::defaults(4, 23);
    TopicModel a = fit_vb(matrix, fit_cfg, Exec::parallel);
    TopicModel b = fit_vb(matrix, fit_cfg, Exec::parallel);
    TopicModel serial = fit_vb(matrix, fit_cfg, Exec::serial);

    CHECK(a.phi == b.phi);
    CHECK(a.theta == b.theta);
    CHECK(a.elbo_trace == b.elbo_trace);
    // The parallel E-step caches per-document statistics and reduces them
    // serially in row order, so it matches the serial reference bit for bit.
    CHECK(a.phi == serial.phi);
    CHECK(a.theta == serial.theta);
    CHECK(a.elbo_trace == serial.elbo_trace);

    LdaConfig reseeded = fit_cfg;
    reseeded.seed = 24;
    TopicModel c = fit_vb(matrix, reseeded);
    CHECK(a.phi.data != c.phi.data);
}

TEST_CASE("projecting the training matrix reproduces the trained theta") {
    Vocabulary vocab = synthetic_vocab(20);
    LdaConfig cfg = LdaConfig::defaults(3, 29);
    cfg.beta = 0.02;
    auto sim = simulate_corpus(cfg, std::vector<double>(60, 20.0), vocab);
    auto shared = std::make_shared<Vocabulary>(vocab);
    ImageLabelMatrix matrix = matrix_of(sim.bags, shared);

    LdaConfig fit_cfg = LdaConfig::defaults(3, 31);
    TopicModel model = fit_vb(matrix, fit_cfg);
    Dense projected = project(model, matrix);
    REQUIRE(projected.rows == model.theta.rows);
    for (std::size_t i = 0; i < projected.rows; ++i)
        for (std::size_t k = 0; k < projected.cols; ++k)
            CHECK(projected(i, k) == doctest::Approx(model.theta(i, k)).epsilon(1e-3));
}

TEST_CASE("projecting an empty row yields the uniform prior mixture") {
    auto vocab = std::make_shared<Vocabulary>(synthetic_vocab(10));
    BagOfLabelWords full;
    full.entries = {{0u, 2.0}, {4u, 1.0}};
    full.weight = 3.0;
    LdaConfig cfg = LdaConfig::defaults(4, 37);
    TopicModel model = fit_vb(matrix_of({full, full}, vocab), cfg);

    Dense projected = project(model, matrix_of({BagOfLabelWords{}}, vocab));
    REQUIRE(projected.rows == 1);
    for (std::size_t k = 0; k < 4; ++k) CHECK(projected(0, k) == doctest::Approx(0.25));
}

TEST_CASE("project rejects a mismatched vocabulary") {
    auto vocab_a = std::make_shared<Vocabulary>(synthetic_vocab(10));
    auto vocab_b = std::make_shared<Vocabulary>(synthetic_vocab(12));
    BagOfLabelWords bag;
    bag.entries = {{1u, 1.0}};
    bag.weight = 1.0;
    TopicModel model = fit_vb(matrix_of({bag, bag}, vocab_a), LdaConfig::defaults(2, 1));
    CHECK(code_of([&] { project(model, matrix_of({bag}, vocab_b)); }) ==
          Errc::vocabulary_mismatch);
}

TEST_CASE("doubling a row's weights keeps the dominant topic") {
    Vocabulary vocab = synthetic_vocab(30);
    LdaConfig cfg = LdaConfig::defaults(3, 41);
    cfg.alpha = 0.2; // concentrated mixtures so single topics dominate
    cfg.beta = 0.01;
    auto sim = simulate_corpus(cfg, std::vector<double>(100, 30.0), vocab);
    auto shared = std::make_shared<Vocabulary>(vocab);
    ImageLabelMatrix matrix = matrix_of(sim.bags, shared);
    LdaConfig fit_cfg = cfg;
    fit_cfg.seed = 43;
    TopicModel model = fit_vb(matrix, fit_cfg);

    ImageLabelMatrix doubled = matrix;
    for (auto& row : doubled.rows)
        for (auto& e : row) e.second *= 2.0;
    Dense base = project(model, matrix);
    Dense scaled = project(model, doubled);

    int checked = 0;
    for (std::size_t i = 0; i < base.rows; ++i) {
        const auto row = base.row(i);
        const std::size_t argmax =
            std::max_element(row.begin(), row.end()) - row.begin();
        if (row[argmax] <= 0.6) continue;
        const auto srow = scaled.row(i);
        CHECK(static_cast<std::size_t>(std::max_element(srow.begin(), srow.end()) -
                                       srow.begin()) == argmax);
        ++checked;
    }
    CHECK(checked > 10); // the corpus must actually exercise the property
}

TEST_CASE("held-out likelihood prefers the true topic count over K=1") {
    Vocabulary vocab = synthetic_vocab(40);
    LdaConfig cfg = LdaConfig::defaults(3, 47);
    cfg.beta = 0.01;
    auto sim = simulate_corpus(cfg, std::vector<double>(300, 40.0), vocab);
    ImageLabelMatrix matrix = matrix_of(sim.bags, std::make_shared<Vocabulary>(vocab));

    LdaConfig survey = LdaConfig::defaults(3, 53);
    survey.beta = 0.01;
    const std::size_t ks[] = {3, 1, 3}; // duplicates collapse
    auto rows = log_likelihood_report(matrix, survey, ks);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].k == 1);
    CHECK(rows[1].k == 3);
    CHECK(rows[1].heldout_log_likelihood_per_token >=
          rows[0].heldout_log_likelihood_per_token);

    const std::size_t single[] = {2};
    CHECK(log_likelihood_report(matrix, survey, single).size() == 1);
}

TEST_CASE("top_labels orders by probability with index tie-breaks") {
    TopicModel model;
    model.config = LdaConfig::defaults(2);
    model.phi = Dense(2, 5);
    model.phi.data = {0.1, 0.4, 0.1, 0.3, 0.1,   // ties at 0.1: indices 0,2,4
                      0.2, 0.2, 0.2, 0.2, 0.2};  // all tied
    model.theta = Dense(1, 2, 0.5);

    TopicReport report = top_labels(model, 5);
    REQUIRE(report.topics.size() == 2);
    std::vector<std::size_t> order0;
    for (const auto& e : report.topics[0]) order0.push_back(e.label_index);
    CHECK(order0 == std::vector<std::size_t>{1, 3, 0, 2, 4});
    std::vector<std::size_t> order1;
    for (const auto& e : report.topics[1]) order1.push_back(e.label_index);
    CHECK(order1 == std::vector<std::size_t>{0, 1, 2, 3, 4});

    // n larger than M clamps to the full ordering
    CHECK(top_labels(model, 50).topics[0].size() == 5);
    CHECK(top_labels(model, 2).topics[0].size() == 2);
}

TEST_CASE("top labels of a recovered topic contain its true anchors") {
    Vocabulary vocab = synthetic_vocab(50);
    LdaConfig cfg = LdaConfig::defaults(3, 59);
    cfg.beta = 0.01;
    auto sim = simulate_corpus(cfg, std::vector<double>(400, 50.0), vocab);
    LdaConfig fit_cfg = LdaConfig::defaults(3, 61);
    fit_cfg.beta = 0.01;
    TopicModel model =
        fit_vb(matrix_of(sim.bags, std::make_shared<Vocabulary>(vocab)), fit_cfg);

    // For each true topic, find the fitted topic with max cosine and check
    // the true top-2 words appear in the fitted top-5.
    TopicReport report = top_labels(model, 5);
    for (std::size_t zt = 0; zt < 3; ++zt) {
        double best = -1.0;
        std::size_t match = 0;
        for (std::size_t zf = 0; zf < 3; ++zf) {
            const double c = cosine(model.phi.row(zf), sim.true_phi.row(zt));
            if (c > best) {
                best = c;
                match = zf;
            }
        }
        std::vector<std::size_t> true_order(vocab.size());
        std::iota(true_order.begin(), true_order.end(), 0u);
        std::partial_sort(true_order.begin(), true_order.begin() + 2, true_order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return sim.true_phi(zt, a) > sim.true_phi(zt, b);
                          });
        for (std::size_t t = 0; t < 2; ++t) {
            bool found = false;
            for (const auto& e : report.topics[match])
                if (e.label_index == true_order[t]) found = true;
            CHECK(found);
        }
    }
}
