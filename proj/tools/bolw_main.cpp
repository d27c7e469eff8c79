// Command-line front end for the BoLW pipeline:
//   ingest   label-record JSONL -> corpus artifact (matrix + vocabulary)
//   fit      corpus artifact -> topic model + report + ELBO trace
//   series   model + corpus -> binned per-camera series (CSV/SVG)
//   simulate generative sampler -> synthetic corpus artifact + ground truth
//   likelihood  per-K held-out likelihood survey
//
// Exit codes: 0 success, 1 user error, 2 data error, 3 internal error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bolw/corpus.hpp"
#include "bolw/errors.hpp"
#include "bolw/hash.hpp"
#include "bolw/lda.hpp"
#include "bolw/model_io.hpp"
#include "bolw/pipeline.hpp"
#include "bolw/textio.hpp"
#include "bolw/timeseries.hpp"
#include "bolw/timeutil.hpp"
#include "bolw/weighting.hpp"

namespace fs = std::filesystem;
using namespace bolw;

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::invalid_config:
        case Errc::file_not_found:
        case Errc::index_out_of_range:
        case Errc::incompatible_bin_width:
            return 1;
        case Errc::io_error:
            return 3;
        default:
            return 2;
    }
}

std::string slug(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(c);
        else if (!out.empty() && out.back() != '-')
            out.push_back('-');
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool strict_given = false;
};

PipelineConfig resolve_config(const CommonArgs& args) {
    PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = PipelineConfig::load_ini(args.config_path);
    if (args.seed_given) {
        cfg.seed = args.seed;
        cfg.lda.seed = args.seed;
    }
    if (args.strict_given) cfg.strict = true;
    return cfg;
}

fs::path require_out(const CommonArgs& args) {
    if (args.out_dir.empty())
        throw Error(Errc::invalid_config, "--out is required for this command");
    fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + dir.string());
    return dir;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string input;
    std::optional<double> cutoff;
    std::vector<std::string> blacklist;
    std::optional<std::string> mode;
};

int run_ingest(const CommonArgs& common, const IngestArgs& args) {
    PipelineConfig cfg = resolve_config(common);
    if (args.cutoff) cfg.frequency_cutoff = *args.cutoff;
    if (!args.blacklist.empty()) cfg.blacklist = args.blacklist;
    if (args.mode) {
        auto mode = weighting_mode_from_string(*args.mode);
        if (!mode || *mode == WeightingMode::counts)
            throw Error(Errc::invalid_config, "unknown weighting mode: " + *args.mode);
        cfg.weighting_mode = *mode;
    }
    const fs::path out = require_out(common);

    IngestResult ingested = ingest_label_records(args.input, {.strict = cfg.strict});
    {
        std::ofstream report(out / "ingest_report.txt", std::ios::binary);
        for (const IngestIssue& issue : ingested.issues)
            report << issue.reason << '\n';
    }
    if (!ingested.issues.empty())
        std::cerr << "ingest: skipped " << ingested.issues.size()
                  << " record(s), see ingest_report.txt\n";

    std::vector<ImageRecord> records = binarize(std::move(ingested.records));
    Vocabulary vocab = build_vocabulary(records, cfg.blacklist);
    vocab = frequency_filter(vocab, cfg.frequency_cutoff);
    std::vector<BagOfLabelWords> bags = to_bags(records, vocab);

    std::vector<RowMeta> meta;
    meta.reserve(records.size());
    for (const ImageRecord& rec : records)
        meta.push_back({rec.image_id, rec.camera, rec.timestamp});

    ImageLabelMatrix matrix =
        build_matrix(bags, std::move(meta), std::make_shared<Vocabulary>(std::move(vocab)),
                     cfg.weighting_mode);
    write_corpus_artifact(matrix, out);

    char hash_buf[32];
    std::snprintf(hash_buf, sizeof hash_buf, "0x%016llx",
                  static_cast<unsigned long long>(hash_file(args.input)));
    cfg.write_ini(out / "resolved_config.ini", {{"labels", hash_buf}});

    std::cout << "ingest: " << matrix.row_count() << " images, "
              << matrix.col_count() << " words, " << matrix.nnz() << " entries ("
              << to_string(matrix.mode) << ")\n";
    return 0;
}

// ------------------------------------------------------------------- fit

struct FitArgs {
    std::string corpus_dir;
    std::optional<std::size_t> k;
    std::optional<double> alpha;
    std::optional<double> beta;
    bool use_gibbs = false;
    std::optional<std::size_t> batch_size;
    std::optional<double> kappa;
    std::optional<double> tau0;
    std::optional<std::size_t> passes;
    std::optional<std::size_t> gibbs_iterations;
    std::optional<std::size_t> gibbs_burn_in;
};

void apply_fit_overrides(PipelineConfig& cfg, const FitArgs& args) {
    if (args.k) {
        cfg.lda.k = *args.k;
        if (!cfg.alpha_explicit && !args.alpha)
            cfg.lda.alpha = 50.0 / static_cast<double>(*args.k);
    }
    if (args.alpha) {
        cfg.lda.alpha = *args.alpha;
        cfg.alpha_explicit = true;
    }
    if (args.beta) cfg.lda.beta = *args.beta;
    if (args.batch_size) cfg.lda.vb.batch_size = *args.batch_size;
    if (args.kappa) cfg.lda.vb.kappa = *args.kappa;
    if (args.tau0) cfg.lda.vb.tau0 = *args.tau0;
    if (args.passes) cfg.lda.vb.passes = *args.passes;
    if (args.gibbs_iterations) cfg.lda.gibbs.iterations = *args.gibbs_iterations;
    if (args.gibbs_burn_in) cfg.lda.gibbs.burn_in = *args.gibbs_burn_in;
}

int run_fit(const CommonArgs& common, const FitArgs& args) {
    PipelineConfig cfg = resolve_config(common);
    apply_fit_overrides(cfg, args);
    const fs::path out = require_out(common);

    CorpusArtifact corpus = read_corpus_artifact(args.corpus_dir);
    TopicModel model = args.use_gibbs ? fit_gibbs(corpus.matrix, cfg.lda)
                                      : fit_vb(corpus.matrix, cfg.lda);

    save_model(model, out / "model.bin");
    write_topic_report_csv(top_labels(model, 10), *corpus.matrix.vocab,
                           out / "topic_report.csv");
    write_elbo_csv(model.elbo_trace, out / "elbo.csv");
    cfg.write_ini(out / "resolved_config.ini");

    std::cout << "fit: " << (args.use_gibbs ? "gibbs" : "vb") << ", K=" << model.config.k
              << ", alpha=" << format_double(model.config.alpha)
              << ", beta=" << format_double(model.config.beta) << ", "
              << corpus.matrix.row_count() << " images\n";
    return 0;
}

// ---------------------------------------------------------------- series

struct SeriesArgs {
    std::string corpus_dir;
    std::string model_path;
    std::vector<std::size_t> topics; // 1-based
    std::vector<std::string> labels; // rendered form, e.g. "LS1: snow"
    bool weekly = false;
    std::vector<std::string> highlights;
    std::optional<std::int64_t> bin_width_minutes;
    std::optional<std::int64_t> utc_offset_minutes;
};

std::size_t label_index_or_throw(const Vocabulary& vocab, const std::string& rendered) {
    const auto colon = rendered.find(": ");
    std::optional<Service> service;
    if (colon != std::string::npos)
        service = service_from_string(rendered.substr(0, colon));
    if (!service)
        throw Error(Errc::invalid_config,
                    "label must be given as \"LS1: text\" or \"LS2: text\": " + rendered);
    auto idx = vocab.index_of(LabelWord{*service, rendered.substr(colon + 2)});
    if (!idx)
        throw Error(Errc::index_out_of_range, "label not in vocabulary: " + rendered);
    return *idx;
}

int run_series(const CommonArgs& common, const SeriesArgs& args, CLI::App* sub) {
    if (args.topics.empty() && args.labels.empty()) {
        std::cerr << "series: give at least one --topic or --label\n"
                  << sub->help() << '\n';
        return 1;
    }
    PipelineConfig cfg = resolve_config(common);
    if (args.bin_width_minutes) cfg.bin_width_seconds = *args.bin_width_minutes * 60;
    if (args.utc_offset_minutes) cfg.utc_offset_seconds = *args.utc_offset_minutes * 60;
    const fs::path out = require_out(common);

    std::vector<std::int64_t> highlight_dates;
    for (const std::string& h : args.highlights) {
        auto ts = parse_utc(h);
        if (!ts) throw Error(Errc::invalid_config, "bad --highlight date: " + h);
        highlight_dates.push_back(*ts);
    }

    CorpusArtifact corpus = read_corpus_artifact(args.corpus_dir);
    TopicModel model = load_model(args.model_path);
    if (model.vocab_hash != corpus.matrix.vocab->hash())
        throw Error(Errc::vocabulary_mismatch,
                    "model was fitted on a different vocabulary than the corpus");

    // Reuse the stored mixtures when the corpus is the training corpus;
    // otherwise fold the rows in against the fitted topics.
    Dense theta = model.theta.rows == corpus.matrix.row_count()
                      ? model.theta
                      : project(model, corpus.matrix);

    auto emit = [&](const std::vector<TopicSeries>& series, const std::string& key_slug) {
        export_series(series, out / ("series_" + key_slug + ".csv"), ExportFormat::csv,
                      cfg.utc_offset_seconds);
        export_series(series, out / ("series_" + key_slug + ".svg"), ExportFormat::svg_plot,
                      cfg.utc_offset_seconds);
        if (args.weekly) {
            std::vector<WeeklyOverlay> overlays;
            overlays.reserve(series.size());
            for (const TopicSeries& s : series)
                overlays.push_back(weekly_overlay(s, highlight_dates));
            export_overlay(overlays, out / ("overlay_" + key_slug + ".csv"),
                           ExportFormat::csv);
            export_overlay(overlays, out / ("overlay_" + key_slug + ".svg"),
                           ExportFormat::svg_plot);
        }
    };

    for (std::size_t topic : args.topics) {
        if (topic < 1 || topic > model.config.k)
            throw Error(Errc::index_out_of_range,
                        "--topic " + std::to_string(topic) + " outside 1.." +
                            std::to_string(model.config.k));
        emit(topic_series(theta, corpus.matrix.row_meta, topic - 1, cfg.bin_width_seconds),
             "topic-" + std::to_string(topic));
    }
    for (const std::string& label : args.labels) {
        const std::size_t j = label_index_or_throw(*corpus.matrix.vocab, label);
        emit(label_series(corpus.matrix, j, cfg.bin_width_seconds), "label-" + slug(label));
    }

    cfg.write_ini(out / "resolved_config.ini");
    std::cout << "series: wrote " << (args.topics.size() + args.labels.size())
              << " key(s) to " << out.string() << '\n';
    return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
    std::size_t n = 500;
    std::size_t m = 50;
    std::optional<std::size_t> k;
    double weight = 24.0;
    std::string weights_file;
    std::size_t cameras = 2;
    std::string start = "2018-01-01T00:00:00Z";
    std::int64_t interval_seconds = 180;
};

int run_simulate(const CommonArgs& common, const SimulateArgs& args) {
    PipelineConfig cfg = resolve_config(common);
    if (args.k) {
        cfg.lda.k = *args.k;
        if (!cfg.alpha_explicit) cfg.lda.alpha = 50.0 / static_cast<double>(*args.k);
    }
    const fs::path out = require_out(common);
    auto start_ts = parse_utc(args.start);
    if (!start_ts) throw Error(Errc::invalid_config, "bad --start timestamp: " + args.start);
    if (args.cameras == 0) throw Error(Errc::invalid_config, "--cameras must be >= 1");

    std::vector<double> weights(args.n, args.weight);
    if (!args.weights_file.empty()) {
        std::ifstream in(args.weights_file);
        if (!in) throw Error(Errc::file_not_found, "cannot open " + args.weights_file);
        weights.clear();
        std::string line;
        while (std::getline(in, line)) {
            std::string_view sv = trim(line);
            if (sv.empty()) continue;
            auto v = parse_double(sv);
            if (!v)
                throw Error(Errc::malformed_record,
                            args.weights_file + ": bad weight '" + std::string(sv) + "'");
            weights.push_back(*v);
        }
    }

    // Synthetic vocabulary; zero-padded names keep lexicographic order.
    auto vocab = std::make_shared<Vocabulary>();
    char name[16];
    for (std::size_t j = 0; j < args.m; ++j) {
        std::snprintf(name, sizeof name, "sim-%06zu", j);
        vocab->words.push_back({Service::ls1, name});
    }

    SimulatedCorpus sim = simulate_corpus(cfg.lda, weights, *vocab);

    std::vector<RowMeta> meta;
    meta.reserve(sim.bags.size());
    char image_id[24];
    for (std::size_t i = 0; i < sim.bags.size(); ++i) {
        std::snprintf(image_id, sizeof image_id, "img-%08zu", i);
        meta.push_back({image_id, "cam-" + std::to_string(i % args.cameras + 1),
                        *start_ts + static_cast<std::int64_t>(i) * args.interval_seconds});
    }

    // Fill in the vocabulary statistics from the generated corpus.
    vocab->total_images = static_cast<std::int64_t>(sim.bags.size());
    for (std::size_t c = 0; c < args.cameras; ++c)
        vocab->cameras.push_back("cam-" + std::to_string(c + 1));
    std::sort(vocab->cameras.begin(), vocab->cameras.end());
    vocab->camera_images.assign(vocab->cameras.size(), 0);
    std::vector<std::int64_t> doc_count(args.m, 0);
    std::vector<std::vector<std::int64_t>> cam_count(
        args.m, std::vector<std::int64_t>(vocab->cameras.size(), 0));
    for (std::size_t i = 0; i < sim.bags.size(); ++i) {
        const std::size_t cam = *vocab->camera_index(meta[i].camera);
        vocab->camera_images[cam] += 1;
        for (const auto& [j, v] : sim.bags[i].entries) {
            doc_count[j] += 1;
            cam_count[j][cam] += 1;
        }
    }

    // Words the generator never drew would break the n_j >= 1 invariant, so
    // the artifact keeps only drawn words. Truth phi rows are renormalized
    // over the kept columns (a uniform row rescale, so matching by cosine is
    // unaffected).
    std::vector<std::uint32_t> remap(args.m, 0);
    std::size_t kept = 0;
    for (std::size_t j = 0; j < args.m; ++j)
        if (doc_count[j] > 0) remap[j] = static_cast<std::uint32_t>(kept++);
    if (kept < args.m) {
        std::vector<LabelWord> words;
        Dense phi(cfg.lda.k, kept);
        std::vector<std::int64_t> counts;
        std::vector<std::vector<std::int64_t>> cams;
        for (std::size_t j = 0; j < args.m; ++j) {
            if (doc_count[j] == 0) continue;
            words.push_back(vocab->words[j]);
            counts.push_back(doc_count[j]);
            cams.push_back(std::move(cam_count[j]));
            for (std::size_t kk = 0; kk < cfg.lda.k; ++kk)
                phi(kk, remap[j]) = sim.true_phi(kk, j);
        }
        for (std::size_t kk = 0; kk < cfg.lda.k; ++kk) {
            double total = 0.0;
            for (double v : phi.row(kk)) total += v;
            for (double& v : phi.row(kk)) v /= total;
        }
        vocab->words = std::move(words);
        vocab->doc_count = std::move(counts);
        vocab->camera_doc_count = std::move(cams);
        sim.true_phi = std::move(phi);
        for (BagOfLabelWords& bag : sim.bags)
            for (auto& e : bag.entries) e.first = remap[e.first];
    } else {
        vocab->doc_count = std::move(doc_count);
        vocab->camera_doc_count = std::move(cam_count);
    }

    ImageLabelMatrix matrix = matrix_from_bags(sim.bags, std::move(meta), vocab);
    write_corpus_artifact(matrix, out);

    TopicModel truth;
    truth.config = cfg.lda;
    truth.vocab_hash = vocab->hash();
    truth.phi = std::move(sim.true_phi);
    truth.theta = std::move(sim.true_theta);
    save_model(truth, out / "truth.model.bin");
    cfg.write_ini(out / "resolved_config.ini");

    std::cout << "simulate: " << matrix.row_count() << " bags over "
              << vocab->size() << " words, " << args.cameras << " camera(s)\n";
    return 0;
}

// ------------------------------------------------------------ likelihood

struct LikelihoodArgs {
    std::string corpus_dir;
    std::vector<std::size_t> k_values;
};

int run_likelihood(const CommonArgs& common, const LikelihoodArgs& args) {
    PipelineConfig cfg = resolve_config(common);
    const fs::path out = require_out(common);

    CorpusArtifact corpus = read_corpus_artifact(args.corpus_dir);
    auto rows = log_likelihood_report(corpus.matrix, cfg.lda, args.k_values);

    std::ofstream csv(out / "likelihood.csv", std::ios::binary);
    if (!csv) throw Error(Errc::io_error, "cannot write likelihood.csv");
    csv << "k,heldout_log_likelihood_per_token\n";
    for (const LikelihoodRow& row : rows) {
        csv << row.k << ',' << format_double(row.heldout_log_likelihood_per_token) << '\n';
        std::cout << "K=" << row.k << "  held-out log-likelihood/token = "
                  << format_double(row.heldout_log_likelihood_per_token) << '\n';
    }
    cfg.write_ini(out / "resolved_config.ini");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bag-of-Label-Words topic pipeline for labeled camera images"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "Pipeline config file (flat INI)")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", common.seed, "Top-level RNG seed");
    app.add_option("--out", common.out_dir, "Output directory");
    auto* strict_flag = app.add_flag("--strict", "Abort on the first malformed record");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Build a corpus artifact from label records");
    ingest->fallthrough();
    ingest->add_option("--input", ingest_args.input, "Label-record JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    double cutoff_val = 0.0;
    auto* cutoff_opt =
        ingest->add_option("--cutoff", cutoff_val, "Document-frequency cutoff (default 1e-5)");
    ingest->add_option("--blacklist", ingest_args.blacklist,
                       "Case-insensitive substring to drop (repeatable)");
    std::string mode_val;
    auto* mode_opt = ingest->add_option(
        "--mode", mode_val, "binary | per-camera-tf-idf | global-tf-idf");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a topic model on a corpus artifact");
    fit->fallthrough();
    fit->add_option("--corpus", fit_args.corpus_dir, "Corpus artifact directory")->required();
    std::size_t k_val = 0;
    auto* k_opt = fit->add_option("--k", k_val, "Topic count (default 10)");
    double alpha_val = 0.0, beta_val = 0.0;
    auto* alpha_opt = fit->add_option("--alpha", alpha_val, "Image-topic prior (default 50/K)");
    auto* beta_opt = fit->add_option("--beta", beta_val, "Topic-label prior (default 0.1)");
    fit->add_flag("--gibbs", fit_args.use_gibbs,
                  "Use the collapsed Gibbs oracle (binary/count matrices only)");
    std::size_t batch_val = 0, passes_val = 0, gibbs_iter_val = 0, gibbs_burn_val = 0;
    double kappa_val = 0.0, tau0_val = 0.0;
    auto* batch_opt = fit->add_option("--batch-size", batch_val, "VB mini-batch size");
    auto* kappa_opt = fit->add_option("--kappa", kappa_val, "VB learning-decay exponent");
    auto* tau0_opt = fit->add_option("--tau0", tau0_val, "VB learning-delay offset");
    auto* passes_opt = fit->add_option("--passes", passes_val, "VB passes over the corpus");
    auto* gibbs_iter_opt =
        fit->add_option("--gibbs-iterations", gibbs_iter_val, "Gibbs sweeps");
    auto* gibbs_burn_opt =
        fit->add_option("--gibbs-burn-in", gibbs_burn_val, "Gibbs burn-in sweeps");

    SeriesArgs series_args;
    auto* series = app.add_subcommand("series", "Export per-camera topic/label time series");
    series->fallthrough();
    series->add_option("--corpus", series_args.corpus_dir, "Corpus artifact directory")
        ->required();
    series->add_option("--model", series_args.model_path, "Model file")->required();
    series->add_option("--topic", series_args.topics, "Topic number, 1-based (repeatable)");
    series->add_option("--label", series_args.labels,
                       "Label in rendered form, e.g. \"LS1: snow\" (repeatable)");
    series->add_flag("--weekly", series_args.weekly, "Also write weekly overlays");
    series->add_option("--highlight", series_args.highlights,
                       "Date whose ISO week gets highlighted (repeatable)");
    std::int64_t bin_width_val = 0, offset_val = 0;
    auto* bin_width_opt = series->add_option("--bin-width-minutes", bin_width_val,
                                             "Bin width in minutes (default 15)");
    auto* offset_opt = series->add_option("--utc-offset-minutes", offset_val,
                                          "Display offset applied to rendered timestamps");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus artifact");
    simulate->fallthrough();
    simulate->add_option("--n", sim_args.n, "Number of images (default 500)");
    simulate->add_option("--m", sim_args.m, "Vocabulary size (default 50)");
    std::size_t sim_k_val = 0;
    auto* sim_k_opt = simulate->add_option("--k", sim_k_val, "Topic count (default 10)");
    simulate->add_option("--weight", sim_args.weight,
                         "Target bag weight for every image (default 24)");
    simulate->add_option("--weights-file", sim_args.weights_file,
                         "One target weight per line, overrides --weight");
    simulate->add_option("--cameras", sim_args.cameras, "Camera count (default 2)");
    simulate->add_option("--start", sim_args.start, "First timestamp (default 2018-01-01)");
    simulate->add_option("--interval-seconds", sim_args.interval_seconds,
                         "Spacing between consecutive images (default 180)");

    LikelihoodArgs lik_args;
    auto* likelihood =
        app.add_subcommand("likelihood", "Held-out log-likelihood per candidate K");
    likelihood->fallthrough();
    likelihood->add_option("--corpus", lik_args.corpus_dir, "Corpus artifact directory")
        ->required();
    likelihood->add_option("--k-values", lik_args.k_values, "Candidate topic counts")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    common.seed_given = seed_opt->count() > 0;
    common.strict_given = strict_flag->count() > 0;
    if (cutoff_opt->count()) ingest_args.cutoff = cutoff_val;
    if (mode_opt->count()) ingest_args.mode = mode_val;
    if (k_opt->count()) fit_args.k = k_val;
    if (alpha_opt->count()) fit_args.alpha = alpha_val;
    if (beta_opt->count()) fit_args.beta = beta_val;
    if (batch_opt->count()) fit_args.batch_size = batch_val;
    if (kappa_opt->count()) fit_args.kappa = kappa_val;
    if (tau0_opt->count()) fit_args.tau0 = tau0_val;
    if (passes_opt->count()) fit_args.passes = passes_val;
    if (gibbs_iter_opt->count()) fit_args.gibbs_iterations = gibbs_iter_val;
    if (gibbs_burn_opt->count()) fit_args.gibbs_burn_in = gibbs_burn_val;
    if (bin_width_opt->count()) series_args.bin_width_minutes = bin_width_val;
    if (offset_opt->count()) series_args.utc_offset_minutes = offset_val;
    if (sim_k_opt->count()) sim_args.k = sim_k_val;

    try {
        if (app.got_subcommand(ingest)) return run_ingest(common, ingest_args);
        if (app.got_subcommand(fit)) return run_fit(common, fit_args);
        if (app.got_subcommand(series)) return run_series(common, series_args, series);
        if (app.got_subcommand(simulate)) return run_simulate(common, sim_args);
        if (app.got_subcommand(likelihood)) return run_likelihood(common, lik_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
