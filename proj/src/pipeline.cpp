#include "bolw/pipeline.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "bolw/errors.hpp"
#include "bolw/hash.hpp"
#include "bolw/textio.hpp"

namespace bolw {

namespace {

std::map<std::string, std::string> parse_flat_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
        if (sv.front() == '[') {
            if (sv.back() != ']')
                throw Error(Errc::invalid_config,
                            path.string() + ":" + std::to_string(line_no) + ": bad section");
            section = std::string(trim(sv.substr(1, sv.size() - 2)));
            continue;
        }
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::invalid_config,
                        path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = std::string(trim(sv.substr(0, eq)));
        if (!section.empty()) key = section + "." + key;
        kv[key] = std::string(trim(sv.substr(eq + 1)));
    }
    return kv;
}

double need_double(const std::string& key, const std::string& value) {
    auto v = parse_double(value);
    if (!v) throw Error(Errc::invalid_config, key + ": expected a number, got " + value);
    return *v;
}

std::int64_t need_int(const std::string& key, const std::string& value) {
    auto v = parse_int(value);
    if (!v) throw Error(Errc::invalid_config, key + ": expected an integer, got " + value);
    return *v;
}

bool need_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw Error(Errc::invalid_config, key + ": expected true/false, got " + value);
}

} // namespace

PipelineConfig PipelineConfig::load_ini(const std::filesystem::path& path) {
    PipelineConfig cfg;
    bool k_set = false;
    for (const auto& [key, value] : parse_flat_ini(path)) {
        if (key == "corpus.blacklist") {
            // semicolon-separated patterns; empty value clears the list
            cfg.blacklist.clear();
            std::string_view sv = value;
            while (!sv.empty()) {
                const auto semi = sv.find(';');
                std::string_view piece = trim(sv.substr(0, semi));
                if (!piece.empty()) cfg.blacklist.emplace_back(piece);
                if (semi == std::string_view::npos) break;
                sv.remove_prefix(semi + 1);
            }
        } else if (key == "corpus.frequency_cutoff") {
            cfg.frequency_cutoff = need_double(key, value);
        } else if (key == "corpus.strict") {
            cfg.strict = need_bool(key, value);
        } else if (key == "weighting.mode") {
            auto mode = weighting_mode_from_string(value);
            if (!mode) throw Error(Errc::invalid_config, key + ": unknown mode " + value);
            cfg.weighting_mode = *mode;
        } else if (key == "lda.k") {
            cfg.lda.k = static_cast<std::size_t>(need_int(key, value));
            k_set = true;
        } else if (key == "lda.alpha") {
            cfg.lda.alpha = need_double(key, value);
            cfg.alpha_explicit = true;
        } else if (key == "lda.beta") {
            cfg.lda.beta = need_double(key, value);
        } else if (key == "lda.vb.batch_size") {
            cfg.lda.vb.batch_size = static_cast<std::size_t>(need_int(key, value));
        } else if (key == "lda.vb.kappa") {
            cfg.lda.vb.kappa = need_double(key, value);
        } else if (key == "lda.vb.tau0") {
            cfg.lda.vb.tau0 = need_double(key, value);
        } else if (key == "lda.vb.passes") {
            cfg.lda.vb.passes = static_cast<std::size_t>(need_int(key, value));
        } else if (key == "lda.vb.doc_update_iters") {
            cfg.lda.vb.doc_update_iters = static_cast<std::size_t>(need_int(key, value));
        } else if (key == "lda.vb.doc_convergence_tol") {
            cfg.lda.vb.doc_convergence_tol = need_double(key, value);
        } else if (key == "lda.vb.unit_learning_rate") {
            cfg.lda.vb.unit_learning_rate = need_bool(key, value);
        } else if (key == "lda.gibbs.iterations") {
            cfg.lda.gibbs.iterations = static_cast<std::size_t>(need_int(key, value));
        } else if (key == "lda.gibbs.burn_in") {
            cfg.lda.gibbs.burn_in = static_cast<std::size_t>(need_int(key, value));
        } else if (key == "timeseries.bin_width_minutes") {
            cfg.bin_width_seconds = need_int(key, value) * 60;
        } else if (key == "timeseries.utc_offset_minutes") {
            cfg.utc_offset_seconds = need_int(key, value) * 60;
        } else if (key == "cli.seed") {
            cfg.seed = static_cast<std::uint64_t>(need_int(key, value));
        } else {
            throw Error(Errc::invalid_config, "unknown config key: " + key);
        }
    }
    if (k_set && !cfg.alpha_explicit)
        cfg.lda.alpha = 50.0 / static_cast<double>(cfg.lda.k);
    cfg.lda.seed = cfg.seed;
    return cfg;
}

void PipelineConfig::write_ini(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& inputs) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "[corpus]\n";
    out << "blacklist = ";
    for (std::size_t i = 0; i < blacklist.size(); ++i) {
        if (i) out << "; ";
        out << blacklist[i];
    }
    out << '\n';
    out << "frequency_cutoff = " << format_double(frequency_cutoff) << '\n';
    out << "strict = " << (strict ? "true" : "false") << '\n';
    out << "\n[weighting]\n";
    out << "mode = " << to_string(weighting_mode) << '\n';
    out << "\n[lda]\n";
    out << "k = " << lda.k << '\n';
    out << "alpha = " << format_double(lda.alpha) << '\n';
    out << "beta = " << format_double(lda.beta) << '\n';
    out << "\n[lda.vb]\n";
    out << "batch_size = " << lda.vb.batch_size << '\n';
    out << "kappa = " << format_double(lda.vb.kappa) << '\n';
    out << "tau0 = " << format_double(lda.vb.tau0) << '\n';
    out << "passes = " << lda.vb.passes << '\n';
    out << "doc_update_iters = " << lda.vb.doc_update_iters << '\n';
    out << "doc_convergence_tol = " << format_double(lda.vb.doc_convergence_tol) << '\n';
    out << "unit_learning_rate = " << (lda.vb.unit_learning_rate ? "true" : "false") << '\n';
    out << "\n[lda.gibbs]\n";
    out << "iterations = " << lda.gibbs.iterations << '\n';
    out << "burn_in = " << lda.gibbs.burn_in << '\n';
    out << "\n[timeseries]\n";
    out << "bin_width_minutes = " << bin_width_seconds / 60 << '\n';
    out << "utc_offset_minutes = " << utc_offset_seconds / 60 << '\n';
    out << "\n[cli]\n";
    out << "seed = " << seed << '\n';
    if (!inputs.empty()) {
        out << "\n[inputs]\n";
        for (const auto& [name, hash] : inputs) out << name << " = " << hash << '\n';
    }
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

void write_corpus_artifact(const ImageLabelMatrix& matrix, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_coo(matrix, dir / "matrix.coo");
    write_row_meta_csv(matrix.row_meta, dir / "rows.csv");
    if (!matrix.vocab) throw Error(Errc::vocabulary_mismatch, "matrix has no vocabulary");
    write_vocabulary_csv(*matrix.vocab, dir / "vocab.csv");

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["kind"] = "corpus";
    manifest["mode"] = std::string(to_string(matrix.mode));
    manifest["rows"] = matrix.row_count();
    manifest["cols"] = matrix.col_count();
    manifest["vocab_hash"] = matrix.vocab->hash();
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

CorpusArtifact read_corpus_artifact(const std::filesystem::path& dir) {
    std::ifstream manifest_in(dir / "manifest.json");
    if (!manifest_in)
        throw Error(Errc::file_not_found,
                    dir.string() + " is not a corpus artifact (no manifest.json)");
    nlohmann::json manifest;
    try {
        manifest_in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, dir.string() + "/manifest.json: " + e.what());
    }
    if (manifest.value("kind", "") != "corpus" || manifest.value("version", 0) != 1)
        throw Error(Errc::malformed_record, dir.string() + ": unsupported manifest");
    auto mode = weighting_mode_from_string(manifest.value("mode", ""));
    if (!mode)
        throw Error(Errc::malformed_record, dir.string() + ": unknown weighting mode");

    auto vocab = std::make_shared<Vocabulary>(read_vocabulary_csv(dir / "vocab.csv"));
    auto row_meta = read_row_meta_csv(dir / "rows.csv");

    if (manifest.value("rows", std::size_t{0}) != row_meta.size() ||
        manifest.value("cols", std::size_t{0}) != vocab->size() ||
        manifest.value("vocab_hash", std::uint64_t{0}) != vocab->hash())
        throw Error(Errc::malformed_record, dir.string() + ": manifest does not match files");

    CorpusArtifact artifact;
    artifact.matrix = read_matrix_coo(dir / "matrix.coo", std::move(row_meta),
                                      std::move(vocab), *mode);
    return artifact;
}

} // namespace bolw
