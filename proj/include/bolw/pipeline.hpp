#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bolw/lda.hpp"
#include "bolw/weighting.hpp"

namespace bolw {

/// Fully-resolved pipeline settings. Defaults materialize on construction;
/// `write_ini` echoes every effective value (plus input hashes) into the
/// output directory so a run is reproducible from the echo alone.
struct PipelineConfig {
    // [corpus]
    std::vector<std::string> blacklist = default_blacklist();
    double frequency_cutoff = 1e-5;
    bool strict = false;
    // [weighting]
    WeightingMode weighting_mode = WeightingMode::per_camera_tf_idf;
    // [lda] / [lda.vb] / [lda.gibbs]
    LdaConfig lda = LdaConfig::defaults(10);
    bool alpha_explicit = false; // keeps alpha fixed when K varies
    // [timeseries]
    std::int64_t bin_width_seconds = 15 * 60;
    std::int64_t utc_offset_seconds = 0;
    // [cli]
    std::uint64_t seed = 0;

    /// Loads a flat key-value file with [sections]; unknown keys are an
    /// error. Values here are later overridden by command-line flags.
    static PipelineConfig load_ini(const std::filesystem::path& path);

    void write_ini(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& inputs = {}) const;
};

/// On-disk corpus artifact: matrix.coo + rows.csv + vocab.csv + a small
/// manifest carrying dimensions, weighting mode and the vocabulary hash.
struct CorpusArtifact {
    ImageLabelMatrix matrix;
};

void write_corpus_artifact(const ImageLabelMatrix& matrix, const std::filesystem::path& dir);
CorpusArtifact read_corpus_artifact(const std::filesystem::path& dir);

} // namespace bolw
