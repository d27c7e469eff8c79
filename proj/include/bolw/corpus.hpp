#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bolw/errors.hpp"

namespace bolw {

// Labeling service that produced a label. Keeping the two vocabularies
// disjoint is done by prefixing every word with its service.
enum class Service { ls1, ls2 };

std::string_view to_string(Service s);
std::optional<Service> service_from_string(std::string_view s);

struct LabelWord {
    Service service;
    std::string text;

    /// Rendered form, e.g. "LS1: snow". Unique within a vocabulary.
    std::string rendered() const;

    // Ordering by (service, text) coincides with lexicographic ordering of
    // the rendered form, since the prefixes differ only in the digit.
    friend auto operator<=>(const LabelWord&, const LabelWord&) = default;
};

struct ScoredLabel {
    LabelWord word;
    double score; // >= 0
};

/// One labeled image: camera id, UTC timestamp, raw label/score pairs.
struct ImageRecord {
    std::string image_id;
    std::string camera;
    std::int64_t timestamp = 0; // UTC seconds
    std::vector<ScoredLabel> raw_labels;
};

struct IngestIssue {
    std::size_t line = 0;
    std::string reason;
};

struct IngestOptions {
    bool strict = false; // abort on the first bad record instead of skipping it
};

struct IngestResult {
    std::vector<ImageRecord> records; // file order
    std::vector<IngestIssue> issues;  // skipped lines (non-strict mode)
};

/// Reads a label-record file: UTF-8, one JSON object per line with fields
/// image_id, camera, timestamp (ISO-8601 UTC) and labels[{service,text,score}].
/// Duplicate words within one record collapse to the max score. In strict
/// mode the first malformed line or duplicate image_id throws; otherwise the
/// offending record is skipped and reported in `issues`.
IngestResult ingest_label_records(const std::filesystem::path& path,
                                  const IngestOptions& options = {});

/// Maps every positive score to exactly 1 and drops zero-score labels.
/// Idempotent; record order is preserved.
std::vector<ImageRecord> binarize(std::vector<ImageRecord> records);

struct Vocabulary {
    std::vector<LabelWord> words;            // sorted by rendered form
    std::vector<std::int64_t> doc_count;     // n_j: images containing word j
    std::vector<std::string> cameras;        // sorted
    std::vector<std::int64_t> camera_images; // N_c, aligned with `cameras`
    // camera_doc_count[j][c]: images of camera c containing word j
    std::vector<std::vector<std::int64_t>> camera_doc_count;
    std::int64_t total_images = 0; // N

    std::size_t size() const { return words.size(); }
    std::optional<std::size_t> index_of(const LabelWord& w) const;
    std::optional<std::size_t> camera_index(std::string_view camera) const;

    /// Identity of the column space: hash over the rendered words in index
    /// order. Counts do not participate.
    std::uint64_t hash() const;
};

/// Default watermark blacklist (case-insensitive substrings matched against
/// the rendered word).
std::vector<std::string> default_blacklist();

/// Builds the unified vocabulary over all records: every distinct word that
/// appears in at least one record and matches no blacklist pattern, sorted
/// lexicographically by rendered form. Records are expected to be binarized.
/// Records with no labels still count toward N and N_c.
Vocabulary build_vocabulary(std::span<const ImageRecord> records,
                            std::span<const std::string> blacklist);

/// Empirical document frequency f_j = n_j / N.
double document_frequency(const Vocabulary& vocab, std::size_t j);

/// Keeps words with f_j >= cutoff (inclusive). Indices are reassigned but
/// stay sorted; counts, N and N_c are unchanged for retained words.
Vocabulary frequency_filter(const Vocabulary& vocab, double cutoff);

/// Sparse non-negative label vector for one image.
struct BagOfLabelWords {
    std::vector<std::pair<std::uint32_t, double>> entries; // sorted by index
    double weight = 0.0; // L1 norm of the entries

    bool has(std::size_t j) const;
    double value(std::size_t j) const; // 0 when absent
};

/// One bag per record, entry weight 1 per retained label. Labels missing
/// from the vocabulary are silently dropped.
std::vector<BagOfLabelWords> to_bags(std::span<const ImageRecord> records,
                                     const Vocabulary& vocab);

/// CSV columns: index,service,text,n_j,f_j (1-based index).
void write_vocabulary_csv(const Vocabulary& vocab, const std::filesystem::path& path);

/// Reads back a vocabulary CSV. Only words and doc counts are recoverable;
/// camera statistics are not part of the file format.
Vocabulary read_vocabulary_csv(const std::filesystem::path& path);

} // namespace bolw
