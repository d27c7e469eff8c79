#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bolw/corpus.hpp"
#include "bolw/exec.hpp"

namespace bolw {

enum class WeightingMode {
    binary,            // entry = tf(i,j)
    per_camera_tf_idf, // entry = tf(i,j) * max(0, log(N_c / n_j))
    global_tf_idf,     // entry = tf(i,j) * log(N / n_j)
    counts,            // raw bag weights (simulator output)
};

std::string_view to_string(WeightingMode m);
std::optional<WeightingMode> weighting_mode_from_string(std::string_view s);

struct RowMeta {
    std::string image_id;
    std::string camera;
    std::int64_t timestamp = 0;
};

/// Sparse N x M image-label matrix. Rows follow ingestion order; zero
/// weights are never stored; per-row entries are sorted by column.
struct ImageLabelMatrix {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    std::vector<RowMeta> row_meta;
    std::shared_ptr<const Vocabulary> vocab;
    WeightingMode mode = WeightingMode::binary;

    std::size_t row_count() const { return rows.size(); }
    std::size_t col_count() const { return vocab ? vocab->size() : 0; }
    std::size_t nnz() const;
};

/// Binary term frequency: 1 iff the bag has a nonzero entry at j.
int tf(const BagOfLabelWords& bag, std::size_t j, std::size_t vocab_size);

/// log(N_c / n_j). May be negative when the label is globally more common
/// than the camera's whole image count; matrix assembly clamps that to 0,
/// this accessor reports the signed value.
double per_camera_idf(const Vocabulary& vocab, std::size_t j, std::string_view camera);

/// -log(f_j) = log(N / n_j), always >= 0.
double global_idf(const Vocabulary& vocab, std::size_t j);

/// Assembles the matrix under the given weighting mode. Rows may be
/// processed in parallel; output is identical to sequential assembly.
ImageLabelMatrix build_matrix(std::span<const BagOfLabelWords> bags,
                              std::vector<RowMeta> row_meta,
                              std::shared_ptr<const Vocabulary> vocab, WeightingMode mode,
                              Exec exec = Exec::parallel);

/// Simulator passthrough: bag weights become matrix entries verbatim.
ImageLabelMatrix matrix_from_bags(std::span<const BagOfLabelWords> bags,
                                  std::vector<RowMeta> row_meta,
                                  std::shared_ptr<const Vocabulary> vocab);

struct SeriesPoint {
    std::int64_t timestamp;
    double value;
};

struct CameraColumn {
    std::string camera;
    std::vector<SeriesPoint> points; // chronological, zeros included
};

/// Column j of the matrix split by camera: for each camera, the
/// chronologically sorted (timestamp, weight) sequence over all of that
/// camera's rows. Cameras are ordered lexicographically.
std::vector<CameraColumn> label_column_series(const ImageLabelMatrix& matrix, std::size_t j);

/// Coordinate-format export: "i j value" per line, 1-based indices,
/// row-major order.
void write_matrix_coo(const ImageLabelMatrix& matrix, const std::filesystem::path& path);

/// Row metadata CSV: row,image_id,camera,timestamp (1-based row).
void write_row_meta_csv(std::span<const RowMeta> row_meta, const std::filesystem::path& path);

std::vector<RowMeta> read_row_meta_csv(const std::filesystem::path& path);

/// Reads a coordinate file back into a matrix over the given vocabulary.
ImageLabelMatrix read_matrix_coo(const std::filesystem::path& path,
                                 std::vector<RowMeta> row_meta,
                                 std::shared_ptr<const Vocabulary> vocab, WeightingMode mode);

} // namespace bolw
