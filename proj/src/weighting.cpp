#include "bolw/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "bolw/textio.hpp"
#include "bolw/timeutil.hpp"

namespace bolw {

std::string_view to_string(WeightingMode m) {
    switch (m) {
        case WeightingMode::binary: return "binary";
        case WeightingMode::per_camera_tf_idf: return "per-camera-tf-idf";
        case WeightingMode::global_tf_idf: return "global-tf-idf";
        case WeightingMode::counts: return "counts";
    }
    return "?";
}

std::optional<WeightingMode> weighting_mode_from_string(std::string_view s) {
    if (s == "binary") return WeightingMode::binary;
    if (s == "per-camera-tf-idf") return WeightingMode::per_camera_tf_idf;
    if (s == "global-tf-idf") return WeightingMode::global_tf_idf;
    if (s == "counts") return WeightingMode::counts;
    return std::nullopt;
}

std::size_t ImageLabelMatrix::nnz() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.size();
    return n;
}

int tf(const BagOfLabelWords& bag, std::size_t j, std::size_t vocab_size) {
    if (j >= vocab_size)
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));
    return bag.has(j) ? 1 : 0;
}

double per_camera_idf(const Vocabulary& vocab, std::size_t j, std::string_view camera) {
    if (j >= vocab.size())
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));
    auto cam = vocab.camera_index(camera);
    if (!cam) throw Error(Errc::unknown_camera, "camera " + std::string(camera));
    return std::log(static_cast<double>(vocab.camera_images[*cam]) /
                    static_cast<double>(vocab.doc_count[j]));
}

double global_idf(const Vocabulary& vocab, std::size_t j) {
    if (j >= vocab.size())
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));
    return std::log(static_cast<double>(vocab.total_images) /
                    static_cast<double>(vocab.doc_count[j]));
}

namespace {

// Per-row kernel. Rows are independent, so the parallel path is exactly
// the serial path run out of order.
std::vector<std::pair<std::uint32_t, double>> weigh_row(const BagOfLabelWords& bag,
                                                        const RowMeta& meta,
                                                        const Vocabulary& vocab,
                                                        WeightingMode mode,
                                                        std::size_t camera_idx) {
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(bag.entries.size());
    for (const auto& [j, v] : bag.entries) {
        if (v == 0.0) continue;
        double w = 0.0;
        switch (mode) {
            case WeightingMode::binary:
                w = 1.0;
                break;
            case WeightingMode::per_camera_tf_idf:
                w = std::max(0.0, std::log(static_cast<double>(vocab.camera_images[camera_idx]) /
                                           static_cast<double>(vocab.doc_count[j])));
                break;
            case WeightingMode::global_tf_idf:
                w = std::log(static_cast<double>(vocab.total_images) /
                             static_cast<double>(vocab.doc_count[j]));
                break;
            case WeightingMode::counts:
                w = v;
                break;
        }
        if (w != 0.0) row.emplace_back(j, w);
    }
    (void)meta;
    return row;
}

} // namespace

ImageLabelMatrix build_matrix(std::span<const BagOfLabelWords> bags,
                              std::vector<RowMeta> row_meta,
                              std::shared_ptr<const Vocabulary> vocab, WeightingMode mode,
                              Exec exec) {
    if (bags.size() != row_meta.size())
        throw Error(Errc::length_mismatch,
                    "bags (" + std::to_string(bags.size()) + ") vs row_meta (" +
                        std::to_string(row_meta.size()) + ")");
    const Vocabulary& v = *vocab;
    const std::size_t n = bags.size();

    // Resolve camera indices up front; unknown cameras fail before any work.
    std::vector<std::size_t> cam_idx(n, 0);
    if (mode == WeightingMode::per_camera_tf_idf) {
        for (std::size_t i = 0; i < n; ++i) {
            auto c = v.camera_index(row_meta[i].camera);
            if (!c)
                throw Error(Errc::unknown_camera,
                            "row " + std::to_string(i + 1) + ": camera " + row_meta[i].camera);
            cam_idx[i] = *c;
        }
    }
    for (const BagOfLabelWords& bag : bags)
        if (!bag.entries.empty() && bag.entries.back().first >= v.size())
            throw Error(Errc::index_out_of_range, "bag entry outside vocabulary");

    ImageLabelMatrix matrix;
    matrix.rows.resize(n);
    matrix.row_meta = std::move(row_meta);
    matrix.vocab = std::move(vocab);
    matrix.mode = mode;

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            matrix.rows[i] = weigh_row(bags[i], matrix.row_meta[i], v, mode, cam_idx[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            matrix.rows[i] = weigh_row(bags[i], matrix.row_meta[i], v, mode, cam_idx[i]);
    }
    return matrix;
}

ImageLabelMatrix matrix_from_bags(std::span<const BagOfLabelWords> bags,
                                  std::vector<RowMeta> row_meta,
                                  std::shared_ptr<const Vocabulary> vocab) {
    return build_matrix(bags, std::move(row_meta), std::move(vocab), WeightingMode::counts,
                        Exec::serial);
}

std::vector<CameraColumn> label_column_series(const ImageLabelMatrix& matrix, std::size_t j) {
    if (j >= matrix.col_count())
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));

    std::map<std::string, std::vector<SeriesPoint>> by_camera;
    for (std::size_t i = 0; i < matrix.row_count(); ++i) {
        const auto& row = matrix.rows[i];
        auto it = std::lower_bound(row.begin(), row.end(), j,
                                   [](const auto& e, std::size_t jj) { return e.first < jj; });
        const double value = (it != row.end() && it->first == j) ? it->second : 0.0;
        by_camera[matrix.row_meta[i].camera].push_back({matrix.row_meta[i].timestamp, value});
    }

    std::vector<CameraColumn> out;
    out.reserve(by_camera.size());
    for (auto& [camera, points] : by_camera) {
        std::stable_sort(points.begin(), points.end(),
                         [](const SeriesPoint& a, const SeriesPoint& b) {
                             return a.timestamp < b.timestamp;
                         });
        out.push_back({camera, std::move(points)});
    }
    return out;
}

void write_matrix_coo(const ImageLabelMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    for (std::size_t i = 0; i < matrix.row_count(); ++i)
        for (const auto& [j, v] : matrix.rows[i])
            out << (i + 1) << ' ' << (j + 1) << ' ' << format_double(v) << '\n';
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

void write_row_meta_csv(std::span<const RowMeta> row_meta, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "row,image_id,camera,timestamp\n";
    for (std::size_t i = 0; i < row_meta.size(); ++i)
        out << (i + 1) << ',' << csv_escape(row_meta[i].image_id) << ','
            << csv_escape(row_meta[i].camera) << ',' << format_utc(row_meta[i].timestamp)
            << '\n';
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

std::vector<RowMeta> read_row_meta_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());
    std::vector<RowMeta> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 4)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
        auto row = parse_int(fields[0]);
        auto ts = parse_utc(fields[3]);
        if (!row || *row != static_cast<std::int64_t>(out.size()) + 1 || !ts)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": bad row or timestamp");
        out.push_back({fields[1], fields[2], *ts});
    }
    return out;
}

ImageLabelMatrix read_matrix_coo(const std::filesystem::path& path,
                                 std::vector<RowMeta> row_meta,
                                 std::shared_ptr<const Vocabulary> vocab, WeightingMode mode) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());

    ImageLabelMatrix matrix;
    matrix.rows.resize(row_meta.size());
    matrix.row_meta = std::move(row_meta);
    matrix.vocab = std::move(vocab);
    matrix.mode = mode;

    const std::int64_t n = static_cast<std::int64_t>(matrix.rows.size());
    const std::int64_t m = static_cast<std::int64_t>(matrix.col_count());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '%') continue;
        const auto sp1 = sv.find(' ');
        const auto sp2 = sv.find(' ', sp1 + 1);
        if (sp1 == std::string_view::npos || sp2 == std::string_view::npos)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": expected 'i j value'");
        auto i = parse_int(sv.substr(0, sp1));
        auto j = parse_int(sv.substr(sp1 + 1, sp2 - sp1 - 1));
        auto v = parse_double(sv.substr(sp2 + 1));
        if (!i || !j || !v || *i < 1 || *i > n || *j < 1 || *j > m)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": bad coordinate");
        matrix.rows[*i - 1].emplace_back(static_cast<std::uint32_t>(*j - 1), *v);
    }
    for (auto& row : matrix.rows) std::sort(row.begin(), row.end());
    return matrix;
}

} // namespace bolw
