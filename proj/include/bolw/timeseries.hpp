#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bolw/dense.hpp"
#include "bolw/exec.hpp"
#include "bolw/timeutil.hpp"
#include "bolw/weighting.hpp"

namespace bolw {

/// One bin of a per-camera series. count == 0 marks a gap: no image fell in
/// the bin and `mean` is meaningless (written as an empty CSV field).
struct SeriesBin {
    std::int64_t bin_start; // UTC seconds, multiple of bin_width
    double mean;
    std::int64_t count;
};

struct TopicSeries {
    std::string camera;
    std::string key; // display form, e.g. "topic:1" or "label:LS1: snow"
    std::int64_t bin_width = 0; // seconds
    std::vector<SeriesBin> bins; // contiguous, strictly increasing by width
};

/// Per-camera binned means of theta(. , z). Bins are half-open
/// [start, start + width), aligned to UTC midnight; empty bins stay in the
/// series as gaps. Cameras come back sorted lexicographically.
std::vector<TopicSeries> topic_series(const Dense& theta, std::span<const RowMeta> row_meta,
                                      std::size_t z, std::int64_t bin_width_seconds,
                                      Exec exec = Exec::parallel);

/// Same binning applied to column j of the matrix. An image without the
/// label contributes 0 to its bin (absence of a label is an observation of
/// zero, unlike absence of an image).
std::vector<TopicSeries> label_series(const ImageLabelMatrix& matrix, std::size_t j,
                                      std::int64_t bin_width_seconds,
                                      Exec exec = Exec::parallel);

struct WeeklyOverlay {
    struct Week {
        IsoWeek week;
        bool highlighted = false;
        // One slot per bin_width across Monday..Sunday; count 0 = gap.
        std::vector<double> mean;
        std::vector<std::int64_t> count;
    };

    std::string camera;
    std::string key;
    std::int64_t bin_width = 0;
    std::size_t slots_per_day = 0;
    std::vector<Week> weeks; // consecutive ISO weeks covering the series
    std::vector<IsoWeek> highlight_weeks;
};

/// Reindexes a series into (ISO week, weekday, time-of-day slot). The bin
/// width must divide 24 hours. Weeks containing a highlight date are
/// flagged.
WeeklyOverlay weekly_overlay(const TopicSeries& series,
                             std::span<const std::int64_t> highlight_dates);

/// Inverse of the overlay reshape: populated slots back to series bins in
/// chronological order.
std::vector<SeriesBin> flatten(const WeeklyOverlay& overlay);

enum class ExportFormat { csv, svg_plot };

/// CSV columns: camera,key,bin_start,mean,count. The display offset shifts
/// rendered timestamps only; binning stays UTC.
void export_series(std::span<const TopicSeries> series, const std::filesystem::path& path,
                   ExportFormat format, std::int64_t display_offset_seconds = 0);

/// CSV columns: camera,key,week,weekday,slot,mean,count,highlight
/// (populated slots only).
void export_overlay(std::span<const WeeklyOverlay> overlays, const std::filesystem::path& path,
                    ExportFormat format);

std::vector<TopicSeries> read_series_csv(const std::filesystem::path& path);

} // namespace bolw
