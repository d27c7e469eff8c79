#include "bolw/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bolw/errors.hpp"
#include "bolw/textio.hpp"

namespace bolw {

namespace {

using TimedValue = std::pair<std::int64_t, double>;

struct CameraPoints {
    std::string camera;
    std::vector<TimedValue> values; // row order; binning sorts chronologically
};

TopicSeries bin_camera(const std::string& camera, const std::string& key,
                       std::vector<TimedValue> values, std::int64_t width) {
    std::stable_sort(values.begin(), values.end(),
                     [](const TimedValue& a, const TimedValue& b) { return a.first < b.first; });

    TopicSeries series;
    series.camera = camera;
    series.key = key;
    series.bin_width = width;
    if (values.empty()) return series;

    const std::int64_t first = floor_div(values.front().first, width);
    const std::int64_t last = floor_div(values.back().first, width);
    series.bins.resize(static_cast<std::size_t>(last - first + 1));
    for (std::size_t b = 0; b < series.bins.size(); ++b)
        series.bins[b] = {(first + static_cast<std::int64_t>(b)) * width, 0.0, 0};

    for (const auto& [ts, value] : values) {
        auto& bin = series.bins[static_cast<std::size_t>(floor_div(ts, width) - first)];
        bin.mean += value; // sums first, divided below
        bin.count += 1;
    }
    for (SeriesBin& bin : series.bins) {
        if (bin.count > 0)
            bin.mean /= static_cast<double>(bin.count);
        else
            bin.mean = 0.0;
    }
    return series;
}

std::vector<TopicSeries> bin_all(std::vector<CameraPoints> groups, const std::string& key,
                                 std::int64_t width, Exec exec) {
    std::vector<TopicSeries> out(groups.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t g = 0; g < static_cast<std::int64_t>(groups.size()); ++g)
            out[g] = bin_camera(groups[g].camera, key, std::move(groups[g].values), width);
    } else {
        for (std::size_t g = 0; g < groups.size(); ++g)
            out[g] = bin_camera(groups[g].camera, key, std::move(groups[g].values), width);
    }
    return out;
}

template <typename ValueOf>
std::vector<CameraPoints> group_rows(std::span<const RowMeta> row_meta, ValueOf&& value_of) {
    std::map<std::string, std::vector<TimedValue>> groups;
    for (std::size_t i = 0; i < row_meta.size(); ++i)
        groups[row_meta[i].camera].push_back({row_meta[i].timestamp, value_of(i)});
    std::vector<CameraPoints> out;
    out.reserve(groups.size());
    for (auto& [camera, values] : groups) out.push_back({camera, std::move(values)});
    return out; // std::map iteration keeps cameras sorted
}

void check_bin_width(std::int64_t width) {
    if (width <= 0) throw Error(Errc::invalid_config, "bin width must be positive");
}

} // namespace

std::vector<TopicSeries> topic_series(const Dense& theta, std::span<const RowMeta> row_meta,
                                      std::size_t z, std::int64_t bin_width_seconds, Exec exec) {
    check_bin_width(bin_width_seconds);
    if (theta.rows != row_meta.size())
        throw Error(Errc::length_mismatch, "theta has " + std::to_string(theta.rows) +
                                               " rows, row_meta has " +
                                               std::to_string(row_meta.size()));
    if (z >= theta.cols)
        throw Error(Errc::index_out_of_range, "topic " + std::to_string(z));

    auto groups = group_rows(row_meta, [&](std::size_t i) { return theta(i, z); });
    return bin_all(std::move(groups), "topic:" + std::to_string(z + 1), bin_width_seconds,
                   exec);
}

std::vector<TopicSeries> label_series(const ImageLabelMatrix& matrix, std::size_t j,
                                      std::int64_t bin_width_seconds, Exec exec) {
    check_bin_width(bin_width_seconds);
    if (j >= matrix.col_count())
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));

    auto groups = group_rows(matrix.row_meta, [&](std::size_t i) {
        const auto& row = matrix.rows[i];
        auto it = std::lower_bound(row.begin(), row.end(), j,
                                   [](const auto& e, std::size_t jj) { return e.first < jj; });
        return (it != row.end() && it->first == j) ? it->second : 0.0;
    });
    const std::string key =
        matrix.vocab ? "label:" + matrix.vocab->words[j].rendered()
                     : "label:" + std::to_string(j + 1);
    return bin_all(std::move(groups), key, bin_width_seconds, exec);
}

WeeklyOverlay weekly_overlay(const TopicSeries& series,
                             std::span<const std::int64_t> highlight_dates) {
    if (series.bin_width <= 0 || 86400 % series.bin_width != 0)
        throw Error(Errc::incompatible_bin_width,
                    "bin width " + std::to_string(series.bin_width) +
                        "s does not divide 24h");

    WeeklyOverlay overlay;
    overlay.camera = series.camera;
    overlay.key = series.key;
    overlay.bin_width = series.bin_width;
    overlay.slots_per_day = static_cast<std::size_t>(86400 / series.bin_width);
    const std::size_t slots_per_week = 7 * overlay.slots_per_day;

    std::set<IsoWeek> highlighted;
    for (std::int64_t date : highlight_dates)
        highlighted.insert(iso_week(floor_div(date, 86400)));
    overlay.highlight_weeks.assign(highlighted.begin(), highlighted.end());

    if (series.bins.empty()) return overlay;

    // Enumerate the consecutive ISO weeks spanned by the series.
    const IsoWeek first_week = iso_week(floor_div(series.bins.front().bin_start, 86400));
    const IsoWeek last_week = iso_week(floor_div(series.bins.back().bin_start, 86400));
    for (std::int64_t monday = iso_week_start(first_week);;
         monday += 7 * 86400) {
        const IsoWeek wk = iso_week(monday / 86400);
        WeeklyOverlay::Week week;
        week.week = wk;
        week.highlighted = highlighted.contains(wk);
        week.mean.assign(slots_per_week, 0.0);
        week.count.assign(slots_per_week, 0);
        overlay.weeks.push_back(std::move(week));
        if (wk == last_week) break;
    }

    const std::int64_t origin = iso_week_start(first_week);
    for (const SeriesBin& bin : series.bins) {
        if (bin.count == 0) continue;
        const std::int64_t offset = bin.bin_start - origin;
        const std::size_t week_idx =
            static_cast<std::size_t>(floor_div(offset, 7 * 86400));
        const std::size_t slot = static_cast<std::size_t>(
            (offset - static_cast<std::int64_t>(week_idx) * 7 * 86400) / series.bin_width);
        overlay.weeks[week_idx].mean[slot] = bin.mean;
        overlay.weeks[week_idx].count[slot] = bin.count;
    }
    return overlay;
}

std::vector<SeriesBin> flatten(const WeeklyOverlay& overlay) {
    std::vector<SeriesBin> bins;
    for (const WeeklyOverlay::Week& week : overlay.weeks) {
        const std::int64_t monday = iso_week_start(week.week);
        for (std::size_t slot = 0; slot < week.mean.size(); ++slot) {
            if (week.count[slot] == 0) continue;
            bins.push_back({monday + static_cast<std::int64_t>(slot) * overlay.bin_width,
                            week.mean[slot], week.count[slot]});
        }
    }
    return bins;
}

namespace {

void write_series_csv(std::span<const TopicSeries> series, const std::filesystem::path& path,
                      std::int64_t display_offset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "camera,key,bin_start,mean,count\n";
    for (const TopicSeries& s : series)
        for (const SeriesBin& bin : s.bins) {
            out << csv_escape(s.camera) << ',' << csv_escape(s.key) << ','
                << format_utc(bin.bin_start + display_offset) << ',';
            if (bin.count > 0) out << format_double(bin.mean);
            out << ',' << bin.count << '\n';
        }
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

void write_overlay_csv(std::span<const WeeklyOverlay> overlays,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "camera,key,week,weekday,slot,mean,count,highlight\n";
    char week_buf[16];
    for (const WeeklyOverlay& o : overlays) {
        for (const WeeklyOverlay::Week& week : o.weeks) {
            std::snprintf(week_buf, sizeof week_buf, "%04d-W%02d", week.week.year,
                          week.week.week);
            for (std::size_t slot = 0; slot < week.mean.size(); ++slot) {
                if (week.count[slot] == 0) continue;
                const std::size_t weekday = slot / o.slots_per_day + 1; // ISO: Monday = 1
                const std::size_t slot_of_day = slot % o.slots_per_day;
                out << csv_escape(o.camera) << ',' << csv_escape(o.key) << ',' << week_buf
                    << ',' << weekday << ',' << slot_of_day << ','
                    << format_double(week.mean[slot]) << ',' << week.count[slot] << ','
                    << (week.highlighted ? 1 : 0) << '\n';
            }
        }
    }
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

// --- SVG rendering ----------------------------------------------------
// Hand-rolled, self-contained. One panel per series, one polyline per
// contiguous populated run; overlays draw grey week lines with highlighted
// weeks on top in color.

constexpr int kPanelWidth = 900;
constexpr int kPanelHeight = 150;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 30;
constexpr int kPanelGap = 20;

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void svg_header(std::ostringstream& svg, int width, int height) {
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void svg_polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
                  const char* color, double stroke_width) {
    if (pts.size() < 2) {
        if (pts.size() == 1)
            svg << "<circle cx=\"" << svg_num(pts[0].first) << "\" cy=\""
                << svg_num(pts[0].second) << "\" r=\"1.5\" fill=\"" << color << "\"/>\n";
        return;
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << svg_num(stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) svg << ' ';
        svg << svg_num(pts[i].first) << ',' << svg_num(pts[i].second);
    }
    svg << "\"/>\n";
}

void svg_panel_frame(std::ostringstream& svg, int top, const std::string& title, double ymax) {
    const int bottom = top + kPanelHeight;
    svg << "<text x=\"" << kMarginLeft << "\" y=\"" << (top - 8)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << title << "</text>\n";
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << bottom << "\" x2=\""
        << (kPanelWidth - kMarginRight) << "\" y2=\"" << bottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << top << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << bottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << (kMarginLeft - 5) << "\" y=\"" << (top + 10)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
        << format_double(ymax) << "</text>\n";
    svg << "<text x=\"" << (kMarginLeft - 5) << "\" y=\"" << bottom
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">0</text>\n";
}

void write_series_svg(std::span<const TopicSeries> series, const std::filesystem::path& path,
                      std::int64_t display_offset) {
    std::ostringstream svg;
    const int total_height =
        kMarginTop + static_cast<int>(series.size()) * (kPanelHeight + kPanelGap);
    svg_header(svg, kPanelWidth, total_height);

    // Shared x range so panels line up across cameras.
    std::int64_t tmin = 0, tmax = 1;
    bool any = false;
    for (const TopicSeries& s : series) {
        if (s.bins.empty()) continue;
        const std::int64_t lo = s.bins.front().bin_start;
        const std::int64_t hi = s.bins.back().bin_start + s.bin_width;
        if (!any || lo < tmin) tmin = lo;
        if (!any || hi > tmax) tmax = hi;
        any = true;
    }

    int top = kMarginTop;
    for (const TopicSeries& s : series) {
        double ymax = 0.0;
        for (const SeriesBin& bin : s.bins)
            if (bin.count > 0) ymax = std::max(ymax, bin.mean);
        if (ymax <= 0.0) ymax = 1.0;

        svg_panel_frame(svg, top, s.camera + "  " + s.key, ymax);
        const double xspan = static_cast<double>(tmax - tmin);
        const double wplot = kPanelWidth - kMarginLeft - kMarginRight;
        std::vector<std::pair<double, double>> run;
        for (const SeriesBin& bin : s.bins) {
            if (bin.count == 0) { // gap breaks the line
                svg_polyline(svg, run, "#1f77b4", 1.0);
                run.clear();
                continue;
            }
            const double xc = static_cast<double>(bin.bin_start - tmin) +
                              static_cast<double>(s.bin_width) / 2.0;
            run.push_back({kMarginLeft + xc / xspan * wplot,
                           top + kPanelHeight * (1.0 - bin.mean / ymax)});
        }
        svg_polyline(svg, run, "#1f77b4", 1.0);

        svg << "<text x=\"" << kMarginLeft << "\" y=\"" << (top + kPanelHeight + 12)
            << "\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_utc(tmin + display_offset) << "</text>\n";
        svg << "<text x=\"" << (kPanelWidth - kMarginRight) << "\" y=\""
            << (top + kPanelHeight + 12)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
            << format_utc(tmax + display_offset) << "</text>\n";
        top += kPanelHeight + kPanelGap;
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << svg.str();
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

void write_overlay_svg(std::span<const WeeklyOverlay> overlays,
                       const std::filesystem::path& path) {
    static const char* kWeekdayNames[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    std::ostringstream svg;
    const int total_height =
        kMarginTop + static_cast<int>(overlays.size()) * (kPanelHeight + kPanelGap + 14);
    svg_header(svg, kPanelWidth, total_height);

    int top = kMarginTop;
    for (const WeeklyOverlay& o : overlays) {
        const std::size_t slots_per_week = 7 * o.slots_per_day;
        double ymax = 0.0;
        for (const auto& week : o.weeks)
            for (std::size_t slot = 0; slot < week.mean.size(); ++slot)
                if (week.count[slot] > 0) ymax = std::max(ymax, week.mean[slot]);
        if (ymax <= 0.0) ymax = 1.0;

        svg_panel_frame(svg, top, o.camera + "  " + o.key, ymax);
        const double wplot = kPanelWidth - kMarginLeft - kMarginRight;
        const int bottom = top + kPanelHeight;

        // Day separators and weekday labels.
        for (int day = 0; day < 7; ++day) {
            const double x = kMarginLeft + wplot * day / 7.0;
            if (day > 0)
                svg << "<line x1=\"" << svg_num(x) << "\" y1=\"" << top << "\" x2=\""
                    << svg_num(x) << "\" y2=\"" << bottom
                    << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
            svg << "<text x=\"" << svg_num(x + wplot / 14.0) << "\" y=\"" << (bottom + 12)
                << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
                << kWeekdayNames[day] << "</text>\n";
        }

        auto draw_week = [&](const WeeklyOverlay::Week& week, const char* color,
                             double stroke) {
            std::vector<std::pair<double, double>> run;
            for (std::size_t slot = 0; slot < slots_per_week; ++slot) {
                if (week.count[slot] == 0) {
                    svg_polyline(svg, run, color, stroke);
                    run.clear();
                    continue;
                }
                const double x =
                    kMarginLeft + wplot * (static_cast<double>(slot) + 0.5) /
                                      static_cast<double>(slots_per_week);
                run.push_back({x, top + kPanelHeight * (1.0 - week.mean[slot] / ymax)});
            }
            svg_polyline(svg, run, color, stroke);
        };
        for (const auto& week : o.weeks)
            if (!week.highlighted) draw_week(week, "#bbbbbb", 1.0);
        for (const auto& week : o.weeks)
            if (week.highlighted) draw_week(week, "#d62728", 1.5);

        top += kPanelHeight + kPanelGap + 14;
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << svg.str();
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

} // namespace

void export_series(std::span<const TopicSeries> series, const std::filesystem::path& path,
                   ExportFormat format, std::int64_t display_offset_seconds) {
    if (format == ExportFormat::csv)
        write_series_csv(series, path, display_offset_seconds);
    else
        write_series_svg(series, path, display_offset_seconds);
}

void export_overlay(std::span<const WeeklyOverlay> overlays, const std::filesystem::path& path,
                    ExportFormat format) {
    if (format == ExportFormat::csv)
        write_overlay_csv(overlays, path);
    else
        write_overlay_svg(overlays, path);
}

std::vector<TopicSeries> read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());

    std::vector<TopicSeries> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 5)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
        auto ts = parse_utc(fields[2]);
        auto count = parse_int(fields[4]);
        if (!ts || !count)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": bad field");
        double mean = 0.0;
        if (*count > 0) {
            auto parsed = parse_double(fields[3]);
            if (!parsed)
                throw Error(Errc::malformed_record,
                            path.string() + ":" + std::to_string(line_no) + ": bad mean");
            mean = *parsed;
        }
        if (out.empty() || out.back().camera != fields[0] || out.back().key != fields[1]) {
            out.push_back({fields[0], fields[1], 0, {}});
        }
        out.back().bins.push_back({*ts, mean, *count});
    }
    for (TopicSeries& s : out)
        if (s.bins.size() >= 2) s.bin_width = s.bins[1].bin_start - s.bins[0].bin_start;
    return out;
}

} // namespace bolw
