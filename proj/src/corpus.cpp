#include "bolw/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "bolw/hash.hpp"
#include "bolw/textio.hpp"
#include "bolw/timeutil.hpp"

namespace bolw {

std::string_view to_string(Service s) {
    return s == Service::ls1 ? "LS1" : "LS2";
}

std::optional<Service> service_from_string(std::string_view s) {
    if (s == "LS1") return Service::ls1;
    if (s == "LS2") return Service::ls2;
    return std::nullopt;
}

std::string LabelWord::rendered() const {
    std::string out(to_string(service));
    out += ": ";
    out += text;
    return out;
}

namespace {

ImageRecord parse_record_line(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record,
                    "line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    auto fail = [&](const std::string& why) -> Error {
        return Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": " + why);
    };
    if (!j.is_object()) throw fail("expected a JSON object");

    // Identifiers and label text end up in line-oriented CSV artifacts.
    auto has_control = [](std::string_view s) {
        for (unsigned char c : s)
            if (c < 0x20) return true;
        return false;
    };

    ImageRecord rec;
    if (!j.contains("image_id") || !j["image_id"].is_string() ||
        j["image_id"].get<std::string>().empty())
        throw fail("missing or invalid image_id");
    rec.image_id = j["image_id"].get<std::string>();
    if (has_control(rec.image_id)) throw fail("image_id contains control characters");

    if (!j.contains("camera") || !j["camera"].is_string() ||
        j["camera"].get<std::string>().empty())
        throw fail("missing or invalid camera");
    rec.camera = j["camera"].get<std::string>();
    if (has_control(rec.camera)) throw fail("camera contains control characters");

    if (!j.contains("timestamp") || !j["timestamp"].is_string())
        throw fail("missing or invalid timestamp");
    auto ts = parse_utc(j["timestamp"].get<std::string>());
    if (!ts) throw fail("timestamp is not ISO-8601 UTC: " + j["timestamp"].get<std::string>());
    rec.timestamp = *ts;

    if (!j.contains("labels") || !j["labels"].is_array()) throw fail("missing labels array");
    for (const auto& lj : j["labels"]) {
        if (!lj.is_object() || !lj.contains("service") || !lj.contains("text") ||
            !lj.contains("score"))
            throw fail("label entries need service, text and score");
        if (!lj["service"].is_string() || !lj["text"].is_string() || !lj["score"].is_number())
            throw fail("label entry has wrong field types");
        auto service = service_from_string(lj["service"].get<std::string>());
        if (!service) throw fail("unknown service: " + lj["service"].get<std::string>());
        std::string text(trim(lj["text"].get<std::string>()));
        if (text.empty()) throw fail("label text is empty");
        if (has_control(text)) throw fail("label text contains control characters");
        const double score = lj["score"].get<double>();
        if (!(score >= 0.0)) throw fail("label score must be >= 0");
        rec.raw_labels.push_back({LabelWord{*service, std::move(text)}, score});
    }

    // Duplicate words within one record collapse, keeping the max score.
    std::sort(rec.raw_labels.begin(), rec.raw_labels.end(),
              [](const ScoredLabel& a, const ScoredLabel& b) {
                  return a.word != b.word ? a.word < b.word : a.score > b.score;
              });
    rec.raw_labels.erase(std::unique(rec.raw_labels.begin(), rec.raw_labels.end(),
                                     [](const ScoredLabel& a, const ScoredLabel& b) {
                                         return a.word == b.word;
                                     }),
                         rec.raw_labels.end());
    return rec;
}

} // namespace

IngestResult ingest_label_records(const std::filesystem::path& path,
                                  const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());

    IngestResult result;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            ImageRecord rec = parse_record_line(line, line_no);
            if (!seen_ids.insert(rec.image_id).second)
                throw Error(Errc::duplicate_image_id, "line " + std::to_string(line_no) +
                                                          ": duplicate image_id " + rec.image_id);
            result.records.push_back(std::move(rec));
        } catch (const Error& e) {
            if (options.strict) throw;
            result.issues.push_back({line_no, e.what()});
        }
    }
    return result;
}

std::vector<ImageRecord> binarize(std::vector<ImageRecord> records) {
    for (ImageRecord& rec : records) {
        std::erase_if(rec.raw_labels, [](const ScoredLabel& l) { return l.score == 0.0; });
        for (ScoredLabel& l : rec.raw_labels) l.score = 1.0;
    }
    return records;
}

std::optional<std::size_t> Vocabulary::index_of(const LabelWord& w) const {
    auto it = std::lower_bound(words.begin(), words.end(), w);
    if (it == words.end() || *it != w) return std::nullopt;
    return static_cast<std::size_t>(it - words.begin());
}

std::optional<std::size_t> Vocabulary::camera_index(std::string_view camera) const {
    auto it = std::lower_bound(cameras.begin(), cameras.end(), camera);
    if (it == cameras.end() || *it != camera) return std::nullopt;
    return static_cast<std::size_t>(it - cameras.begin());
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const LabelWord& w : words) {
        h = fnv1a64(w.rendered(), h);
        h = fnv1a64(std::string_view("\n", 1), h);
    }
    return h;
}

std::vector<std::string> default_blacklist() {
    return {"massachusetts department of transportation"};
}

Vocabulary build_vocabulary(std::span<const ImageRecord> records,
                            std::span<const std::string> blacklist) {
    if (records.empty()) throw Error(Errc::empty_corpus, "no records");

    std::vector<std::string> patterns;
    patterns.reserve(blacklist.size());
    for (const std::string& p : blacklist) patterns.push_back(to_lower(p));
    auto blacklisted = [&](const LabelWord& w) {
        const std::string lowered = to_lower(w.rendered());
        for (const std::string& p : patterns)
            if (!p.empty() && lowered.find(p) != std::string::npos) return true;
        return false;
    };

    Vocabulary vocab;
    vocab.total_images = static_cast<std::int64_t>(records.size());

    // Pass 1: collect the distinct retained words and the camera set.
    std::unordered_set<std::string> seen;
    std::unordered_set<std::string> camera_names;
    for (const ImageRecord& rec : records) {
        camera_names.insert(rec.camera);
        for (const ScoredLabel& l : rec.raw_labels) {
            std::string key = l.word.rendered();
            if (seen.contains(key)) continue;
            if (blacklisted(l.word)) continue;
            seen.insert(std::move(key));
            vocab.words.push_back(l.word);
        }
    }
    std::sort(vocab.words.begin(), vocab.words.end());
    vocab.cameras.assign(camera_names.begin(), camera_names.end());
    std::sort(vocab.cameras.begin(), vocab.cameras.end());

    const std::size_t m = vocab.words.size();
    const std::size_t c = vocab.cameras.size();
    vocab.doc_count.assign(m, 0);
    vocab.camera_images.assign(c, 0);
    vocab.camera_doc_count.assign(m, std::vector<std::int64_t>(c, 0));

    // Pass 2: document counts. A record contributes at most 1 per word even
    // if ingest left duplicate words (it doesn't, but counts stay honest).
    for (const ImageRecord& rec : records) {
        const std::size_t cam = *vocab.camera_index(rec.camera);
        vocab.camera_images[cam] += 1;
        for (const ScoredLabel& l : rec.raw_labels) {
            auto j = vocab.index_of(l.word);
            if (!j) continue;
            vocab.doc_count[*j] += 1;
            vocab.camera_doc_count[*j][cam] += 1;
        }
    }
    return vocab;
}

double document_frequency(const Vocabulary& vocab, std::size_t j) {
    if (j >= vocab.size())
        throw Error(Errc::index_out_of_range, "word index " + std::to_string(j));
    return static_cast<double>(vocab.doc_count[j]) / static_cast<double>(vocab.total_images);
}

Vocabulary frequency_filter(const Vocabulary& vocab, double cutoff) {
    Vocabulary out;
    out.cameras = vocab.cameras;
    out.camera_images = vocab.camera_images;
    out.total_images = vocab.total_images;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        if (document_frequency(vocab, j) >= cutoff) {
            out.words.push_back(vocab.words[j]);
            out.doc_count.push_back(vocab.doc_count[j]);
            out.camera_doc_count.push_back(vocab.camera_doc_count[j]);
        }
    }
    if (out.words.empty())
        throw Error(Errc::all_words_filtered,
                    "no word has document frequency >= " + format_double(cutoff));
    return out;
}

bool BagOfLabelWords::has(std::size_t j) const {
    return value(j) != 0.0;
}

double BagOfLabelWords::value(std::size_t j) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), j,
                               [](const auto& e, std::size_t jj) { return e.first < jj; });
    if (it == entries.end() || it->first != j) return 0.0;
    return it->second;
}

std::vector<BagOfLabelWords> to_bags(std::span<const ImageRecord> records,
                                     const Vocabulary& vocab) {
    std::vector<BagOfLabelWords> bags;
    bags.reserve(records.size());
    for (const ImageRecord& rec : records) {
        BagOfLabelWords bag;
        for (const ScoredLabel& l : rec.raw_labels) {
            auto j = vocab.index_of(l.word);
            if (!j) continue;
            bag.entries.emplace_back(static_cast<std::uint32_t>(*j), 1.0);
        }
        std::sort(bag.entries.begin(), bag.entries.end());
        bag.weight = static_cast<double>(bag.entries.size());
        bags.push_back(std::move(bag));
    }
    return bags;
}

void write_vocabulary_csv(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << "index,service,text,n_j,f_j\n";
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        out << (j + 1) << ',' << to_string(vocab.words[j].service) << ','
            << csv_escape(vocab.words[j].text) << ',' << vocab.doc_count[j] << ','
            << format_double(document_frequency(vocab, j)) << '\n';
    }
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

Vocabulary read_vocabulary_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());
    Vocabulary vocab;
    std::string line;
    std::size_t line_no = 0;
    double max_f = 0.0;
    std::int64_t n_at_max = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue; // header
        auto fields = csv_split(line);
        if (fields.size() != 5)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
        auto service = service_from_string(fields[1]);
        auto n_j = parse_int(fields[3]);
        auto f_j = parse_double(fields[4]);
        if (!service || !n_j || !f_j)
            throw Error(Errc::malformed_record,
                        path.string() + ":" + std::to_string(line_no) + ": bad field");
        vocab.words.push_back({*service, fields[2]});
        vocab.doc_count.push_back(*n_j);
        if (*f_j > max_f) {
            max_f = *f_j;
            n_at_max = *n_j;
        }
    }
    if (vocab.words.empty()) throw Error(Errc::empty_corpus, "empty vocabulary: " + path.string());
    if (!std::is_sorted(vocab.words.begin(), vocab.words.end()))
        throw Error(Errc::malformed_record, path.string() + ": words not in index order");
    // N is not a column; recover it from the most frequent word.
    if (max_f > 0.0)
        vocab.total_images = static_cast<std::int64_t>(
            std::llround(static_cast<double>(n_at_max) / max_f));
    return vocab;
}

} // namespace bolw
