#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bolw/corpus.hpp"
#include "bolw/textio.hpp"
#include "test_support.hpp"

using namespace bolw;
using namespace testsupport;

namespace {

// Small random corpus for the brute-force checks: words drawn from a pool
// with very different prevalences, three cameras.
std::vector<ImageRecord> random_corpus(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 eng(seed);
    const std::vector<std::string> pool = {"road",  "asphalt", "snow", "night",
                                           "car",   "fog",     "lane", "blizzard",
                                           "glass", "webcam"};
    std::vector<ImageRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        ImageRecord rec;
        rec.image_id = "img-" + std::to_string(i);
        rec.camera = "cam-" + std::to_string(eng() % 3);
        rec.timestamp = 1514764800 + static_cast<std::int64_t>(i) * 180;
        for (std::size_t w = 0; w < pool.size(); ++w) {
            // word w appears with probability ~ 1/(w+1), with a raw score
            if (eng() % (w + 1) == 0)
                rec.raw_labels.push_back(
                    {{w % 2 ? Service::ls2 : Service::ls1, pool[w]}, 0.1 * (w + 1)});
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace

TEST_CASE("ingest parses one record per line") {
    TempDir dir("ingest");
    const auto path = write_file(
        dir.path / "labels.jsonl",
        R"({"image_id":"a1","camera":"1137-1","timestamp":"2018-01-04T16:57:52Z","labels":[)"
        R"({"service":"LS1","text":"snow","score":0.91},)"
        R"({"service":"LS1","text":"blizzard","score":0.70},)"
        R"({"service":"LS2","text":"Blizzard","score":1.21}]})"
        "\n");

    auto result = ingest_label_records(path);
    REQUIRE(result.records.size() == 1);
    CHECK(result.issues.empty());
    const ImageRecord& rec = result.records[0];
    CHECK(rec.camera == "1137-1");
    REQUIRE(rec.raw_labels.size() == 3);
    int ls1 = 0, ls2 = 0;
    for (const auto& l : rec.raw_labels) (l.word.service == Service::ls1 ? ls1 : ls2)++;
    CHECK(ls1 == 2);
    CHECK(ls2 == 1);
}

TEST_CASE("ingest of an empty file yields an empty list") {
    TempDir dir("ingest-empty");
    auto result = ingest_label_records(write_file(dir.path / "empty.jsonl", ""));
    CHECK(result.records.empty());
    CHECK(result.issues.empty());
}

TEST_CASE("ingest rejects duplicate image ids") {
    TempDir dir("ingest-dup");
    const std::string line =
        R"({"image_id":"a1","camera":"c","timestamp":"2018-01-01T00:00:00Z","labels":[]})";
    const auto path = write_file(dir.path / "dup.jsonl", line + "\n" + line + "\n");

    CHECK(code_of([&] { ingest_label_records(path, {.strict = true}); }) ==
          Errc::duplicate_image_id);

    auto lenient = ingest_label_records(path);
    CHECK(lenient.records.size() == 1);
    REQUIRE(lenient.issues.size() == 1);
    CHECK(lenient.issues[0].line == 2);
}

TEST_CASE("ingest reports malformed lines with their line number") {
    TempDir dir("ingest-bad");
    const auto path = write_file(
        dir.path / "bad.jsonl",
        R"({"image_id":"a1","camera":"c","timestamp":"2018-01-01T00:00:00Z","labels":[]})"
        "\nnot json\n"
        R"({"image_id":"a2","camera":"c","timestamp":"not a date","labels":[]})"
        "\n");

    auto result = ingest_label_records(path);
    CHECK(result.records.size() == 1);
    REQUIRE(result.issues.size() == 2);
    CHECK(result.issues[0].line == 2);
    CHECK(result.issues[1].line == 3);

    CHECK(code_of([&] { ingest_label_records(path, {.strict = true}); }) ==
          Errc::malformed_record);
    CHECK(code_of([&] { ingest_label_records(dir.path / "missing.jsonl"); }) ==
          Errc::file_not_found);
}

TEST_CASE("ingest collapses duplicate words to the max score") {
    TempDir dir("ingest-dupword");
    const auto path = write_file(
        dir.path / "labels.jsonl",
        R"({"image_id":"a1","camera":"c","timestamp":"2018-01-01T00:00:00Z","labels":[)"
        R"({"service":"LS1","text":"snow","score":0.6},)"
        R"({"service":"LS1","text":"snow","score":0.9},)"
        R"({"service":"LS1","text":"snow","score":0.7}]})"
        "\n");
    auto result = ingest_label_records(path);
    REQUIRE(result.records.size() == 1);
    REQUIRE(result.records[0].raw_labels.size() == 1);
    CHECK(result.records[0].raw_labels[0].score == doctest::Approx(0.9));
}

TEST_CASE("binarize maps positive scores to 1 and drops zeros") {
    auto records = std::vector<ImageRecord>{
        make_record("a", "c", 0, {{"snow", 0.91}, {"fog", 0.0}}),
        make_record("b", "c", 0, {}),
    };
    auto out = binarize(records);
    REQUIRE(out.size() == 2);
    REQUIRE(out[0].raw_labels.size() == 1);
    CHECK(out[0].raw_labels[0].score == 1.0);
    CHECK(out[1].raw_labels.empty());
}

TEST_CASE("binarize is idempotent") {
    auto records = random_corpus(7, 50); // raw scores in (0, 1]
    auto once = binarize(records);
    auto twice = binarize(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        REQUIRE(once[i].raw_labels.size() == twice[i].raw_labels.size());
        for (std::size_t l = 0; l < once[i].raw_labels.size(); ++l) {
            CHECK(once[i].raw_labels[l].word == twice[i].raw_labels[l].word);
            CHECK(once[i].raw_labels[l].score == twice[i].raw_labels[l].score);
        }
    }
}

TEST_CASE("build_vocabulary counts documents per word and camera") {
    auto records = binarize(std::vector<ImageRecord>{
        make_record("a", "cam-a", 0, {{"snow", 1.0}, {"road", 1.0}}),
        make_record("b", "cam-b", 0, {{"snow", 1.0}}),
    });
    Vocabulary vocab = build_vocabulary(records, {});
    auto j = vocab.index_of({Service::ls1, "snow"});
    REQUIRE(j.has_value());
    CHECK(vocab.doc_count[*j] == 2);
    CHECK(vocab.total_images == 2);
    REQUIRE(vocab.cameras == std::vector<std::string>{"cam-a", "cam-b"});
    CHECK(vocab.camera_doc_count[*j][0] == 1);
    CHECK(vocab.camera_doc_count[*j][1] == 1);
    CHECK(vocab.camera_images[0] == 1);
    CHECK(vocab.camera_images[1] == 1);
}

TEST_CASE("blacklisted words never enter the vocabulary") {
    auto records = binarize(std::vector<ImageRecord>{
        make_record("a", "c", 0, {{"snow", 1.0}}, {{"Massachusetts Department of Transportation", 1.0}}),
    });
    Vocabulary vocab = build_vocabulary(records, default_blacklist());
    CHECK(vocab.size() == 1);
    CHECK(!vocab.index_of({Service::ls2, "Massachusetts Department of Transportation"}));
    CHECK(vocab.index_of({Service::ls1, "snow"}));
}

TEST_CASE("total image count follows the corpus size") {
    std::vector<ImageRecord> records;
    records.reserve(189498);
    for (std::size_t i = 0; i < 189498; ++i) {
        ImageRecord rec;
        rec.image_id = "img-" + std::to_string(i);
        rec.camera = "cam-" + std::to_string(i % 7);
        rec.timestamp = static_cast<std::int64_t>(i);
        if (i % 2 == 0) rec.raw_labels.push_back({{Service::ls1, "road"}, 1.0});
        records.push_back(std::move(rec));
    }
    Vocabulary vocab = build_vocabulary(records, {});
    CHECK(vocab.total_images == 189498);
}

TEST_CASE("build_vocabulary rejects an empty corpus") {
    CHECK(code_of([] { build_vocabulary({}, {}); }) == Errc::empty_corpus);
}

TEST_CASE("vocabulary order is lexicographic and input-order independent") {
    auto records = binarize(random_corpus(11, 200));
    Vocabulary vocab = build_vocabulary(records, {});
    CHECK(std::is_sorted(vocab.words.begin(), vocab.words.end()));

    auto shuffled = records;
    std::mt19937_64 eng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), eng);
    Vocabulary vocab2 = build_vocabulary(shuffled, {});
    CHECK(vocab.hash() == vocab2.hash());
    CHECK(vocab.doc_count == vocab2.doc_count);
}

TEST_CASE("document_frequency matches a brute-force scan") {
    auto records = binarize(random_corpus(13, 300));
    Vocabulary vocab = build_vocabulary(records, {});
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        std::int64_t hits = 0;
        for (const ImageRecord& rec : records)
            for (const ScoredLabel& l : rec.raw_labels)
                if (l.word == vocab.words[j]) {
                    ++hits;
                    break;
                }
        CHECK(document_frequency(vocab, j) ==
              doctest::Approx(static_cast<double>(hits) / 300.0).epsilon(1e-12));
        CHECK(vocab.doc_count[j] == hits);
    }
    CHECK(code_of([&] { document_frequency(vocab, vocab.size()); }) ==
          Errc::index_out_of_range);
}

TEST_CASE("document_frequency edge ratios") {
    std::vector<ImageRecord> records;
    for (std::size_t i = 0; i < 100; ++i) {
        auto rec = make_record("img-" + std::to_string(i), "c", 0, {{"road", 1.0}});
        if (i == 0) rec.raw_labels.push_back({{Service::ls1, "rare"}, 1.0});
        records.push_back(std::move(rec));
    }
    Vocabulary vocab = build_vocabulary(binarize(records), {});
    CHECK(document_frequency(vocab, *vocab.index_of({Service::ls1, "road"})) == 1.0);
    CHECK(document_frequency(vocab, *vocab.index_of({Service::ls1, "rare"})) == 0.01);
}

TEST_CASE("frequency_filter keeps the inclusive boundary") {
    // 100000 records: "road" everywhere, "mid" in exactly 1 (f = 1e-5),
    // "low" would need a fractional record so use cutoff relative to "mid".
    std::vector<ImageRecord> records;
    records.reserve(100000);
    for (std::size_t i = 0; i < 100000; ++i) {
        auto rec = make_record("img-" + std::to_string(i), "c", 0, {{"road", 1.0}});
        if (i == 0) rec.raw_labels.push_back({{Service::ls1, "mid"}, 1.0});
        records.push_back(std::move(rec));
    }
    Vocabulary vocab = build_vocabulary(binarize(records), {});
    Vocabulary filtered = frequency_filter(vocab, 1e-5);
    CHECK(filtered.index_of({Service::ls1, "mid"}).has_value()); // f_j == cutoff stays
    CHECK(filtered.index_of({Service::ls1, "road"}).has_value());

    Vocabulary harsher = frequency_filter(vocab, 1.000001e-5);
    CHECK(!harsher.index_of({Service::ls1, "mid"}).has_value());
}

TEST_CASE("frequency_filter basics") {
    auto records = binarize(random_corpus(17, 120));
    Vocabulary vocab = build_vocabulary(records, {});

    Vocabulary unfiltered = frequency_filter(vocab, 0.0);
    CHECK(unfiltered.size() == vocab.size());
    CHECK(unfiltered.hash() == vocab.hash());
    CHECK(unfiltered.total_images == vocab.total_images);

    CHECK(code_of([&] { frequency_filter(vocab, 1.1); }) == Errc::all_words_filtered);
}

TEST_CASE("filter composition: c1 then c2>=c1 equals a single filter at c2") {
    auto records = binarize(random_corpus(19, 250));
    Vocabulary vocab = build_vocabulary(records, {});
    const double c1 = 0.05, c2 = 0.3;
    Vocabulary two_step = frequency_filter(frequency_filter(vocab, c1), c2);
    Vocabulary one_step = frequency_filter(vocab, c2);
    CHECK(two_step.hash() == one_step.hash());
    CHECK(two_step.doc_count == one_step.doc_count);
}

TEST_CASE("to_bags keeps retained labels with weight 1") {
    // The 24-label fixture: 14 LS1 words + 10 LS2 words on one image.
    std::vector<std::pair<std::string, double>> ls1 = {
        {"snow", 0.91}, {"infrastructure", 0.87}, {"mode of transport", 0.87},
        {"lane", 0.84}, {"winter storm", 0.84}, {"road", 0.83}, {"transport", 0.82},
        {"structure", 0.77}, {"phenomenon", 0.75}, {"blizzard", 0.7}, {"highway", 0.71},
        {"freezing", 0.65}, {"automotive exterior", 0.57}, {"glass", 0.55}};
    std::vector<std::pair<std::string, double>> ls2 = {
        {"Blizzard", 1.21}, {"Lane", 1.10}, {"Car", 1.0}, {"Transport", 1.03},
        {"Snow", 0.75}, {"Highway", 0.75}, {"Fog", 0.72}, {"Glass", 0.67},
        {"Freezing", 0.62}, {"Massachusetts Department of Transportation", 0.32}};
    auto records =
        binarize(std::vector<ImageRecord>{make_record("a", "1137-1", 0, ls1, ls2)});

    Vocabulary vocab = build_vocabulary(records, {});
    auto bags = to_bags(records, vocab);
    REQUIRE(bags.size() == 1);
    CHECK(bags[0].weight == 24.0);
    CHECK(bags[0].entries.size() == 24);

    // Same corpus under the watermark blacklist: that word has no column.
    Vocabulary clean = build_vocabulary(records, default_blacklist());
    auto clean_bags = to_bags(records, clean);
    CHECK(clean_bags[0].weight == 23.0);
}

TEST_CASE("to_bags drops labels missing from the vocabulary") {
    auto records = binarize(std::vector<ImageRecord>{
        make_record("a", "c", 0, {{"snow", 1.0}}),
        make_record("b", "c", 0, {{"snow", 1.0}, {"onlyhere", 1.0}}),
        make_record("c", "c", 0, {{"onlyhere", 0.0}}),
    });
    Vocabulary vocab = build_vocabulary(records, {});
    Vocabulary filtered = frequency_filter(vocab, 0.5); // drops f=1/3 "onlyhere"
    REQUIRE(filtered.size() == 1);
    auto bags = to_bags(records, filtered);
    REQUIRE(bags.size() == 3);
    CHECK(bags[0].weight == 1.0);
    CHECK(bags[1].weight == 1.0); // "onlyhere" silently dropped
    CHECK(bags[2].weight == 0.0); // record emptied by binarization: empty bag
    CHECK(bags[2].entries.empty());
}

TEST_CASE("bag entries match a brute-force membership test") {
    auto records = binarize(random_corpus(23, 150));
    Vocabulary vocab = build_vocabulary(records, {});
    auto bags = to_bags(records, vocab);
    REQUIRE(bags.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            bool present = false;
            for (const ScoredLabel& l : records[i].raw_labels)
                if (l.word == vocab.words[j]) present = true;
            CHECK(bags[i].has(j) == present);
        }
    }
}

TEST_CASE("sum of doc counts equals total bag size on the unfiltered vocabulary") {
    auto records = binarize(random_corpus(29, 200));
    Vocabulary vocab = build_vocabulary(records, {});
    auto bags = to_bags(records, vocab);
    std::int64_t count_sum = 0;
    for (std::int64_t n : vocab.doc_count) count_sum += n;
    std::int64_t bag_sum = 0;
    for (const auto& bag : bags) bag_sum += static_cast<std::int64_t>(bag.entries.size());
    CHECK(count_sum == bag_sum);
}

TEST_CASE("bag weight equals the L1 norm of its entries") {
    auto records = binarize(random_corpus(31, 100));
    Vocabulary vocab = build_vocabulary(records, {});
    for (const auto& bag : to_bags(records, vocab)) {
        double l1 = 0.0;
        for (const auto& [j, v] : bag.entries) l1 += std::abs(v);
        CHECK(bag.weight == doctest::Approx(l1).epsilon(1e-9));
    }
}

TEST_CASE("vocabulary CSV round trip") {
    TempDir dir("vocab-csv");
    auto records = binarize(std::vector<ImageRecord>{
        make_record("a", "c", 0, {{"snow, heavy", 1.0}, {"road", 1.0}}),
        make_record("b", "c", 0, {{"road", 1.0}}),
    });
    Vocabulary vocab = build_vocabulary(records, {});
    write_vocabulary_csv(vocab, dir.path / "vocab.csv");
    Vocabulary loaded = read_vocabulary_csv(dir.path / "vocab.csv");
    CHECK(loaded.hash() == vocab.hash());
    CHECK(loaded.doc_count == vocab.doc_count);
    CHECK(loaded.total_images == vocab.total_images);
}
