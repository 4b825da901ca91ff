#include <gtest/gtest.h>

#include <fstream>

#include "fideval/error.hpp"
#include "fideval/evaluation.hpp"
#include "fideval/image_io.hpp"
#include "fideval/resample.hpp"
#include "oracles/study_oracle.hpp"
#include "test_support.hpp"

using namespace fideval;
using nlohmann::json;
using testing_support::random_image;
using testing_support::TempDir;

namespace {

// lr/, hr/ and sr/<method>/ with `n` images of 24x24 LR pixels.
struct Dataset {
    TempDir dir{"dataset"};

    explicit Dataset(int n) {
        for (const char* sub : {"lr", "hr", "sr/replica", "sr/noisy"}) std::filesystem::create_directories(dir / sub);
        for (int i = 0; i < n; ++i) {
            const std::string stem = "im" + std::to_string(i);
            const auto hr = random_image(72, 72, 100 + i);
            const auto lr = downsample(hr, DownsampleMethod::bicubic, 3);
            save_image(hr, dir.path() / "hr" / (stem + ".png"));
            save_image(lr, dir.path() / "lr" / (stem + ".png"));
            const auto lr_q = load_image(dir.path() / "lr" / (stem + ".png"));
            save_image(upsample_replicate(lr_q, 3), dir.path() / "sr/replica" / (stem + ".png"));
            save_image(random_image(72, 72, 900 + i), dir.path() / "sr/noisy" / (stem + ".pgm"));
        }
    }

    json manifest() const {
        return {{"lr_dir", "lr"},
                {"hr_dir", "hr"},
                {"factor", 3},
                {"methods",
                 json::array({{{"name", "replica"}, {"dir", "sr/replica"}},
                              {{"name", "noisy"}, {"dir", "sr/noisy"}},
                              {{"name", "bicubic"}, {"dir", "builtin:bicubic"}}})},
                {"overrides", {{"radius", 2}, {"border", 3}}}};
    }

    RunManifest parsed() const { return parse_manifest(manifest(), dir.path()); }
};

}  // namespace

TEST(Manifest, ResolvesPathsAndBuiltin) {
    Dataset ds(1);
    const auto m = ds.parsed();
    EXPECT_EQ(m.lr_dir, ds.dir.path() / "." / "lr");
    ASSERT_EQ(m.methods.size(), 3u);
    EXPECT_EQ(m.methods[0].name, "replica");
    EXPECT_FALSE(m.methods[0].builtin_bicubic);
    EXPECT_TRUE(m.methods[2].builtin_bicubic);
    const auto cfg = search_config_from(m);
    EXPECT_EQ(cfg.radius(), 2);
    EXPECT_EQ(cfg.border(), 3);
    EXPECT_EQ(search_config_from(m, 4, 5).radius(), 4);
    EXPECT_EQ(search_config_from(m, 4, 5).border(), 5);
}

TEST(Manifest, MethodsAsObject) {
    Dataset ds(1);
    auto j = ds.manifest();
    j["methods"] = {{"replica", "sr/replica"}, {"bicubic", "builtin:bicubic"}};
    const auto m = parse_manifest(j, ds.dir.path());
    ASSERT_EQ(m.methods.size(), 2u);
}

TEST(Manifest, Errors) {
    Dataset ds(1);
    auto no_lr = ds.manifest();
    no_lr.erase("lr_dir");
    EXPECT_THROW(parse_manifest(no_lr, ds.dir.path()), Error);

    auto missing_dir = ds.manifest();
    missing_dir["methods"].push_back({{"name", "ghost"}, {"dir", "sr/ghost"}});
    try {
        parse_manifest(missing_dir, ds.dir.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }

    auto dup = ds.manifest();
    dup["methods"].push_back({{"name", "noisy"}, {"dir", "sr/replica"}});
    EXPECT_THROW(parse_manifest(dup, ds.dir.path()), Error);

    auto none = ds.manifest();
    none["methods"] = json::array();
    EXPECT_THROW(parse_manifest(none, ds.dir.path()), Error);

    auto bad_method = ds.manifest();
    bad_method["overrides"]["downsample_methods"] = {"bicubic", "gaussian"};
    EXPECT_THROW(search_config_from(parse_manifest(bad_method, ds.dir.path())), Error);

    EXPECT_THROW(load_manifest(ds.dir / "nope.json"), Error);
}

TEST(Manifest, LoadFromFileUsesItsDirectory) {
    Dataset ds(1);
    std::ofstream(ds.dir / "manifest.json") << ds.manifest().dump();
    const auto m = load_manifest(ds.dir / "manifest.json");
    EXPECT_TRUE(std::filesystem::equivalent(m.lr_dir, ds.dir / "lr"));
}

TEST(ImagesByStem, CollisionIsError) {
    Dataset ds(2);
    EXPECT_EQ(images_by_stem(ds.dir / "lr").size(), 2u);
    std::ofstream(ds.dir / "lr" / "notes.txt") << "ignored";
    EXPECT_EQ(images_by_stem(ds.dir / "lr").size(), 2u);
    save_image(ImagePlane(3, 3, 1.0), ds.dir.path() / "lr" / "im0.pgm");
    EXPECT_THROW(images_by_stem(ds.dir / "lr"), Error);
}

TEST(RunFidelity, MatchesDirectLibraryCall) {
    Dataset ds(3);
    const auto m = ds.parsed();
    const auto cfg = search_config_from(m);
    const auto run = run_fidelity(m, cfg);
    ASSERT_TRUE(run.ok());
    ASSERT_EQ(run.methods.size(), 3u);
    for (const auto& method : run.methods) {
        ASSERT_EQ(method.items.size(), 3u);
        for (const auto& item : method.items) {
            const auto lr = load_image(ds.dir.path() / "lr" / (item.image + ".png"));
            const auto sr = method.method == "bicubic"
                                ? upsample_bicubic(lr, 3)
                                : load_image(images_by_stem(ds.dir.path() / "sr" / method.method).at(item.image));
            EXPECT_EQ(*item.value, fidelity(sr, lr, cfg)) << method.method << "/" << item.image;
        }
    }
    // Replicated LR pixels are recovered exactly by the search.
    const auto& replica = run.methods[0];
    EXPECT_EQ(replica.mean.capped, 3u);
    EXPECT_DOUBLE_EQ(replica.mean.mean, kAggregateCapDb);

    const auto j = to_json(run, cfg);
    EXPECT_EQ(j["methods"][0]["results"][0]["fd_db"], "inf");
    EXPECT_EQ(j["methods"][0]["capped"], 3);
    EXPECT_EQ(j["config"]["radius"], 2);
    EXPECT_DOUBLE_EQ(method_means_from_json(j, "mean_fd_db").at("replica"), kAggregateCapDb);
}

TEST(RunFidelity, ParallelRunIsIdentical) {
    Dataset ds(3);
    const auto m = ds.parsed();
    const auto a = to_json(run_fidelity(m, search_config_from(m, std::nullopt, std::nullopt, 1)),
                           search_config_from(m));
    const auto b = to_json(run_fidelity(m, search_config_from(m, std::nullopt, std::nullopt, 3)),
                           search_config_from(m));
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(RunFidelity, EmptyMethodDirectoryIsMethodError) {
    Dataset ds(2);
    std::filesystem::create_directories(ds.dir / "sr/empty");
    auto j = ds.manifest();
    j["methods"].push_back({{"name", "empty"}, {"dir", "sr/empty"}});
    const auto m = parse_manifest(j, ds.dir.path());
    const auto run = run_fidelity(m, search_config_from(m));
    EXPECT_FALSE(run.ok());
    EXPECT_TRUE(run.methods[0].ok());
    EXPECT_NE(run.methods[3].error.find("contains no images"), std::string::npos);
    EXPECT_TRUE(to_json(run, search_config_from(m))["methods"][3].contains("error"));
}

TEST(RunFidelity, MissingAndMismatchedItemsArePerImageErrors) {
    Dataset ds(3);
    std::filesystem::remove(ds.dir / "sr/noisy/im1.pgm");
    save_image(random_image(60, 60, 1), ds.dir.path() / "sr/noisy" / "im2.pgm");
    const auto m = ds.parsed();
    const auto run = run_fidelity(m, search_config_from(m));
    const auto& noisy = run.methods[1];
    EXPECT_FALSE(noisy.ok());
    EXPECT_TRUE(noisy.items[0].value.has_value());
    EXPECT_FALSE(noisy.items[1].value.has_value());
    EXPECT_NE(noisy.items[1].error.find("no SR result"), std::string::npos);
    EXPECT_FALSE(noisy.items[2].value.has_value());
    EXPECT_EQ(noisy.mean.count, 1u);
    EXPECT_TRUE(run.methods[0].ok());
}

TEST(RunTraditional, IdenticalIsInfiniteAndCapped) {
    Dataset ds(2);
    auto j = ds.manifest();
    j["methods"].push_back({{"name", "oracle"}, {"dir", "hr"}});
    const auto m = parse_manifest(j, ds.dir.path());
    const auto run = run_traditional(m, 2);
    ASSERT_TRUE(run.ok());
    const auto& oracle = run.methods[3];
    for (const auto& item : oracle.items) EXPECT_TRUE(is_infinite_db(*item.value));
    EXPECT_EQ(oracle.mean.capped, 2u);
    const auto& noisy = run.methods[1];
    const auto hr = load_image(ds.dir.path() / "hr/im0.png");
    const auto sr = load_image(ds.dir.path() / "sr/noisy/im0.pgm");
    EXPECT_DOUBLE_EQ(*noisy.items[0].value, psnr(sr, hr));
    const auto out = to_json(run);
    EXPECT_EQ(out["methods"][3]["results"][0]["psnr_db"], "inf");
    EXPECT_EQ(out["cap_db"], kAggregateCapDb);
}

TEST(RunTraditional, SizeMismatchIsItemErrorAndNoHrIsFatal) {
    Dataset ds(2);
    save_image(random_image(30, 30, 5), ds.dir.path() / "sr/noisy" / "im1.pgm");
    const auto run = run_traditional(ds.parsed());
    EXPECT_FALSE(run.methods[1].items[1].value.has_value());
    EXPECT_TRUE(run.methods[1].items[0].value.has_value());
    auto j = ds.manifest();
    j.erase("hr_dir");
    EXPECT_THROW(run_traditional(parse_manifest(j, ds.dir.path())), Error);
}

TEST(RunMetrics, KeysAndValues) {
    Dataset ds(2);
    const auto scores = run_metrics(ds.parsed());
    EXPECT_EQ(scores.size(), 3u * 2u * 3u);
    const auto hr = load_image(ds.dir.path() / "hr/im1.png");
    const auto sr = load_image(ds.dir.path() / "sr/noisy/im1.pgm");
    int found = 0;
    for (const auto& s : scores) {
        if (s.image != sr_image_key("noisy", "im1")) continue;
        ++found;
        if (s.metric == "psnr") EXPECT_DOUBLE_EQ(s.value, psnr(sr, hr));
        if (s.metric == "ssim") EXPECT_DOUBLE_EQ(s.value, ssim(sr, hr));
        if (s.metric == "uqi") EXPECT_DOUBLE_EQ(s.value, uqi(sr, hr));
        EXPECT_EQ(s.polarity, Polarity::higher_better);
    }
    EXPECT_EQ(found, 3);
}

namespace {

StudyConfig study_29x8() {
    StudyConfig c;
    for (int i = 0; i < 29; ++i) c.images.push_back("img" + std::to_string(i));
    c.methods = {"bicubic", "m1", "m2", "m3", "m4", "m5", "m6", "ours"};
    c.seed = 5;
    return c;
}

// Annotators always prefer the method listed later in config.methods.
std::vector<ChoiceEvent> votes(const StudyConfig& c, int annotators) {
    std::vector<ChoiceEvent> events;
    const auto rank = [&](const std::string& m) { return std::find(c.methods.begin(), c.methods.end(), m); };
    for (int a = 0; a < annotators; ++a) {
        for (const auto& p : generate_pairs(c.images, c.methods, c.seed)) {
            const Choice ch = rank(p.method_left) > rank(p.method_right) ? Choice::left : Choice::right;
            events.push_back({"a" + std::to_string(a), p.pair_id, ch, 0});
        }
    }
    return events;
}

// Scores ranking methods like the annotators (or reversed).
std::vector<MetricScore> rank_scores(const StudyConfig& c, const std::string& metric, bool reversed) {
    std::vector<MetricScore> s;
    for (std::size_t k = 0; k < c.methods.size(); ++k) {
        for (const auto& img : c.images) {
            const double v = reversed ? -static_cast<double>(k) : static_cast<double>(k);
            s.push_back({metric, sr_image_key(c.methods[k], img), v, Polarity::higher_better});
        }
    }
    return s;
}

}  // namespace

TEST(StudyReport, SubsetHas203PairsAndMatchesRecount) {
    const auto c = study_29x8();
    const auto events = votes(c, 3);
    auto scores = rank_scores(c, "good", false);
    const auto bad = rank_scores(c, "bad", true);
    scores.insert(scores.end(), bad.begin(), bad.end());
    const auto r = build_study_report(c, events, scores, "ours");
    EXPECT_EQ(r.pairs.size(), 203u);
    EXPECT_EQ(r.preference_counts.at("ours"), 203u);
    EXPECT_EQ(r.preference_counts.at("bicubic"), 0u);
    ASSERT_EQ(r.correlations.size(), 2u);
    EXPECT_EQ(r.correlations[0].metric, "bad");
    EXPECT_DOUBLE_EQ(r.correlations[0].agreement, 0.0);
    EXPECT_DOUBLE_EQ(r.correlations[1].agreement, 1.0);
    EXPECT_EQ(r.correlations[1].counted, 203u);

    const auto recount = oracle::recount_study(generate_pairs(c.images, c.methods, c.seed), events, c.threshold);
    for (const auto& p : r.pairs) EXPECT_EQ(r.study.step2.preferred.at(p.pair_id), recount.step2.at(p.pair_id));

    const auto j = to_json(r);
    EXPECT_EQ(j["pairs_analysed"], 203);
    EXPECT_EQ(j["consensus_pairs"], 203);
    EXPECT_EQ(j["subset_method"], "ours");
}

TEST(StudyReport, FullStudyAndErrors) {
    const auto c = study_29x8();
    const auto events = votes(c, 2);
    const auto r = build_study_report(c, events, {});
    EXPECT_EQ(r.pairs.size(), 812u);
    EXPECT_EQ(r.preference_counts.at("ours"), 7u * 29u);
    EXPECT_EQ(r.preference_counts.at("m1"), 1u * 29u);
    EXPECT_TRUE(r.correlations.empty());
    EXPECT_THROW(build_study_report(c, events, {}, "missing"), Error);
    // A metric missing one SR result is rejected with that key.
    auto scores = rank_scores(c, "good", false);
    scores.pop_back();
    try {
        build_study_report(c, events, scores);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ours/img28"), std::string::npos) << e.what();
    }
}

TEST(Table, FormatsColumnsAndMissingValues) {
    const std::string t = format_method_table({"bicubic", "ours"}, {{"bicubic", 31.234}, {"ours", 29.5}},
                                        {{"ours", 12}}, {{"bicubic", 27.0}});
    EXPECT_EQ(t,
              "method   fidelity_db  preference  traditional_db\n"
              "bicubic        31.23           -           27.00\n"
              "ours           29.50          12               -\n");
}

TEST(Table, CorrelationFormat) {
    const std::string t = format_correlations({{"psnr", 0.5, 10, 5, 1, 2}});
    EXPECT_EQ(t,
              "metric      agreement  counted  ties  no_consensus\n"
              "psnr           0.5000       10     1             2\n");
}
