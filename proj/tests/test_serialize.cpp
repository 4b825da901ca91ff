#include <gtest/gtest.h>

#include "fideval/error.hpp"
#include "fideval/serialize.hpp"

using namespace fideval;
using nlohmann::json;

TEST(Db, InfiniteIsStringInf) {
    EXPECT_EQ(db_to_json(kInfiniteDb), json("inf"));
    EXPECT_EQ(db_to_json(31.5), json(31.5));
    EXPECT_EQ(db_from_json(json("inf")), kInfiniteDb);
    EXPECT_EQ(db_from_json(json(12.25)), 12.25);
    EXPECT_THROW(db_from_json(json("nan")), Error);
    EXPECT_THROW(db_from_json(json::array()), Error);
}

TEST(FidelityRecord, SchemaAndRoundTrip) {
    FidelityResult r{kInfiniteDb, 0.9, DownsampleMethod::lanczos2, {-3, 2}, 15876};
    const auto j = fidelity_record("img7", r);
    EXPECT_EQ(j.dump(),
              R"({"evaluations":15876,"fd_db":"inf","image":"img7","method":"lanczos2","mv":[-3,2],"sigma":0.9})");
    EXPECT_EQ(fidelity_from_record(j), r);
    r.fd_db = 47.123456789;
    EXPECT_EQ(fidelity_from_record(json::parse(fidelity_record("x", r).dump())), r);
}

TEST(FidelityRecord, Rejections) {
    auto j = fidelity_record("x", FidelityResult{});
    j["method"] = "bogus";
    EXPECT_THROW(fidelity_from_record(j), Error);
    j = fidelity_record("x", FidelityResult{});
    j["mv"] = json::array({1});
    EXPECT_THROW(fidelity_from_record(j), Error);
}

TEST(ChoiceEventJson, RoundTrip) {
    const ChoiceEvent e{"ann", "p0001", Choice::right, 1700000000123};
    const json j = e;
    EXPECT_EQ(j.dump(), R"({"annotator":"ann","choice":"right","pair_id":"p0001","timestamp":1700000000123})");
    EXPECT_EQ(j.get<ChoiceEvent>(), e);
    EXPECT_THROW(json::parse(R"({"annotator":"a","pair_id":"p","choice":"up"})").get<ChoiceEvent>(), Error);
}

TEST(PairRecordJson, RoundTrip) {
    const PairRecord p{"p0003", "img", "a", "b", 77};
    EXPECT_EQ(json(p).get<PairRecord>(), p);
}

TEST(StudyConfigJson, DefaultsAndValidation) {
    const auto c = json::parse(R"({"images":["i"],"methods":["a","b"],"seed":5})").get<StudyConfig>();
    EXPECT_EQ(c.threshold, 0.70);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_THROW(json::parse(R"({"images":["i"],"methods":["a","b"],"threshold":1.5})").get<StudyConfig>(), Error);
    EXPECT_ANY_THROW(json::parse(R"({"methods":["a","b"]})").get<StudyConfig>());
}

TEST(MetricScoreJson, RoundTrip) {
    const MetricScore s{"psnr", "m/i", kInfiniteDb, Polarity::higher_better};
    const auto back = json(s).get<MetricScore>();
    EXPECT_EQ(back.value, s.value);
    EXPECT_EQ(back.polarity, s.polarity);
    EXPECT_EQ(json(s)["value"], "inf");
}

TEST(GroundTruthJson, NullForNoConsensus) {
    const GroundTruth gt{2, {{"p0", "a"}, {"p1", std::nullopt}}};
    EXPECT_EQ(json(gt).dump(), R"({"preferred":{"p0":"a","p1":null},"step":2})");
}
