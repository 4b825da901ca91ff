#include "fideval/serialize.hpp"

#include "fideval/error.hpp"

namespace fideval {

using nlohmann::json;

json db_to_json(double db) {
    if (is_infinite_db(db)) return "inf";
    return db;
}

double db_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteDb;
    if (j.is_number()) return j.get<double>();
    throw Error("expected a dB value (number or \"inf\")");
}

void to_json(json& j, const MotionVector& mv) { j = json::array({mv.dx, mv.dy}); }

void from_json(const json& j, MotionVector& mv) {
    if (!j.is_array() || j.size() != 2) throw Error("motion vector must be [dx, dy]");
    mv.dx = j[0].get<int>();
    mv.dy = j[1].get<int>();
}

json fidelity_record(const std::string& image, const FidelityResult& r) {
    return {{"image", image},
            {"fd_db", db_to_json(r.fd_db)},
            {"sigma", r.best_sigma},
            {"method", std::string(to_string(r.best_method))},
            {"mv", r.best_mv},
            {"evaluations", r.evaluations}};
}

FidelityResult fidelity_from_record(const json& j) {
    FidelityResult r;
    r.fd_db = db_from_json(j.at("fd_db"));
    r.best_sigma = j.at("sigma").get<double>();
    const auto m = parse_method(j.at("method").get<std::string>());
    if (!m) throw Error("unknown down-sampling method in fidelity record");
    r.best_method = *m;
    r.best_mv = j.at("mv").get<MotionVector>();
    r.evaluations = j.at("evaluations").get<std::uint64_t>();
    return r;
}

void to_json(json& j, const MetricScore& s) {
    j = {{"metric", s.metric},
         {"image", s.image},
         {"value", db_to_json(s.value)},
         {"polarity", std::string(to_string(s.polarity))}};
}

void from_json(const json& j, MetricScore& s) {
    s.metric = j.at("metric").get<std::string>();
    s.image = j.at("image").get<std::string>();
    s.value = db_from_json(j.at("value"));
    const auto p = parse_polarity(j.at("polarity").get<std::string>());
    if (!p) throw Error("unknown polarity");
    s.polarity = *p;
}

void to_json(json& j, const PairRecord& p) {
    j = {{"pair_id", p.pair_id},
         {"image", p.image},
         {"method_left", p.method_left},
         {"method_right", p.method_right},
         {"assignment_seed", p.assignment_seed}};
}

void from_json(const json& j, PairRecord& p) {
    p.pair_id = j.at("pair_id").get<std::string>();
    p.image = j.at("image").get<std::string>();
    p.method_left = j.at("method_left").get<std::string>();
    p.method_right = j.at("method_right").get<std::string>();
    p.assignment_seed = j.value("assignment_seed", std::uint64_t{0});
}

void to_json(json& j, const ChoiceEvent& e) {
    j = {{"annotator", e.annotator},
         {"pair_id", e.pair_id},
         {"choice", std::string(to_string(e.choice))},
         {"timestamp", e.timestamp_ms}};
}

void from_json(const json& j, ChoiceEvent& e) {
    e.annotator = j.at("annotator").get<std::string>();
    e.pair_id = j.at("pair_id").get<std::string>();
    const auto c = parse_choice(j.at("choice").get<std::string>());
    if (!c) throw Error("choice must be \"left\" or \"right\"");
    e.choice = *c;
    e.timestamp_ms = j.value("timestamp", std::int64_t{0});
}

void to_json(json& j, const StudyConfig& c) {
    j = {{"images", c.images}, {"methods", c.methods}, {"seed", c.seed}, {"threshold", c.threshold}};
}

void from_json(const json& j, StudyConfig& c) {
    c.images = j.at("images").get<std::vector<std::string>>();
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.threshold = j.value("threshold", 0.70);
    if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw Error("threshold must lie in [0, 1]");
}

void to_json(json& j, const GroundTruth& gt) {
    json pref = json::object();
    for (const auto& [pair_id, winner] : gt.preferred) {
        pref[pair_id] = winner ? json(*winner) : json(nullptr);
    }
    j = {{"step", gt.step}, {"preferred", pref}};
}

void to_json(json& j, const CorrelationReport& r) {
    j = {{"metric", r.metric},
         {"agreement", r.agreement},
         {"counted", r.counted},
         {"matches", r.matches},
         {"excluded_ties", r.excluded_ties},
         {"excluded_no_consensus", r.excluded_no_consensus}};
}

}  // namespace fideval
