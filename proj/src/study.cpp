#include "fideval/study.hpp"

#include <algorithm>
#include <cstdio>

#include "fideval/error.hpp"
#include "fideval/rng.hpp"

namespace fideval {

namespace {

std::string format_pair_id(std::size_t index, std::size_t total) {
    int digits = 4;
    for (std::size_t t = total; t >= 10000; t /= 10) ++digits;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p%0*zu", digits, index);
    return buf;
}

template <typename T>
void require_unique(const std::vector<T>& items, const char* what) {
    std::set<T> seen;
    for (const auto& item : items) {
        if (!seen.insert(item).second) throw PreconditionError(std::string("duplicate ") + what + " '" + item + "'");
    }
}

// Groups events by pair, validating ids and the one-choice-per-annotator rule.
std::map<std::string, std::vector<ChoiceEvent>> events_by_pair(const PairIndex& pairs,
                                                               const std::vector<ChoiceEvent>& events) {
    std::map<std::string, std::vector<ChoiceEvent>> grouped;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : events) {
        if (!pairs.contains(e.pair_id)) throw Error("event references unknown pair '" + e.pair_id + "'");
        if (!seen.emplace(e.annotator, e.pair_id).second) {
            throw Error("annotator '" + e.annotator + "' has more than one choice for pair '" + e.pair_id + "'");
        }
        grouped[e.pair_id].push_back(e);
    }
    return grouped;
}

}  // namespace

std::string_view to_string(Choice c) noexcept { return c == Choice::left ? "left" : "right"; }

std::optional<Choice> parse_choice(std::string_view token) noexcept {
    if (token == "left") return Choice::left;
    if (token == "right") return Choice::right;
    return std::nullopt;
}

std::vector<PairRecord> generate_pairs(const std::vector<std::string>& images,
                                       const std::vector<std::string>& methods, std::uint64_t seed) {
    if (methods.size() < 2) throw PreconditionError("at least two methods are required to form pairs");
    require_unique(images, "image id");
    require_unique(methods, "method id");

    std::vector<PairRecord> pairs;
    for (const auto& image : images) {
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = i + 1; j < methods.size(); ++j) {
                pairs.push_back({{}, image, methods[i], methods[j], 0});
            }
        }
    }
    Rng rng(seed);
    rng.shuffle(std::span(pairs));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        auto& p = pairs[k];
        p.assignment_seed = rng.next();
        if (p.assignment_seed & 1u) std::swap(p.method_left, p.method_right);
        p.pair_id = format_pair_id(k, pairs.size());
    }
    return pairs;
}

PairIndex::PairIndex(const std::vector<PairRecord>& pairs) : pairs_(pairs) {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const auto& p = pairs_[i];
        if (p.method_left == p.method_right) {
            throw PreconditionError("pair '" + p.pair_id + "' compares method '" + p.method_left + "' with itself");
        }
        if (!by_id_.emplace(p.pair_id, i).second) throw PreconditionError("duplicate pair id '" + p.pair_id + "'");
    }
}

const PairRecord& PairIndex::at(const std::string& pair_id) const {
    const auto it = by_id_.find(pair_id);
    if (it == by_id_.end()) throw Error("unknown pair id '" + pair_id + "'");
    return pairs_[it->second];
}

const std::string& chosen_method(const PairRecord& pair, Choice c) {
    return c == Choice::left ? pair.method_left : pair.method_right;
}

std::optional<std::string> majority_vote(const std::vector<ChoiceEvent>& events_for_pair,
                                         const PairRecord& pair,
                                         const std::set<std::string>& excluded) {
    std::size_t left = 0;
    std::size_t right = 0;
    for (const auto& e : events_for_pair) {
        if (excluded.contains(e.annotator)) continue;
        (e.choice == Choice::left ? left : right) += 1;
    }
    if (left > right) return pair.method_left;
    if (right > left) return pair.method_right;
    return std::nullopt;
}

GroundTruth compute_ground_truth(const PairIndex& pairs, const std::vector<ChoiceEvent>& events,
                                 const std::set<std::string>& excluded, int step) {
    const auto grouped = events_by_pair(pairs, events);
    static const std::vector<ChoiceEvent> kNone;
    GroundTruth gt;
    gt.step = step;
    for (const auto& p : pairs.pairs()) {
        const auto it = grouped.find(p.pair_id);
        gt.preferred[p.pair_id] = majority_vote(it == grouped.end() ? kNone : it->second, p, excluded);
    }
    return gt;
}

double annotator_agreement(const std::vector<ChoiceEvent>& annotator_events, const GroundTruth& gt,
                           const PairIndex& pairs) {
    std::size_t eligible = 0;
    std::size_t agree = 0;
    for (const auto& e : annotator_events) {
        const auto it = gt.preferred.find(e.pair_id);
        if (it == gt.preferred.end() || !it->second) continue;
        ++eligible;
        if (chosen_method(pairs.at(e.pair_id), e.choice) == *it->second) ++agree;
    }
    if (eligible == 0) throw Error("no eligible pairs: annotator labeled no pair with a consensus");
    return static_cast<double>(agree) / static_cast<double>(eligible);
}

StudyResult run_study(const PairIndex& pairs, const std::vector<ChoiceEvent>& events, double threshold) {
    std::map<std::string, std::vector<ChoiceEvent>> by_annotator;
    for (const auto& e : events) by_annotator[e.annotator].push_back(e);
    if (by_annotator.empty()) throw Error("study has no annotators");

    StudyResult r;
    r.step1 = compute_ground_truth(pairs, events, {}, 1);
    for (const auto& [annotator, own] : by_annotator) {
        try {
            const double a = annotator_agreement(own, r.step1, pairs);
            r.agreement[annotator] = a;
            if (a < threshold) r.outliers.insert(annotator);
        } catch (const Error&) {
            r.agreement[annotator] = std::nullopt;
        }
    }
    if (r.outliers.size() == by_annotator.size()) throw Error("no annotators survive threshold");
    r.step2 = compute_ground_truth(pairs, events, r.outliers, 2);
    return r;
}

CorrelationReport metric_hvs_correlation(const std::string& metric,
                                         const std::map<std::string, Preference>& prefs,
                                         const GroundTruth& gt, const PairIndex& pairs) {
    CorrelationReport rep;
    rep.metric = metric;
    for (const auto& [pair_id, pref] : prefs) {
        const PairRecord& pair = pairs.at(pair_id);
        const auto it = gt.preferred.find(pair_id);
        if (it == gt.preferred.end()) throw Error("pair '" + pair_id + "' has no ground truth entry");
        if (!it->second) {
            ++rep.excluded_no_consensus;
            continue;
        }
        if (pref == Preference::tie) {
            ++rep.excluded_ties;
            continue;
        }
        ++rep.counted;
        const std::string& metric_pick = pref == Preference::left ? pair.method_left : pair.method_right;
        if (metric_pick == *it->second) ++rep.matches;
    }
    if (rep.counted > 0) rep.agreement = static_cast<double>(rep.matches) / static_cast<double>(rep.counted);
    return rep;
}

std::string sr_image_key(std::string_view method, std::string_view image) {
    std::string key(method);
    key += '/';
    key += image;
    return key;
}

std::map<std::string, Preference> metric_preferences(const std::string& metric,
                                                     const std::vector<MetricScore>& scores,
                                                     const PairIndex& pairs, double epsilon) {
    std::map<std::string, const MetricScore*> by_image;
    for (const auto& s : scores) {
        if (s.metric != metric) continue;
        if (!by_image.emplace(s.image, &s).second) {
            throw Error("metric '" + metric + "' has more than one score for image '" + s.image + "'");
        }
    }
    std::set<std::string> missing;
    std::map<std::string, Preference> out;
    for (const auto& p : pairs.pairs()) {
        const auto l = by_image.find(sr_image_key(p.method_left, p.image));
        const auto r = by_image.find(sr_image_key(p.method_right, p.image));
        if (l == by_image.end()) missing.insert(sr_image_key(p.method_left, p.image));
        if (r == by_image.end()) missing.insert(sr_image_key(p.method_right, p.image));
        if (l != by_image.end() && r != by_image.end()) {
            out[p.pair_id] = metric_preference(*l->second, *r->second, epsilon);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error("metric '" + metric + "' is missing scores for: " + list);
    }
    return out;
}

std::map<std::string, std::size_t> preference_counts(const GroundTruth& gt, const PairIndex& pairs) {
    std::map<std::string, std::size_t> counts;
    for (const auto& p : pairs.pairs()) {
        counts.try_emplace(p.method_left, 0);
        counts.try_emplace(p.method_right, 0);
    }
    for (const auto& [pair_id, winner] : gt.preferred) {
        if (winner) ++counts[*winner];
    }
    return counts;
}

std::vector<PairRecord> pairs_with_method(const std::vector<PairRecord>& pairs, std::string_view method) {
    std::vector<PairRecord> out;
    std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
                 [&](const PairRecord& p) { return p.method_left == method || p.method_right == method; });
    return out;
}

}  // namespace fideval
