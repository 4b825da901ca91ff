#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fideval/iqa.hpp"

namespace fideval {

/// One comparison shown to annotators: two SR results of the same source
/// image, in a fixed on-screen orientation.
struct PairRecord {
    std::string pair_id;
    std::string image;
    std::string method_left;
    std::string method_right;
    std::uint64_t assignment_seed = 0;  // draw that fixed the orientation

    friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

enum class Choice { left, right };

std::string_view to_string(Choice c) noexcept;
std::optional<Choice> parse_choice(std::string_view token) noexcept;

struct ChoiceEvent {
    std::string annotator;
    std::string pair_id;
    Choice choice = Choice::left;  // as displayed; resolved through PairRecord
    std::int64_t timestamp_ms = 0;

    friend bool operator==(const ChoiceEvent&, const ChoiceEvent&) = default;
};

/// Preferred method per pair; nullopt means no consensus.
struct GroundTruth {
    int step = 1;
    std::map<std::string, std::optional<std::string>> preferred;
};

struct StudyConfig {
    std::vector<std::string> images;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    double threshold = 0.70;
};

/// Every unordered method pair for every image, presented in a seeded
/// random order with seeded random orientation.
std::vector<PairRecord> generate_pairs(const std::vector<std::string>& images,
                                       const std::vector<std::string>& methods, std::uint64_t seed);

/// Pair lookup by id; rejects duplicate ids and identical left/right methods.
class PairIndex {
public:
    explicit PairIndex(const std::vector<PairRecord>& pairs);

    const PairRecord& at(const std::string& pair_id) const;
    bool contains(const std::string& pair_id) const { return by_id_.contains(pair_id); }
    const std::vector<PairRecord>& pairs() const noexcept { return pairs_; }

private:
    std::vector<PairRecord> pairs_;
    std::map<std::string, std::size_t> by_id_;
};

/// The method this choice favours.
const std::string& chosen_method(const PairRecord& pair, Choice c);

/// Strict majority over non-excluded annotators; equal counts (including
/// zero events) give no consensus.
std::optional<std::string> majority_vote(const std::vector<ChoiceEvent>& events_for_pair,
                                         const PairRecord& pair,
                                         const std::set<std::string>& excluded);

GroundTruth compute_ground_truth(const PairIndex& pairs, const std::vector<ChoiceEvent>& events,
                                 const std::set<std::string>& excluded, int step);

/// Fraction of the annotator's labeled consensus pairs on which they match
/// the ground truth. Throws when they labeled no consensus pair.
double annotator_agreement(const std::vector<ChoiceEvent>& annotator_events, const GroundTruth& gt,
                           const PairIndex& pairs);

struct StudyResult {
    GroundTruth step1;
    GroundTruth step2;
    std::set<std::string> outliers;
    /// Step-1 agreement per annotator; nullopt when they labeled no
    /// consensus pair (such annotators are retained).
    std::map<std::string, std::optional<double>> agreement;
};

/// Two-step ground truth: majority over everyone, drop annotators whose
/// agreement is strictly below `threshold`, majority again. One round only.
StudyResult run_study(const PairIndex& pairs, const std::vector<ChoiceEvent>& events,
                      double threshold = 0.70);

struct CorrelationReport {
    std::string metric;
    double agreement = 0.0;  // matches / counted; 0 when nothing counted
    std::size_t counted = 0;
    std::size_t matches = 0;
    std::size_t excluded_ties = 0;
    std::size_t excluded_no_consensus = 0;
};

CorrelationReport metric_hvs_correlation(const std::string& metric,
                                         const std::map<std::string, Preference>& prefs,
                                         const GroundTruth& gt, const PairIndex& pairs);

/// Key under which an SR result's score is looked up: "<method>/<image>".
std::string sr_image_key(std::string_view method, std::string_view image);

/// Per-pair preference of one metric. Throws listing every image key that
/// has no score.
std::map<std::string, Preference> metric_preferences(const std::string& metric,
                                                     const std::vector<MetricScore>& scores,
                                                     const PairIndex& pairs, double epsilon = 0.0);

/// Number of pairs whose ground truth prefers each method (zero-filled for
/// every method that appears in `pairs`).
std::map<std::string, std::size_t> preference_counts(const GroundTruth& gt, const PairIndex& pairs);

/// Pairs in which `method` is one of the two sides.
std::vector<PairRecord> pairs_with_method(const std::vector<PairRecord>& pairs, std::string_view method);

}  // namespace fideval
