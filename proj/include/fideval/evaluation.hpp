#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fideval/decibels.hpp"
#include "fideval/fidelity.hpp"
#include "fideval/iqa.hpp"
#include "fideval/study.hpp"

namespace fideval {

/// An SR method's outputs: a directory of HR images named by LR stem, or the
/// built-in bicubic baseline (computed from the LR images on the fly).
struct MethodSource {
    std::string name;
    std::filesystem::path dir;
    bool builtin_bicubic = false;
};

/// Dataset layout for batch commands. Relative paths in the JSON are
/// resolved against `dataset_root`, which itself is relative to the
/// manifest file.
///
///   {"dataset_root": ".", "lr_dir": "lr", "hr_dir": "hr", "factor": 3,
///    "output": "out",
///    "methods": [{"name": "bicubic", "dir": "builtin:bicubic"},
///                {"name": "mine", "dir": "sr/mine"}],
///    "overrides": {"radius": 10, "border": 20, "sigmas": [...],
///                  "downsample_methods": [...]}}
struct RunManifest {
    std::filesystem::path dataset_root;
    std::filesystem::path lr_dir;
    std::filesystem::path hr_dir;  // originals; optional for fidelity
    std::vector<MethodSource> methods;
    int factor = FidelitySearchConfig::kDefaultFactor;
    std::filesystem::path output_dir;
    nlohmann::json overrides = nlohmann::json::object();
};

RunManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

/// Image files (png/pgm) in `dir` keyed by filename stem. Two files with
/// one stem are an error.
std::map<std::string, std::filesystem::path> images_by_stem(const std::filesystem::path& dir);

/// Search config from manifest overrides; explicit arguments win over them.
FidelitySearchConfig search_config_from(const RunManifest& m, std::optional<int> radius = std::nullopt,
                                        std::optional<int> border = std::nullopt, int jobs = 1);

/// One image's outcome for one method: a value or an error message.
template <typename T>
struct ItemOutcome {
    std::string image;
    std::optional<T> value;
    std::string error;
};

template <typename T>
struct MethodOutcome {
    std::string method;
    std::vector<ItemOutcome<T>> items;
    std::string error;  // method-level failure (e.g. empty directory)
    CappedMean mean;
    bool ok() const;
};

struct FidelityRun {
    std::vector<MethodOutcome<FidelityResult>> methods;
    bool ok() const;
};

struct TraditionalRun {
    std::vector<MethodOutcome<double>> methods;
    bool ok() const;
};

FidelityRun run_fidelity(const RunManifest& m, const FidelitySearchConfig& cfg);
TraditionalRun run_traditional(const RunManifest& m, int jobs = 1);

/// PSNR, SSIM and UQI of every SR result against its original, keyed by
/// sr_image_key(method, image).
std::vector<MetricScore> run_metrics(const RunManifest& m, int jobs = 1);

nlohmann::json to_json(const FidelityRun& run, const FidelitySearchConfig& cfg);
nlohmann::json to_json(const TraditionalRun& run);

/// Per-method means read back from the JSON written for the two runs above.
std::map<std::string, double> method_means_from_json(const nlohmann::json& j, const std::string& key);

struct StudyReport {
    StudyResult study;
    std::vector<PairRecord> pairs;  // pairs analysed (after any subset filter)
    std::map<std::string, std::size_t> preference_counts;
    std::vector<CorrelationReport> correlations;
    std::vector<std::string> methods;
    std::optional<std::string> subset_method;
};

/// Runs the two-step study over all pairs, then restricts counts and metric
/// correlations to the pairs containing `subset_method` when given.
StudyReport build_study_report(const StudyConfig& config, const std::vector<ChoiceEvent>& events,
                               const std::vector<MetricScore>& scores,
                               std::optional<std::string> subset_method = std::nullopt);

nlohmann::json to_json(const StudyReport& r);

/// Columns: method, fidelity (dB), preference count, traditional (dB).
/// Missing values print as "-".
std::string format_method_table(const std::vector<std::string>& methods, const std::map<std::string, double>& fidelity,
                          const std::map<std::string, std::size_t>& preferences,
                          const std::map<std::string, double>& traditional);

std::string format_correlations(const std::vector<CorrelationReport>& reports);

}  // namespace fideval
