#pragma once

#include <nlohmann/json.hpp>

#include "fideval/fidelity.hpp"
#include "fideval/iqa.hpp"
#include "fideval/study.hpp"

namespace fideval {

/// dB values as JSON: finite numbers pass through, +inf becomes "inf".
nlohmann::json db_to_json(double db);
double db_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const MotionVector& mv);
void from_json(const nlohmann::json& j, MotionVector& mv);

/// {image, fd_db, sigma, method, mv, evaluations}
nlohmann::json fidelity_record(const std::string& image, const FidelityResult& r);
FidelityResult fidelity_from_record(const nlohmann::json& j);

void to_json(nlohmann::json& j, const MetricScore& s);
void from_json(const nlohmann::json& j, MetricScore& s);

void to_json(nlohmann::json& j, const PairRecord& p);
void from_json(const nlohmann::json& j, PairRecord& p);

void to_json(nlohmann::json& j, const ChoiceEvent& e);
void from_json(const nlohmann::json& j, ChoiceEvent& e);

/// {images, methods, seed, threshold}; threshold defaults to 0.70.
void to_json(nlohmann::json& j, const StudyConfig& c);
void from_json(const nlohmann::json& j, StudyConfig& c);

void to_json(nlohmann::json& j, const GroundTruth& gt);
void to_json(nlohmann::json& j, const CorrelationReport& r);

}  // namespace fideval
