#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fideval/image.hpp"

namespace fideval {

/// Full-image PSNR (no border exclusion), peak 255.
double psnr(const ImagePlane& a, const ImagePlane& b);

/// Mean SSIM over every fully contained 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 255. Both images must be at least 11x11.
double ssim(const ImagePlane& a, const ImagePlane& b);

struct UqiResult {
    double value = 0.0;
    std::size_t windows = 0;  // windows that contributed
    std::size_t skipped = 0;  // windows with a zero denominator
};

/// Universal quality index over sliding 8x8 uniform windows. Windows whose
/// mean or variance term has a zero denominator are skipped; throws when
/// none remain.
UqiResult uqi_detailed(const ImagePlane& a, const ImagePlane& b);
inline double uqi(const ImagePlane& a, const ImagePlane& b) { return uqi_detailed(a, b).value; }

enum class Polarity { higher_better, lower_better };

std::string_view to_string(Polarity p) noexcept;
std::optional<Polarity> parse_polarity(std::string_view token) noexcept;

struct MetricScore {
    std::string metric;
    std::string image;
    double value = 0.0;
    Polarity polarity = Polarity::higher_better;

    friend bool operator==(const MetricScore&, const MetricScore&) = default;
};

enum class Preference { left, right, tie };

std::string_view to_string(Preference p) noexcept;

/// Which image the metric prefers. Scores within `epsilon` of each other
/// (after orienting by polarity) are a tie.
Preference metric_preference(const MetricScore& left, const MetricScore& right, double epsilon = 0.0);

/// Parses the score CSV (`metric,image,value,polarity` header). Errors carry
/// the 1-based line number.
std::vector<MetricScore> parse_scores(std::istream& in);
std::vector<MetricScore> load_external_scores(const std::filesystem::path& path);

void write_scores_csv(std::ostream& out, const std::vector<MetricScore>& scores);

}  // namespace fideval
