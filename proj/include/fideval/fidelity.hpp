#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "fideval/decibels.hpp"
#include "fideval/image.hpp"
#include "fideval/resample.hpp"

namespace fideval {

/// Normalized 3x3 Gaussian, row-major from (-1,-1).
struct BlurKernel {
    double sigma = 0.0;
    std::array<double, 9> weights{};

    double at(int dx, int dy) const noexcept { return weights[(dy + 1) * 3 + (dx + 1)]; }
};

BlurKernel gaussian_kernel3(double sigma);

/// Same-size 3x3 convolution with replicate padding.
ImagePlane convolve3(const ImagePlane& img, const BlurKernel& k);

/// PSNR over the interior of two equally sized images, `border` pixels
/// excluded on every side. Samples marked invalid in either image are
/// skipped. Returns kInfiniteDb when the interiors match exactly.
double psnr_c(const ImagePlane& a, const ImagePlane& b, int border);

/// Nuisance parameters searched by the fidelity metric. Validated on
/// construction: sigmas are positive and sorted ascending, methods are kept
/// in enum order, and border > radius so every shifted comparison stays
/// inside the candidate image.
class FidelitySearchConfig {
public:
    static constexpr std::array<double, 6> kDefaultSigmas = {0.1, 0.5, 0.9, 1.3, 1.7, 2.1};
    static constexpr int kDefaultRadius = 10;
    static constexpr int kDefaultBorder = 20;
    static constexpr int kDefaultFactor = 3;

    FidelitySearchConfig();
    FidelitySearchConfig(std::vector<double> sigmas, std::vector<DownsampleMethod> methods,
                         int radius, int border, int factor);

    const std::vector<double>& sigmas() const noexcept { return sigmas_; }
    const std::vector<DownsampleMethod>& methods() const noexcept { return methods_; }
    int radius() const noexcept { return radius_; }
    int border() const noexcept { return border_; }
    int factor() const noexcept { return factor_; }

    /// Number of (sigma, method, translation) triples in the search space.
    std::uint64_t search_size() const noexcept;

    /// Worker threads for the search; 0 selects hardware concurrency.
    int jobs = 1;
    /// Skip the remainder of a translation row once every candidate in it
    /// is already worse than the best seen. Never changes the result.
    bool early_exit = false;

private:
    std::vector<double> sigmas_;
    std::vector<DownsampleMethod> methods_;
    int radius_;
    int border_;
    int factor_;
};

struct FidelityResult {
    double fd_db = 0.0;
    double best_sigma = 0.0;
    DownsampleMethod best_method = DownsampleMethod::bicubic;
    MotionVector best_mv;
    std::uint64_t evaluations = 0;

    friend bool operator==(const FidelityResult&, const FidelityResult&) = default;
};

/// Maximum center-cropped PSNR between the original LR image and
/// blurred, down-sampled, translated versions of the SR image. Ties keep the
/// first candidate in (sigma, method, dy, dx) order regardless of `jobs`.
FidelityResult fidelity(const ImagePlane& sr_hr, const ImagePlane& original_lr,
                        const FidelitySearchConfig& cfg);

struct FidelityJob {
    std::filesystem::path sr_path;
    std::filesystem::path lr_path;
};

/// Per-item outcome: a result or the error that prevented it.
using FidelityOutcome = std::variant<FidelityResult, std::string>;

/// Runs fidelity() over many pairs, parallel across items. Load or size
/// failures are reported per item; output order matches input order.
std::vector<FidelityOutcome> fidelity_batch(const std::vector<FidelityJob>& jobs,
                                            const FidelitySearchConfig& cfg);

}  // namespace fideval
