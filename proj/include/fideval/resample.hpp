#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "fideval/image.hpp"

namespace fideval {

/// The six imresize-style down-sampling methods searched by the fidelity
/// metric. Enumerator order is the search order.
enum class DownsampleMethod { bicubic, bilinear, nearest, box, lanczos2, lanczos3 };

inline constexpr std::array<DownsampleMethod, 6> kAllMethods = {
    DownsampleMethod::bicubic, DownsampleMethod::bilinear, DownsampleMethod::nearest,
    DownsampleMethod::box,     DownsampleMethod::lanczos2, DownsampleMethod::lanczos3};

std::string_view to_string(DownsampleMethod m) noexcept;
std::optional<DownsampleMethod> parse_method(std::string_view name) noexcept;

/// Half-width of the kernel's support, in source-sample units.
double kernel_support(DownsampleMethod m) noexcept;

/// Canonical kernel value at continuous offset `x` (before any stretching).
double kernel_weight(DownsampleMethod m, double x) noexcept;

/// Sampled weights for one output coordinate along one axis.
struct Contribution {
    std::vector<int> index;      // source indices, already clamped to the axis
    std::vector<double> weight;  // normalized to sum 1
};

/// Per-axis resampling operator for an integer scale change. `scale` is
/// output/input (e.g. 1/3 to shrink by 3, 3 to enlarge by 3).
std::vector<Contribution> axis_contributions(DownsampleMethod m, int in_size, int out_size,
                                             double scale, bool antialias);

/// imresize-compatible shrink by an integer factor: antialiased (kernel
/// stretched by the factor) for every method except nearest, replicate
/// boundary, separable rows-then-columns. Output is ceil(size / factor).
ImagePlane downsample(const ImagePlane& img, DownsampleMethod method, int factor);

/// Bicubic enlargement by an integer factor, no antialiasing.
ImagePlane upsample_bicubic(const ImagePlane& img, int factor);

/// Pixel replication (each sample becomes a factor x factor block).
ImagePlane upsample_replicate(const ImagePlane& img, int factor);

/// Applies an axis operator to every row, or to every column.
ImagePlane resample_rows(const ImagePlane& img, const std::vector<Contribution>& ops);
ImagePlane resample_columns(const ImagePlane& img, const std::vector<Contribution>& ops);

}  // namespace fideval
