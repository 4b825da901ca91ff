#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace fideval {

/// Single-channel double-precision raster, row-major. Nominal range is
/// [0, 255] but nothing clamps: analysis paths rely on exact arithmetic.
/// Immutable once constructed, so instances can be shared across threads.
class ImagePlane {
public:
    ImagePlane(int width, int height, double fill = 0.0);
    ImagePlane(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    /// Sample with coordinates clamped to the raster (replicate padding).
    double clamped(int x, int y) const noexcept;

    std::span<const double> row(int y) const noexcept {
        return {data_.data() + static_cast<std::size_t>(y) * width_,
                static_cast<std::size_t>(width_)};
    }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

private:
    int width_;
    int height_;
    std::vector<double> data_;
};

/// Integer translation in pixels. Positive dx moves content rightward.
struct MotionVector {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const MotionVector&, const MotionVector&) = default;
};

struct Region {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

/// Marker written by translate() where the source coordinate falls outside
/// the image. Metrics that honour it skip such samples.
inline constexpr double kInvalidSample = std::numeric_limits<double>::quiet_NaN();

inline bool is_valid_sample(double v) noexcept { return !std::isnan(v); }

/// Full-range BT.601 luma.
constexpr double rgb_to_luma(double r, double g, double b) noexcept {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

ImagePlane crop(const ImagePlane& img, const Region& region);

/// Interior copy with `border` pixels removed from every side.
ImagePlane crop_center(const ImagePlane& img, int border);

/// output(x, y) = input(x - dx, y - dy); samples with no source become
/// kInvalidSample.
ImagePlane translate(const ImagePlane& img, MotionVector u);

}  // namespace fideval
