#include "fideval/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fideval/error.hpp"

namespace fideval {

namespace {

void require_even(const ImagePlane& img, const char* what) {
    if (img.width() % 2 != 0 || img.height() % 2 != 0) {
        throw PreconditionError(std::string(what) + ": image dimensions must be even, got " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
}

double bilinear(const ImagePlane& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
    const int xi = static_cast<int>(std::floor(x));
    const int yi = static_cast<int>(std::floor(y));
    const double fx = x - xi;
    const double fy = y - yi;
    const double top = (1.0 - fx) * img.clamped(xi, yi) + fx * img.clamped(xi + 1, yi);
    const double bottom = (1.0 - fx) * img.clamped(xi, yi + 1) + fx * img.clamped(xi + 1, yi + 1);
    return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

ImagePlane block_mean_map(const ImagePlane& img) {
    require_even(img, "block_mean_map");
    const int w = img.width();
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); y += 2) {
        for (int x = 0; x < w; x += 2) {
            const double mean =
                (img.at(x, y) + img.at(x + 1, y) + img.at(x, y + 1) + img.at(x + 1, y + 1)) / 4.0;
            for (int oy = 0; oy < 2; ++oy) {
                for (int ox = 0; ox < 2; ++ox) out[static_cast<std::size_t>(y + oy) * w + x + ox] = mean;
            }
        }
    }
    return {w, img.height(), std::move(out)};
}

ImagePlane contrast_enhance(const ImagePlane& img, const ContrastParams& p) {
    if (!std::isfinite(p.gain)) throw PreconditionError("contrast gain must be finite");
    const ImagePlane mean = block_mean_map(img);
    std::vector<double> out(img.size());
    const auto a = img.data();
    const auto m = mean.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + p.gain * (a[i] - m[i]);
    return {img.width(), img.height(), std::move(out)};
}

ImagePlane warp_field(int width, int height, const WarpParams& p) {
    if (p.max_mv < 0.0) throw PreconditionError("max_mv must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const double fy = static_cast<double>(std::min(y, height - y)) / height;
        for (int x = 0; x < width; ++x) {
            const double fx = static_cast<double>(std::min(x, width - x)) / width;
            out[static_cast<std::size_t>(y) * width + x] = std::min(fx, fy) * p.max_mv;
        }
    }
    return {width, height, std::move(out)};
}

ImagePlane warp_image(const ImagePlane& img, const WarpParams& p) {
    const ImagePlane field = warp_field(img.width(), img.height(), p);
    const bool horizontal = p.direction == WarpDirection::horizontal;
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double m = field.at(x, y);
            out[static_cast<std::size_t>(y) * img.width() + x] =
                m == 0.0 ? img.at(x, y)
                         : (horizontal ? bilinear(img, x - m, y) : bilinear(img, x, y - m));
        }
    }
    return {img.width(), img.height(), std::move(out)};
}

double verify_null_space(const ImagePlane& a, const ImagePlane& b, DownsampleMethod method,
                         int factor) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw PreconditionError("verify_null_space: image sizes differ");
    }
    const ImagePlane da = downsample(a, method, factor);
    const ImagePlane db = downsample(b, method, factor);
    double worst = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(da.data()[i] - db.data()[i]));
    return worst;
}

}  // namespace fideval
