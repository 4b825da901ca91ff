#include "fideval/image.hpp"

#include <algorithm>
#include <string>

#include "fideval/error.hpp"

namespace fideval {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw PreconditionError("image dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
    }
}

}  // namespace

ImagePlane::ImagePlane(int width, int height, double fill) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImagePlane::ImagePlane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw PreconditionError("image data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
    }
}

double ImagePlane::clamped(int x, int y) const noexcept {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

ImagePlane crop(const ImagePlane& img, const Region& r) {
    if (r.width < 1 || r.height < 1 || r.x0 < 0 || r.y0 < 0 || r.x0 + r.width > img.width() ||
        r.y0 + r.height > img.height()) {
        throw PreconditionError("crop region is not contained in the image");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(r.width) * r.height);
    for (int y = r.y0; y < r.y0 + r.height; ++y) {
        auto src = img.row(y).subspan(static_cast<std::size_t>(r.x0), static_cast<std::size_t>(r.width));
        out.insert(out.end(), src.begin(), src.end());
    }
    return {r.width, r.height, std::move(out)};
}

ImagePlane crop_center(const ImagePlane& img, int border) {
    if (border < 0) throw PreconditionError("border must be non-negative");
    if (img.width() <= 2 * border || img.height() <= 2 * border) {
        throw PreconditionError("image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " too small for border " +
                                std::to_string(border));
    }
    return crop(img, {border, border, img.width() - 2 * border, img.height() - 2 * border});
}

ImagePlane translate(const ImagePlane& img, MotionVector u) {
    const int w = img.width();
    const int h = img.height();
    std::vector<double> out(static_cast<std::size_t>(w) * h, kInvalidSample);
    for (int y = 0; y < h; ++y) {
        const int sy = y - u.dy;
        if (sy < 0 || sy >= h) continue;
        for (int x = 0; x < w; ++x) {
            const int sx = x - u.dx;
            if (sx >= 0 && sx < w) out[static_cast<std::size_t>(y) * w + x] = img.at(sx, sy);
        }
    }
    return {w, h, std::move(out)};
}

}  // namespace fideval
