#include "fideval/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fideval/error.hpp"

namespace fideval {

namespace {

double cubic(double x) noexcept {
    const double ax = std::abs(x);
    const double ax2 = ax * ax;
    const double ax3 = ax2 * ax;
    if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
    if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
    return 0.0;
}

double triangle(double x) noexcept {
    if (x >= -1.0 && x < 0.0) return x + 1.0;
    if (x >= 0.0 && x <= 1.0) return 1.0 - x;
    return 0.0;
}

// Half-open so adjacent boxes tile the line without double counting.
double box(double x) noexcept { return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0; }

double lanczos(double x, double lobes) noexcept {
    if (std::abs(x) >= lobes) return 0.0;
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return lobes * std::sin(px) * std::sin(px / lobes) / (px * px);
}

}  // namespace

std::string_view to_string(DownsampleMethod m) noexcept {
    switch (m) {
        case DownsampleMethod::bicubic: return "bicubic";
        case DownsampleMethod::bilinear: return "bilinear";
        case DownsampleMethod::nearest: return "nearest";
        case DownsampleMethod::box: return "box";
        case DownsampleMethod::lanczos2: return "lanczos2";
        case DownsampleMethod::lanczos3: return "lanczos3";
    }
    return "unknown";
}

std::optional<DownsampleMethod> parse_method(std::string_view name) noexcept {
    for (auto m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

double kernel_support(DownsampleMethod m) noexcept {
    switch (m) {
        case DownsampleMethod::bicubic: return 2.0;
        case DownsampleMethod::bilinear: return 1.0;
        case DownsampleMethod::nearest:
        case DownsampleMethod::box: return 0.5;
        case DownsampleMethod::lanczos2: return 2.0;
        case DownsampleMethod::lanczos3: return 3.0;
    }
    return 0.0;
}

double kernel_weight(DownsampleMethod m, double x) noexcept {
    switch (m) {
        case DownsampleMethod::bicubic: return cubic(x);
        case DownsampleMethod::bilinear: return triangle(x);
        case DownsampleMethod::nearest:
        case DownsampleMethod::box: return box(x);
        case DownsampleMethod::lanczos2: return lanczos(x, 2.0);
        case DownsampleMethod::lanczos3: return lanczos(x, 3.0);
    }
    return 0.0;
}

std::vector<Contribution> axis_contributions(DownsampleMethod m, int in_size, int out_size,
                                             double scale, bool antialias) {
    const bool stretch = antialias && scale < 1.0;
    double width = 2.0 * kernel_support(m);
    if (stretch) width /= scale;
    const int taps = static_cast<int>(std::ceil(width)) + 2;

    std::vector<Contribution> out(static_cast<std::size_t>(out_size));
    for (int i = 0; i < out_size; ++i) {
        // Output pixel centers map onto input pixel centers.
        const double u = (i + 0.5) / scale - 0.5;
        const int left = static_cast<int>(std::floor(u - width / 2.0));
        Contribution& c = out[static_cast<std::size_t>(i)];
        double total = 0.0;
        for (int k = 0; k < taps; ++k) {
            const int src = left + k;
            const double w = stretch ? scale * kernel_weight(m, scale * (u - src))
                                     : kernel_weight(m, u - src);
            if (w == 0.0) continue;
            c.index.push_back(std::clamp(src, 0, in_size - 1));
            c.weight.push_back(w);
            total += w;
        }
        if (total == 0.0) throw Error("resampling kernel has no support for output sample");
        for (double& w : c.weight) w /= total;
    }
    return out;
}

ImagePlane resample_rows(const ImagePlane& img, const std::vector<Contribution>& ops) {
    const int out_w = static_cast<int>(ops.size());
    const int h = img.height();
    std::vector<double> out(static_cast<std::size_t>(out_w) * h);
    for (int y = 0; y < h; ++y) {
        const auto row = img.row(y);
        double* dst = out.data() + static_cast<std::size_t>(y) * out_w;
        for (int x = 0; x < out_w; ++x) {
            const auto& c = ops[static_cast<std::size_t>(x)];
            double acc = 0.0;
            for (std::size_t k = 0; k < c.index.size(); ++k) {
                acc += c.weight[k] * row[static_cast<std::size_t>(c.index[k])];
            }
            dst[x] = acc;
        }
    }
    return {out_w, h, std::move(out)};
}

ImagePlane resample_columns(const ImagePlane& img, const std::vector<Contribution>& ops) {
    const int w = img.width();
    const int out_h = static_cast<int>(ops.size());
    std::vector<double> out(static_cast<std::size_t>(w) * out_h, 0.0);
    for (int y = 0; y < out_h; ++y) {
        const auto& c = ops[static_cast<std::size_t>(y)];
        double* dst = out.data() + static_cast<std::size_t>(y) * w;
        // Tap-outer loop keeps the per-pixel summation order identical to
        // the row pass while streaming whole rows.
        for (std::size_t k = 0; k < c.index.size(); ++k) {
            const auto src = img.row(c.index[k]);
            const double wk = c.weight[k];
            for (int x = 0; x < w; ++x) dst[x] += wk * src[static_cast<std::size_t>(x)];
        }
    }
    return {w, out_h, std::move(out)};
}

ImagePlane downsample(const ImagePlane& img, DownsampleMethod method, int factor) {
    if (factor < 2) throw PreconditionError("downsample factor must be >= 2");
    if (img.width() < factor || img.height() < factor) {
        throw PreconditionError("image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " smaller than factor " +
                                std::to_string(factor));
    }
    const bool antialias = method != DownsampleMethod::nearest;
    const double scale = 1.0 / factor;
    const int out_w = (img.width() + factor - 1) / factor;
    const int out_h = (img.height() + factor - 1) / factor;
    const auto rows = axis_contributions(method, img.width(), out_w, scale, antialias);
    const auto cols = axis_contributions(method, img.height(), out_h, scale, antialias);
    return resample_columns(resample_rows(img, rows), cols);
}

ImagePlane upsample_bicubic(const ImagePlane& img, int factor) {
    if (factor < 2) throw PreconditionError("upsample factor must be >= 2");
    const auto rows = axis_contributions(DownsampleMethod::bicubic, img.width(),
                                         img.width() * factor, factor, false);
    const auto cols = axis_contributions(DownsampleMethod::bicubic, img.height(),
                                         img.height() * factor, factor, false);
    return resample_columns(resample_rows(img, rows), cols);
}

ImagePlane upsample_replicate(const ImagePlane& img, int factor) {
    if (factor < 1) throw PreconditionError("replication factor must be >= 1");
    const int w = img.width() * factor;
    const int h = img.height() * factor;
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = img.at(x / factor, y / factor);
    }
    return {w, h, std::move(out)};
}

}  // namespace fideval
