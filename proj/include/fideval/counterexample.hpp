#pragma once

#include "fideval/image.hpp"
#include "fideval/resample.hpp"

namespace fideval {

// Constructions of HR images that differ from an original yet share its LR
// projection (or look the same while scoring badly on PSNR).

struct ContrastParams {
    double gain = 4.0;  // c in E = A + c(A - A_m)
};

enum class WarpDirection { horizontal, vertical };

struct WarpParams {
    double max_mv = 40.0;
    WarpDirection direction = WarpDirection::horizontal;
};

/// Replaces each non-overlapping 2x2 block by its mean. Requires even sizes.
ImagePlane block_mean_map(const ImagePlane& img);

/// E = A + c (A - block_mean_map(A)). No clamping: block means of E equal
/// those of A exactly, so box down-sampling by 2 cannot tell them apart.
ImagePlane contrast_enhance(const ImagePlane& img, const ContrastParams& p);

/// Per-pixel displacement magnitude
/// m(x, y) = min(min(x, W - x) / W, min(y, H - y) / H) * max_mv.
ImagePlane warp_field(int width, int height, const WarpParams& p);

/// Resamples A at (x - m(x,y), y) (or (x, y - m) for vertical) with bilinear
/// interpolation and clamped coordinates.
ImagePlane warp_image(const ImagePlane& img, const WarpParams& p);

/// max |downsample(a) - downsample(b)| over the LR raster.
double verify_null_space(const ImagePlane& a, const ImagePlane& b, DownsampleMethod method,
                         int factor);

}  // namespace fideval
