#include "fideval/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fideval/error.hpp"
#include "fideval/image_io.hpp"
#include "parallel.hpp"

namespace fideval {

BlurKernel gaussian_kernel3(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw PreconditionError("blur sigma must be positive and finite");
    }
    BlurKernel k;
    k.sigma = sigma;
    const double denom = 2.0 * sigma * sigma;
    double total = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const double w = std::exp(-static_cast<double>(dx * dx + dy * dy) / denom);
            k.weights[(dy + 1) * 3 + (dx + 1)] = w;
            total += w;
        }
    }
    for (double& w : k.weights) w /= total;
    return k;
}

ImagePlane convolve3(const ImagePlane& img, const BlurKernel& k) {
    const int w = img.width();
    const int h = img.height();
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) acc += k.at(dx, dy) * img.clamped(x + dx, y + dy);
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return {w, h, std::move(out)};
}

double psnr_c(const ImagePlane& a, const ImagePlane& b, int border) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw PreconditionError("psnr_c: image sizes differ");
    }
    if (border < 0 || a.width() <= 2 * border || a.height() <= 2 * border) {
        throw PreconditionError("psnr_c: image too small for border " + std::to_string(border));
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = border; y < a.height() - border; ++y) {
        const auto ra = a.row(y);
        const auto rb = b.row(y);
        for (int x = border; x < a.width() - border; ++x) {
            const double va = ra[static_cast<std::size_t>(x)];
            const double vb = rb[static_cast<std::size_t>(x)];
            if (!is_valid_sample(va) || !is_valid_sample(vb)) continue;
            const double d = va - vb;
            sum += d * d;
            ++count;
        }
    }
    if (count == 0) throw PreconditionError("psnr_c: no valid samples in the interior");
    return psnr_from_mse(sum / static_cast<double>(count));
}

FidelitySearchConfig::FidelitySearchConfig()
    : FidelitySearchConfig({kDefaultSigmas.begin(), kDefaultSigmas.end()},
                           {kAllMethods.begin(), kAllMethods.end()}, kDefaultRadius, kDefaultBorder,
                           kDefaultFactor) {}

FidelitySearchConfig::FidelitySearchConfig(std::vector<double> sigmas,
                                           std::vector<DownsampleMethod> methods, int radius,
                                           int border, int factor)
    : sigmas_(std::move(sigmas)),
      methods_(std::move(methods)),
      radius_(radius),
      border_(border),
      factor_(factor) {
    if (sigmas_.empty()) throw PreconditionError("at least one blur sigma is required");
    if (methods_.empty()) throw PreconditionError("at least one down-sampling method is required");
    for (double s : sigmas_) {
        if (!(s > 0.0) || !std::isfinite(s)) throw PreconditionError("blur sigmas must be positive");
    }
    std::sort(sigmas_.begin(), sigmas_.end());
    std::sort(methods_.begin(), methods_.end());
    if (std::adjacent_find(sigmas_.begin(), sigmas_.end()) != sigmas_.end()) {
        throw PreconditionError("duplicate blur sigma in search config");
    }
    if (std::adjacent_find(methods_.begin(), methods_.end()) != methods_.end()) {
        throw PreconditionError("duplicate down-sampling method in search config");
    }
    if (radius_ < 0) throw PreconditionError("translation radius must be non-negative");
    if (border_ <= radius_) {
        throw PreconditionError("border (" + std::to_string(border_) +
                                ") must exceed translation radius (" + std::to_string(radius_) + ")");
    }
    if (factor_ < 2) throw PreconditionError("scale factor must be >= 2");
}

std::uint64_t FidelitySearchConfig::search_size() const noexcept {
    const auto span = static_cast<std::uint64_t>(2 * radius_ + 1);
    return sigmas_.size() * methods_.size() * span * span;
}

namespace {

struct BranchBest {
    double db = -std::numeric_limits<double>::infinity();
    int shift_index = -1;  // row-major over the (2r+1)^2 grid
};

// Scores every translation of `candidate` against the interior of
// `original`. Each translation accumulates its squared errors in row-major
// pixel order with its own accumulator; the dx loop is innermost only so the
// independent accumulators can run side by side.
BranchBest search_translations(const ImagePlane& original, const ImagePlane& candidate, int radius,
                               int border, bool early_exit) {
    const int span = 2 * radius + 1;
    const int x0 = border;
    const int x1 = original.width() - border;
    const int y0 = border;
    const int y1 = original.height() - border;
    const double n = static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);

    BranchBest best;
    double best_sum = std::numeric_limits<double>::infinity();
    std::vector<double> acc(static_cast<std::size_t>(span));
    double* const accp = acc.data();

    for (int dy = -radius; dy <= radius; ++dy) {
        std::fill(acc.begin(), acc.end(), 0.0);
        bool dominated = false;
        for (int y = y0; y < y1; ++y) {
            const double* arow = original.row(y).data();
            // Candidate sample for shift dx = k - radius at column x sits at
            // x - dx = x + radius - k.
            const double* crow = candidate.row(y - dy).data() + radius;
            for (int x = x0; x < x1; ++x) {
                const double av = arow[x];
                const double* c = crow + x;
                for (int k = 0; k < span; ++k) {
                    const double d = av - c[-k];
                    accp[k] += d * d;
                }
            }
            if (early_exit && std::all_of(acc.begin(), acc.end(), [&](double s) { return s > best_sum; })) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        for (int k = 0; k < span; ++k) {
            const double db = psnr_from_mse(acc[static_cast<std::size_t>(k)] / n);
            if (db > best.db) {
                best.db = db;
                best.shift_index = (dy + radius) * span + k;
                best_sum = acc[static_cast<std::size_t>(k)];
            }
        }
    }
    return best;
}

}  // namespace

FidelityResult fidelity(const ImagePlane& sr_hr, const ImagePlane& original_lr,
                        const FidelitySearchConfig& cfg) {
    const int factor = cfg.factor();
    const int border = cfg.border();
    if (original_lr.width() <= 2 * border || original_lr.height() <= 2 * border) {
        throw PreconditionError("LR image " + std::to_string(original_lr.width()) + "x" +
                                std::to_string(original_lr.height()) + " too small for border " +
                                std::to_string(border));
    }
    const int lr_w = (sr_hr.width() + factor - 1) / factor;
    const int lr_h = (sr_hr.height() + factor - 1) / factor;
    if (lr_w != original_lr.width() || lr_h != original_lr.height()) {
        throw PreconditionError("down-sampled SR image would be " + std::to_string(lr_w) + "x" +
                                std::to_string(lr_h) + " but the LR image is " +
                                std::to_string(original_lr.width()) + "x" +
                                std::to_string(original_lr.height()));
    }

    const auto& sigmas = cfg.sigmas();
    const auto& methods = cfg.methods();

    std::vector<std::optional<ImagePlane>> blurred(sigmas.size());
    detail::parallel_for(sigmas.size(), cfg.jobs, [&](std::size_t i) {
        blurred[i].emplace(convolve3(sr_hr, gaussian_kernel3(sigmas[i])));
    });

    const std::size_t branches = sigmas.size() * methods.size();
    std::vector<BranchBest> best(branches);
    detail::parallel_for(branches, cfg.jobs, [&](std::size_t b) {
        const std::size_t si = b / methods.size();
        const std::size_t mi = b % methods.size();
        const ImagePlane lr = downsample(*blurred[si], methods[mi], factor);
        best[b] = search_translations(original_lr, lr, cfg.radius(), border, cfg.early_exit);
    });

    // Reduce in iteration order so ties resolve identically for any worker count.
    std::size_t winner = 0;
    for (std::size_t b = 1; b < branches; ++b) {
        if (best[b].db > best[winner].db) winner = b;
    }
    const int span = 2 * cfg.radius() + 1;
    FidelityResult r;
    r.fd_db = best[winner].db;
    r.best_sigma = sigmas[winner / methods.size()];
    r.best_method = methods[winner % methods.size()];
    r.best_mv = {best[winner].shift_index % span - cfg.radius(),
                 best[winner].shift_index / span - cfg.radius()};
    r.evaluations = cfg.search_size();
    return r;
}

std::vector<FidelityOutcome> fidelity_batch(const std::vector<FidelityJob>& jobs,
                                            const FidelitySearchConfig& cfg) {
    std::vector<FidelityOutcome> out(jobs.size(), std::string{});
    FidelitySearchConfig inner = cfg;
    inner.jobs = 1;
    detail::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
        try {
            const auto sr = load_image(jobs[i].sr_path);
            const auto lr = load_image(jobs[i].lr_path);
            out[i] = fidelity(sr, lr, inner);
        } catch (const std::exception& e) {
            out[i] = std::string(e.what());
        }
    });
    return out;
}

}  // namespace fideval
