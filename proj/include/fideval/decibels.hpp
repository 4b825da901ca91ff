#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace fideval {

inline constexpr double kPeak = 255.0;

/// Identical images have no finite PSNR; this is the distinguished value.
inline constexpr double kInfiniteDb = std::numeric_limits<double>::infinity();

/// Default cap applied to infinite values when averaging.
inline constexpr double kAggregateCapDb = 100.0;

inline double psnr_from_mse(double mse) noexcept {
    if (mse == 0.0) return kInfiniteDb;
    return 10.0 * std::log10(kPeak * kPeak / mse);
}

inline bool is_infinite_db(double db) noexcept { return std::isinf(db) && db > 0; }

/// Mean of a set of dB values with infinite entries capped.
struct CappedMean {
    double mean = 0.0;
    std::size_t count = 0;
    std::size_t capped = 0;
};

template <typename Range>
CappedMean capped_mean(const Range& values, double cap = kAggregateCapDb) {
    CappedMean r;
    double sum = 0.0;
    for (double v : values) {
        if (is_infinite_db(v)) {
            ++r.capped;
            sum += cap;
        } else {
            sum += v;
        }
        ++r.count;
    }
    if (r.count > 0) r.mean = sum / static_cast<double>(r.count);
    return r;
}

}  // namespace fideval
