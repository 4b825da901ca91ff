#pragma once

#include "fideval/fidelity.hpp"

namespace oracle {

struct NaiveFidelity {
    double fd_db;
    double sigma;
    fideval::DownsampleMethod method;
    fideval::MotionVector mv;
    std::uint64_t evaluations;
};

/// Triple loop over (sigma, method, translation): builds every translated
/// candidate explicitly and scores it with psnr_c. Keeps the first maximum.
NaiveFidelity naive_fidelity(const fideval::ImagePlane& sr_hr, const fideval::ImagePlane& original_lr,
                             const fideval::FidelitySearchConfig& cfg);

}  // namespace oracle
