#include "fideval/iqa.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fideval/decibels.hpp"
#include "fideval/error.hpp"

namespace fideval {

namespace {

void require_same_size(const ImagePlane& a, const ImagePlane& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw PreconditionError(std::string(what) + ": image sizes differ (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                                std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
    }
}

// Valid-mode separable filtering: output has (w - n + 1) x (h - n + 1)
// samples, each the weighted sum of the n x n window anchored at its
// top-left corner.
std::vector<double> filter_valid(std::span<const double> src, int w, int h, std::span<const double> taps) {
    const int n = static_cast<int>(taps.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> horiz(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += taps[static_cast<std::size_t>(k)] * row[x + k];
            horiz[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += taps[static_cast<std::size_t>(k)] * horiz[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

struct LocalMoments {
    std::vector<double> mean_a, mean_b, sq_a, sq_b, cross;
};

LocalMoments local_moments(const ImagePlane& a, const ImagePlane& b, std::span<const double> taps) {
    const auto da = a.data();
    const auto db = b.data();
    std::vector<double> aa(da.size()), bb(da.size()), ab(da.size());
    for (std::size_t i = 0; i < da.size(); ++i) {
        aa[i] = da[i] * da[i];
        bb[i] = db[i] * db[i];
        ab[i] = da[i] * db[i];
    }
    const int w = a.width();
    const int h = a.height();
    return {filter_valid(da, w, h, taps), filter_valid(db, w, h, taps), filter_valid(aa, w, h, taps),
            filter_valid(bb, w, h, taps), filter_valid(ab, w, h, taps)};
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

double psnr(const ImagePlane& a, const ImagePlane& b) {
    require_same_size(a, b, "psnr");
    double sum = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sum += d * d;
    }
    return psnr_from_mse(sum / static_cast<double>(da.size()));
}

namespace {

double flush_tiny(double variance, double second_moment) {
    return std::abs(variance) <= 1e-12 * std::max(1.0, second_moment) ? 0.0 : variance;
}

}  // namespace

double ssim(const ImagePlane& a, const ImagePlane& b) {
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr double c1 = (0.01 * kPeak) * (0.01 * kPeak);
    constexpr double c2 = (0.03 * kPeak) * (0.03 * kPeak);
    require_same_size(a, b, "ssim");
    if (a.width() < kWindow || a.height() < kWindow) {
        throw PreconditionError("ssim: images must be at least 11x11");
    }

    std::vector<double> taps(kWindow);
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
        total += taps[static_cast<std::size_t>(i)];
    }
    for (double& t : taps) t /= total;

    const auto m = local_moments(a, b, taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < m.mean_a.size(); ++i) {
        const double mu_a = m.mean_a[i];
        const double mu_b = m.mean_b[i];
        const double var_a = m.sq_a[i] - mu_a * mu_a;
        const double var_b = m.sq_b[i] - mu_b * mu_b;
        const double cov = m.cross[i] - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        sum += num / den;
    }
    return sum / static_cast<double>(m.mean_a.size());
}

UqiResult uqi_detailed(const ImagePlane& a, const ImagePlane& b) {
    constexpr int kWindow = 8;
    require_same_size(a, b, "uqi");
    if (a.width() < kWindow || a.height() < kWindow) {
        throw PreconditionError("uqi: images must be at least 8x8");
    }
    const std::vector<double> taps(kWindow, 1.0 / kWindow);
    const auto m = local_moments(a, b, taps);

    UqiResult r;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.mean_a.size(); ++i) {
        const double mu_a = m.mean_a[i];
        const double mu_b = m.mean_b[i];
        // Moments come from running sums, so a flat window leaves rounding
        // residue instead of an exact zero variance.
        const double var_a = flush_tiny(m.sq_a[i] - mu_a * mu_a, m.sq_a[i]);
        const double var_b = flush_tiny(m.sq_b[i] - mu_b * mu_b, m.sq_b[i]);
        const double cov = m.cross[i] - mu_a * mu_b;
        const double mean_den = mu_a * mu_a + mu_b * mu_b;
        const double var_den = var_a + var_b;
        if (mean_den == 0.0 || var_den == 0.0) {
            ++r.skipped;
            continue;
        }
        sum += (2.0 * cov / var_den) * (2.0 * mu_a * mu_b / mean_den);
        ++r.windows;
    }
    if (r.windows == 0) throw Error("uqi: no valid windows");
    r.value = sum / static_cast<double>(r.windows);
    return r;
}

std::string_view to_string(Polarity p) noexcept {
    return p == Polarity::higher_better ? "higher" : "lower";
}

std::optional<Polarity> parse_polarity(std::string_view token) noexcept {
    if (token == "higher" || token == "higher-better") return Polarity::higher_better;
    if (token == "lower" || token == "lower-better") return Polarity::lower_better;
    return std::nullopt;
}

std::string_view to_string(Preference p) noexcept {
    switch (p) {
        case Preference::left: return "left";
        case Preference::right: return "right";
        case Preference::tie: return "tie";
    }
    return "tie";
}

Preference metric_preference(const MetricScore& left, const MetricScore& right, double epsilon) {
    if (left.metric != right.metric || left.polarity != right.polarity) {
        throw PreconditionError("metric_preference: scores come from different metrics ('" + left.metric +
                                "' vs '" + right.metric + "')");
    }
    if (left.value == right.value) return Preference::tie;
    double diff = left.value - right.value;
    if (left.polarity == Polarity::lower_better) diff = -diff;
    if (std::abs(diff) <= epsilon) return Preference::tie;
    return diff > 0 ? Preference::left : Preference::right;
}

std::vector<MetricScore> parse_scores(std::istream& in) {
    std::vector<MetricScore> out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (text.back() == ',') fields.emplace_back();

        const auto fail = [&](const std::string& why) {
            throw Error("scores CSV line " + std::to_string(line_no) + ": " + why);
        };
        if (!header_seen) {
            if (fields != std::vector<std::string>{"metric", "image", "value", "polarity"}) {
                fail("expected header 'metric,image,value,polarity'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) fail("expected 4 fields, got " + std::to_string(fields.size()));
        MetricScore s;
        s.metric = fields[0];
        s.image = fields[1];
        if (s.metric.empty() || s.image.empty()) fail("empty metric or image id");

        const std::string& v = fields[2];
        if (lower(v) == "inf") {
            s.value = kInfiniteDb;
        } else {
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s.value);
            if (ec != std::errc{} || ptr != v.data() + v.size()) fail("malformed value '" + v + "'");
        }
        if (std::isnan(s.value) || (std::isinf(s.value) && !(s.value > 0 && lower(s.metric) == "psnr"))) {
            fail("non-finite value '" + v + "' (only psnr may be inf)");
        }
        const auto pol = parse_polarity(fields[3]);
        if (!pol) fail("unknown polarity '" + fields[3] + "'");
        s.polarity = *pol;
        out.push_back(std::move(s));
    }
    if (!header_seen) throw Error("scores CSV line 1: missing header");
    return out;
}

std::vector<MetricScore> load_external_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scores file '" + path.string() + "'");
    try {
        return parse_scores(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_scores_csv(std::ostream& out, const std::vector<MetricScore>& scores) {
    out << "metric,image,value,polarity\n";
    for (const auto& s : scores) {
        out << s.metric << ',' << s.image << ',';
        if (is_infinite_db(s.value)) {
            out << "inf";
        } else {
            out << std::setprecision(17) << s.value;
        }
        out << ',' << to_string(s.polarity) << '\n';
    }
}

}  // namespace fideval
