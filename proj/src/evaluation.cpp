#include "fideval/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fideval/error.hpp"
#include "fideval/image_io.hpp"
#include "fideval/serialize.hpp"
#include "parallel.hpp"

namespace fideval {

using nlohmann::json;

namespace {

constexpr std::string_view kBuiltinBicubic = "builtin:bicubic";

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

void require_dir(const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::is_directory(p)) {
        throw Error(std::string(what) + " '" + p.string() + "' does not exist or is not a directory");
    }
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Loads the SR result for one LR stem, or synthesizes the bicubic baseline.
ImagePlane load_sr(const MethodSource& src, const std::map<std::string, std::filesystem::path>& sr_files,
                   const std::filesystem::path& lr_path, const std::string& stem, int factor) {
    if (src.builtin_bicubic) return upsample_bicubic(load_image(lr_path), factor);
    const auto it = sr_files.find(stem);
    if (it == sr_files.end()) throw Error("no SR result named '" + stem + "' for method '" + src.name + "'");
    return load_image(it->second);
}

template <typename T, typename Fn>
MethodOutcome<T> run_method(const MethodSource& src, const std::map<std::string, std::filesystem::path>& lr_files,
                            int jobs, Fn&& score) {
    MethodOutcome<T> out;
    out.method = src.name;
    std::map<std::string, std::filesystem::path> sr_files;
    try {
        if (!src.builtin_bicubic) {
            sr_files = images_by_stem(src.dir);
            if (sr_files.empty()) throw Error("method directory '" + src.dir.string() + "' contains no images");
        }
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    std::vector<std::pair<std::string, std::filesystem::path>> items(lr_files.begin(), lr_files.end());
    out.items.resize(items.size());
    detail::parallel_for(items.size(), jobs, [&](std::size_t i) {
        auto& item = out.items[i];
        item.image = items[i].first;
        try {
            item.value = score(sr_files, items[i].first, items[i].second);
        } catch (const std::exception& e) {
            item.error = e.what();
        }
    });
    std::vector<double> values;
    for (const auto& item : out.items) {
        if (!item.value) continue;
        if constexpr (std::is_same_v<T, FidelityResult>) {
            values.push_back(item.value->fd_db);
        } else {
            values.push_back(*item.value);
        }
    }
    out.mean = capped_mean(values);
    return out;
}

template <typename T>
json method_json(const MethodOutcome<T>& m, const std::string& value_key) {
    json results = json::array();
    json errors = json::array();
    for (const auto& item : m.items) {
        if (item.value) {
            if constexpr (std::is_same_v<T, FidelityResult>) {
                results.push_back(fidelity_record(item.image, *item.value));
            } else {
                results.push_back({{"image", item.image}, {value_key, db_to_json(*item.value)}});
            }
        } else {
            errors.push_back({{"image", item.image}, {"error", item.error}});
        }
    }
    json j = {{"method", m.method}, {"results", results}, {"errors", errors}};
    if (!m.error.empty()) j["error"] = m.error;
    if (m.mean.count > 0) {
        j["mean_" + value_key] = m.mean.mean;
        j["count"] = m.mean.count;
        j["capped"] = m.mean.capped;
    }
    return j;
}

}  // namespace

template <typename T>
bool MethodOutcome<T>::ok() const {
    return error.empty() && std::all_of(items.begin(), items.end(), [](const auto& i) { return i.value.has_value(); });
}

template struct MethodOutcome<FidelityResult>;
template struct MethodOutcome<double>;

bool FidelityRun::ok() const {
    return std::all_of(methods.begin(), methods.end(), [](const auto& m) { return m.ok(); });
}

bool TraditionalRun::ok() const {
    return std::all_of(methods.begin(), methods.end(), [](const auto& m) { return m.ok(); });
}

RunManifest parse_manifest(const json& j, const std::filesystem::path& base_dir) {
    RunManifest m;
    m.dataset_root = resolve(base_dir, j.value("dataset_root", std::string(".")));
    if (!j.contains("lr_dir")) throw Error("manifest: 'lr_dir' is required");
    m.lr_dir = resolve(m.dataset_root, j.at("lr_dir").get<std::string>());
    if (j.contains("hr_dir")) m.hr_dir = resolve(m.dataset_root, j.at("hr_dir").get<std::string>());
    m.factor = j.value("factor", FidelitySearchConfig::kDefaultFactor);
    m.output_dir = resolve(m.dataset_root, j.value("output", std::string("out")));
    m.overrides = j.value("overrides", json::object());

    const auto add_method = [&](const std::string& name, const std::string& dir) {
        MethodSource src{name, {}, dir == kBuiltinBicubic};
        if (!src.builtin_bicubic) src.dir = resolve(m.dataset_root, dir);
        m.methods.push_back(std::move(src));
    };
    const json& methods = j.value("methods", json::array());
    if (methods.is_object()) {
        for (const auto& [name, dir] : methods.items()) add_method(name, dir.get<std::string>());
    } else {
        for (const auto& entry : methods) add_method(entry.at("name").get<std::string>(), entry.at("dir").get<std::string>());
    }
    if (m.methods.empty()) throw Error("manifest: at least one SR method is required");

    std::set<std::string> names;
    for (const auto& src : m.methods) {
        if (!names.insert(src.name).second) throw Error("manifest: duplicate method '" + src.name + "'");
    }
    require_dir(m.lr_dir, "LR directory");
    if (!m.hr_dir.empty()) require_dir(m.hr_dir, "HR directory");
    for (const auto& src : m.methods) {
        if (!src.builtin_bicubic) require_dir(src.dir, ("directory of method '" + src.name + "'").c_str());
    }
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("manifest '" + path.string() + "': " + e.what());
    }
    return parse_manifest(j, path.parent_path());
}

std::map<std::string, std::filesystem::path> images_by_stem(const std::filesystem::path& dir) {
    std::map<std::string, std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext != ".png" && ext != ".pgm") continue;
        const std::string stem = entry.path().stem().string();
        const auto [it, inserted] = out.emplace(stem, entry.path());
        if (!inserted) {
            throw Error("filename stem collision in '" + dir.string() + "': " + it->second.filename().string() +
                        " and " + entry.path().filename().string());
        }
    }
    return out;
}

FidelitySearchConfig search_config_from(const RunManifest& m, std::optional<int> radius, std::optional<int> border,
                                        int jobs) {
    const json& o = m.overrides;
    std::vector<double> sigmas(FidelitySearchConfig::kDefaultSigmas.begin(), FidelitySearchConfig::kDefaultSigmas.end());
    if (o.contains("sigmas")) sigmas = o.at("sigmas").get<std::vector<double>>();
    std::vector<DownsampleMethod> methods(kAllMethods.begin(), kAllMethods.end());
    if (o.contains("downsample_methods")) {
        methods.clear();
        for (const auto& name : o.at("downsample_methods")) {
            const auto method = parse_method(name.get<std::string>());
            if (!method) throw Error("unknown down-sampling method '" + name.get<std::string>() + "'");
            methods.push_back(*method);
        }
    }
    FidelitySearchConfig cfg(std::move(sigmas), std::move(methods),
                             radius.value_or(o.value("radius", FidelitySearchConfig::kDefaultRadius)),
                             border.value_or(o.value("border", FidelitySearchConfig::kDefaultBorder)), m.factor);
    cfg.jobs = jobs;
    cfg.early_exit = o.value("early_exit", false);
    return cfg;
}

FidelityRun run_fidelity(const RunManifest& m, const FidelitySearchConfig& cfg) {
    const auto lr_files = images_by_stem(m.lr_dir);
    if (lr_files.empty()) throw Error("LR directory '" + m.lr_dir.string() + "' contains no images");
    FidelitySearchConfig inner = cfg;
    inner.jobs = 1;
    FidelityRun run;
    for (const auto& src : m.methods) {
        run.methods.push_back(run_method<FidelityResult>(
            src, lr_files, cfg.jobs, [&](const auto& sr_files, const std::string& stem, const std::filesystem::path& lr_path) {
                const ImagePlane lr = load_image(lr_path);
                const ImagePlane sr = load_sr(src, sr_files, lr_path, stem, m.factor);
                return fidelity(sr, lr, inner);
            }));
    }
    return run;
}

TraditionalRun run_traditional(const RunManifest& m, int jobs) {
    if (m.hr_dir.empty()) throw Error("traditional evaluation needs 'hr_dir' with the original images");
    const auto lr_files = images_by_stem(m.lr_dir);
    const auto hr_files = images_by_stem(m.hr_dir);
    if (lr_files.empty()) throw Error("LR directory '" + m.lr_dir.string() + "' contains no images");
    TraditionalRun run;
    for (const auto& src : m.methods) {
        run.methods.push_back(run_method<double>(
            src, lr_files, jobs, [&](const auto& sr_files, const std::string& stem, const std::filesystem::path& lr_path) {
                const auto hr = hr_files.find(stem);
                if (hr == hr_files.end()) throw Error("no original HR image named '" + stem + "'");
                return psnr(load_image(hr->second), load_sr(src, sr_files, lr_path, stem, m.factor));
            }));
    }
    return run;
}

std::vector<MetricScore> run_metrics(const RunManifest& m, int jobs) {
    if (m.hr_dir.empty()) throw Error("metric scoring needs 'hr_dir' with the original images");
    const auto lr_files = images_by_stem(m.lr_dir);
    const auto hr_files = images_by_stem(m.hr_dir);
    std::vector<MetricScore> out;
    for (const auto& src : m.methods) {
        std::map<std::string, std::filesystem::path> sr_files;
        if (!src.builtin_bicubic) sr_files = images_by_stem(src.dir);
        std::vector<std::pair<std::string, std::filesystem::path>> items(lr_files.begin(), lr_files.end());
        std::vector<std::array<MetricScore, 3>> scored(items.size());
        detail::parallel_for(items.size(), jobs, [&](std::size_t i) {
            const auto& [stem, lr_path] = items[i];
            const auto hr = hr_files.find(stem);
            if (hr == hr_files.end()) throw Error("no original HR image named '" + stem + "'");
            const ImagePlane a = load_image(hr->second);
            const ImagePlane b = load_sr(src, sr_files, lr_path, stem, m.factor);
            const std::string key = sr_image_key(src.name, stem);
            try {
                scored[i] = {MetricScore{"psnr", key, psnr(a, b), Polarity::higher_better},
                             MetricScore{"ssim", key, ssim(a, b), Polarity::higher_better},
                             MetricScore{"uqi", key, uqi(a, b), Polarity::higher_better}};
            } catch (const Error& e) {
                throw Error(key + ": " + e.what());
            }
        });
        for (const auto& triple : scored) out.insert(out.end(), triple.begin(), triple.end());
    }
    return out;
}

json to_json(const FidelityRun& run, const FidelitySearchConfig& cfg) {
    json methods = json::array();
    for (const auto& m : run.methods) methods.push_back(method_json(m, "fd_db"));
    json dm = json::array();
    for (auto method : cfg.methods()) dm.push_back(std::string(to_string(method)));
    return {{"config",
             {{"sigmas", cfg.sigmas()},
              {"downsample_methods", dm},
              {"radius", cfg.radius()},
              {"border", cfg.border()},
              {"factor", cfg.factor()}}},
            {"cap_db", kAggregateCapDb},
            {"methods", methods}};
}

json to_json(const TraditionalRun& run) {
    json methods = json::array();
    for (const auto& m : run.methods) methods.push_back(method_json(m, "psnr_db"));
    return {{"cap_db", kAggregateCapDb}, {"methods", methods}};
}

std::map<std::string, double> method_means_from_json(const json& j, const std::string& key) {
    std::map<std::string, double> out;
    for (const auto& m : j.at("methods")) {
        if (m.contains(key)) out[m.at("method").get<std::string>()] = m.at(key).get<double>();
    }
    return out;
}

StudyReport build_study_report(const StudyConfig& config, const std::vector<ChoiceEvent>& events,
                               const std::vector<MetricScore>& scores, std::optional<std::string> subset_method) {
    StudyReport r;
    r.methods = config.methods;
    r.subset_method = subset_method;
    const auto all_pairs = generate_pairs(config.images, config.methods, config.seed);
    const PairIndex full(all_pairs);
    r.study = run_study(full, events, config.threshold);

    if (subset_method) {
        if (std::find(config.methods.begin(), config.methods.end(), *subset_method) == config.methods.end()) {
            throw Error("subset method '" + *subset_method + "' is not part of the study");
        }
        r.pairs = pairs_with_method(all_pairs, *subset_method);
    } else {
        r.pairs = all_pairs;
    }
    const PairIndex analysed(r.pairs);

    GroundTruth gt{2, {}};
    for (const auto& p : r.pairs) gt.preferred[p.pair_id] = r.study.step2.preferred.at(p.pair_id);
    r.preference_counts = preference_counts(gt, analysed);

    std::set<std::string> metrics;
    for (const auto& s : scores) metrics.insert(s.metric);
    for (const auto& metric : metrics) {
        const auto prefs = metric_preferences(metric, scores, analysed);
        r.correlations.push_back(metric_hvs_correlation(metric, prefs, gt, analysed));
    }
    return r;
}

json to_json(const StudyReport& r) {
    json agreement = json::object();
    for (const auto& [annotator, a] : r.study.agreement) agreement[annotator] = a ? json(*a) : json(nullptr);
    json correlations = json::array();
    for (const auto& c : r.correlations) correlations.push_back(c);
    std::size_t consensus = 0;
    for (const auto& p : r.pairs) {
        if (r.study.step2.preferred.at(p.pair_id)) ++consensus;
    }
    return {{"subset_method", r.subset_method ? json(*r.subset_method) : json(nullptr)},
            {"pairs_analysed", r.pairs.size()},
            {"consensus_pairs", consensus},
            {"outliers", r.study.outliers},
            {"agreement", agreement},
            {"preference_counts", r.preference_counts},
            {"correlations", correlations},
            {"ground_truth_step1", r.study.step1},
            {"ground_truth_step2", r.study.step2}};
}

std::string format_method_table(const std::vector<std::string>& methods, const std::map<std::string, double>& fidelity,
                          const std::map<std::string, std::size_t>& preferences,
                          const std::map<std::string, double>& traditional) {
    const std::vector<std::string> header = {"method", "fidelity_db", "preference", "traditional_db"};
    std::vector<std::vector<std::string>> rows = {header};
    for (const auto& m : methods) {
        const auto f = fidelity.find(m);
        const auto p = preferences.find(m);
        const auto t = traditional.find(m);
        rows.push_back({m, f == fidelity.end() ? "-" : fixed2(f->second),
                        p == preferences.end() ? "-" : std::to_string(p->second),
                        t == traditional.end() ? "-" : fixed2(t->second)});
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                out << row[c] << std::string(widths[c] - row[c].size(), ' ');
            } else {
                out << "  " << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string format_correlations(const std::vector<CorrelationReport>& reports) {
    std::ostringstream out;
    out << "metric      agreement  counted  ties  no_consensus\n";
    for (const auto& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-10s  %9.4f  %7zu  %4zu  %12zu\n", r.metric.c_str(), r.agreement,
                      r.counted, r.excluded_ties, r.excluded_no_consensus);
        out << line;
    }
    return out.str();
}

}  // namespace fideval
