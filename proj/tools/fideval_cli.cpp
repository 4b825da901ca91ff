// fideval: batch evaluation of super-resolution results.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "fideval/campaign.hpp"
#include "fideval/counterexample.hpp"
#include "fideval/error.hpp"
#include "fideval/evaluation.hpp"
#include "fideval/event_log.hpp"
#include "fideval/http_service.hpp"
#include "fideval/image_io.hpp"
#include "fideval/iqa.hpp"
#include "fideval/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fideval;

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> factor;
    std::optional<int> border;
    std::optional<int> radius;
    int jobs = 1;
    std::string output;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out.flush()) throw Error("write failed for '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RunManifest manifest_with_overrides(const std::string& path, const GlobalOptions& g) {
    RunManifest m = load_manifest(path);
    if (g.factor) m.factor = *g.factor;
    return m;
}

fs::path output_for(const GlobalOptions& g, const RunManifest& m, const char* name) {
    return g.output.empty() ? m.output_dir / name : fs::path(g.output);
}

std::string method_table(const std::vector<std::string>& names, const std::map<std::string, double>& means,
                         bool fidelity_column) {
    return fidelity_column ? format_method_table(names, means, {}, {}) : format_method_table(names, {}, {}, means);
}

template <typename Run>
int report_run(const Run& run, const json& j, const fs::path& out, const std::string& key, bool fidelity_column) {
    write_text(out, dump(j));
    std::vector<std::string> names;
    for (const auto& m : run.methods) names.push_back(m.method);
    std::cout << method_table(names, method_means_from_json(j, key), fidelity_column);
    int failures = 0;
    for (const auto& m : run.methods) {
        if (!m.error.empty()) {
            std::cerr << "error: method '" << m.method << "': " << m.error << "\n";
            ++failures;
        }
        for (const auto& item : m.items) {
            if (!item.value) {
                std::cerr << "error: " << m.method << "/" << item.image << ": " << item.error << "\n";
                ++failures;
            }
        }
        if (m.mean.capped > 0) {
            std::cerr << "note: method '" << m.method << "': " << m.mean.capped << " infinite value(s) capped at "
                      << kAggregateCapDb << " dB in the mean\n";
        }
    }
    return failures == 0 ? 0 : 1;
}

int cmd_fidelity(const GlobalOptions& g, const std::string& manifest, const std::string& sr, const std::string& lr,
                 bool early_exit) {
    if (!sr.empty() || !lr.empty()) {
        if (sr.empty() || lr.empty()) throw PreconditionError("--sr and --lr must be given together");
        FidelitySearchConfig base;
        FidelitySearchConfig cfg(base.sigmas(), base.methods(), g.radius.value_or(base.radius()),
                                 g.border.value_or(base.border()), g.factor.value_or(base.factor()));
        cfg.jobs = g.jobs;
        cfg.early_exit = early_exit;
        const auto r = fidelity(load_image(sr), load_image(lr), cfg);
        const std::string text = dump(fidelity_record(fs::path(sr).stem().string(), r));
        if (g.output.empty()) {
            std::cout << text;
        } else {
            write_text(g.output, text);
        }
        return 0;
    }
    if (manifest.empty()) throw PreconditionError("fidelity needs a manifest or --sr/--lr");
    const RunManifest m = manifest_with_overrides(manifest, g);
    FidelitySearchConfig cfg = search_config_from(m, g.radius, g.border, g.jobs);
    if (early_exit) cfg.early_exit = true;
    const auto run = run_fidelity(m, cfg);
    return report_run(run, to_json(run, cfg), output_for(g, m, "fidelity.json"), "mean_fd_db", true);
}

int cmd_traditional(const GlobalOptions& g, const std::string& manifest) {
    const RunManifest m = manifest_with_overrides(manifest, g);
    const auto run = run_traditional(m, g.jobs);
    return report_run(run, to_json(run), output_for(g, m, "traditional.json"), "mean_psnr_db", false);
}

int cmd_metrics(const GlobalOptions& g, const std::string& manifest) {
    const RunManifest m = manifest_with_overrides(manifest, g);
    const auto scores = run_metrics(m, g.jobs);
    std::ostringstream csv;
    write_scores_csv(csv, scores);
    const fs::path out = output_for(g, m, "scores.csv");
    write_text(out, csv.str());
    std::cout << "wrote " << scores.size() << " scores to " << out.string() << "\n";
    return 0;
}

int cmd_counterexample(const GlobalOptions& g, const std::string& kind, const std::string& input,
                       const std::string& output, double gain, double max_mv, const std::string& direction) {
    const ImagePlane a = load_image(input);
    ImagePlane e = a;
    json report;
    if (kind == "contrast") {
        e = contrast_enhance(a, ContrastParams{gain});
        report["kind"] = "contrast";
        report["c"] = gain;
        report["max_lr_difference"] = verify_null_space(a, e, DownsampleMethod::box, 2);
    } else if (kind == "warp") {
        WarpParams p;
        p.max_mv = max_mv;
        if (direction == "horizontal") {
            p.direction = WarpDirection::horizontal;
        } else if (direction == "vertical") {
            p.direction = WarpDirection::vertical;
        } else {
            throw PreconditionError("--direction must be horizontal or vertical");
        }
        e = warp_image(a, p);
        report["kind"] = "warp";
        report["max_mv"] = max_mv;
        report["direction"] = direction;
        report["max_lr_difference"] = nullptr;
    } else {
        throw PreconditionError("counterexample kind must be warp or contrast");
    }
    report["input"] = input;
    report["output"] = output;
    report["psnr_vs_original"] = db_to_json(psnr(a, e));
    const std::size_t clamped = save_image(e, output);
    report["clamped_samples"] = clamped;
    if (clamped > 0) {
        std::cerr << "warning: " << clamped
                  << " sample(s) clamped to [0, 255] on export; the saved image no longer shares the exact LR "
                     "projection of the input\n";
    }
    const std::string text = dump(report);
    if (g.output.empty()) {
        std::cout << text;
    } else {
        write_text(g.output, text);
    }
    return 0;
}

StudyConfig study_config(const GlobalOptions& g, const std::string& path) {
    StudyConfig c = load_campaign_config(path).study;
    if (g.seed) c.seed = *g.seed;
    return c;
}

int cmd_pairs(const GlobalOptions& g, const std::string& config, const std::string& subset) {
    const StudyConfig c = study_config(g, config);
    auto pairs = generate_pairs(c.images, c.methods, c.seed);
    if (!subset.empty()) pairs = pairs_with_method(pairs, subset);
    const std::string text = dump(json(pairs));
    if (g.output.empty()) {
        std::cout << text;
    } else {
        write_text(g.output, text);
    }
    std::cerr << pairs.size() << " pairs\n";
    return 0;
}

int cmd_serve(const GlobalOptions& g, const std::string& config, const std::string& log, const std::string& host,
              int port, const std::string& ui_dir, const std::string& port_file) {
    CampaignConfig cfg = load_campaign_config(config);
    if (g.seed) cfg.study.seed = *g.seed;

    // Route termination signals to a waiter thread that stops the server.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Campaign campaign(std::move(cfg), log);
    AnnotationServer server(campaign, ui_dir);
    const int bound = server.bind(host, port);
    if (!port_file.empty()) {
        const fs::path tmp = port_file + ".tmp";
        write_text(tmp, std::to_string(bound) + "\n");
        fs::rename(tmp, port_file);
    }
    std::cerr << "serving " << campaign.pairs().size() << " pairs on http://" << host << ":" << bound << "\n";

    std::jthread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen_after_bind();
    pthread_kill(waiter.native_handle(), SIGTERM);
    return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& config, const std::string& log,
               const std::vector<std::string>& score_files, const std::string& fidelity_json,
               const std::string& traditional_json, const std::string& subset) {
    const StudyConfig c = study_config(g, config);
    const auto events = EventLog::read(log);
    std::vector<MetricScore> scores;
    for (const auto& f : score_files) {
        auto more = load_external_scores(f);
        scores.insert(scores.end(), more.begin(), more.end());
    }
    const auto report =
        build_study_report(c, events, scores, subset.empty() ? std::nullopt : std::optional<std::string>(subset));

    const auto means = [](const std::string& path, const char* key) {
        if (path.empty()) return std::map<std::string, double>{};
        std::ifstream in(path);
        if (!in) throw Error("cannot open '" + path + "'");
        return method_means_from_json(json::parse(in), key);
    };
    const auto fid = means(fidelity_json, "mean_fd_db");
    const auto trad = means(traditional_json, "mean_psnr_db");

    std::cout << "pairs analysed: " << report.pairs.size() << "\n";
    if (!report.study.outliers.empty()) {
        std::cout << "outliers removed:";
        for (const auto& o : report.study.outliers) std::cout << " " << o;
        std::cout << "\n";
    }
    std::cout << "\n" << format_method_table(report.methods, fid, report.preference_counts, trad);
    if (!report.correlations.empty()) std::cout << "\n" << format_correlations(report.correlations);
    if (!g.output.empty()) write_text(g.output, dump(to_json(report)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fidelity-based evaluation of super-resolution results"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Study seed (overrides the config)");
    app.add_option("--factor", g.factor, "Scale factor")->check(CLI::Range(2, 64));
    app.add_option("--border", g.border, "Border excluded from comparisons, in LR pixels")->check(CLI::NonNegativeNumber);
    app.add_option("--radius", g.radius, "Translation search radius, in LR pixels")->check(CLI::NonNegativeNumber);
    app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--output", g.output, "Output file");

    std::string manifest, sr, lr;
    bool early_exit = false;
    auto* fid = app.add_subcommand("fidelity", "Fidelity of SR results to their LR inputs");
    fid->add_option("manifest", manifest, "Run manifest (JSON)")->check(CLI::ExistingFile);
    fid->add_option("--sr", sr, "Single SR image")->check(CLI::ExistingFile);
    fid->add_option("--lr", lr, "Single LR image")->check(CLI::ExistingFile);
    fid->add_flag("--early-exit", early_exit, "Prune translation rows that cannot win");

    auto* trad = app.add_subcommand("traditional", "PSNR of SR results against the original HR images");
    trad->add_option("manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);

    auto* met = app.add_subcommand("metrics", "PSNR/SSIM/UQI score table (CSV) for the study report");
    met->add_option("manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);

    std::string kind, input, output_image, direction = "horizontal";
    double gain = 4.0, max_mv = 40.0;
    auto* ce = app.add_subcommand("counterexample", "Images that fool PSNR or share an LR projection");
    ce->add_option("kind", kind, "warp | contrast")->required()->check(CLI::IsMember({"warp", "contrast"}));
    ce->add_option("input", input, "Original HR image")->required()->check(CLI::ExistingFile);
    ce->add_option("output", output_image, "Generated image (.png or .pgm)")->required();
    ce->add_option("--c", gain, "Contrast gain");
    ce->add_option("--max-mv", max_mv, "Maximum warp displacement in pixels");
    ce->add_option("--direction", direction, "Warp direction")->check(CLI::IsMember({"horizontal", "vertical"}));

    std::string config, subset;
    auto* pairs = app.add_subcommand("pairs", "List the comparison pairs of a campaign");
    pairs->add_option("config", config, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    pairs->add_option("--subset", subset, "Only pairs containing this method");

    std::string log, host = "127.0.0.1", ui_dir, port_file;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    serve->add_option("config", config, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    serve->add_option("--log", log, "Event log (JSON lines)")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 = any free port)")->check(CLI::Range(0, 65535));
    serve->add_option("--ui-dir", ui_dir, "Static UI bundle")->check(CLI::ExistingDirectory);
    serve->add_option("--port-file", port_file, "Write the bound port here once listening");

    std::vector<std::string> score_files;
    std::string fidelity_json, traditional_json;
    auto* rep = app.add_subcommand("report", "Study ground truth, preference counts and metric correlations");
    rep->add_option("config", config, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    rep->add_option("log", log, "Event log (JSON lines)")->required()->check(CLI::ExistingFile);
    rep->add_option("--scores", score_files, "Metric score CSV (repeatable)")->check(CLI::ExistingFile);
    rep->add_option("--fidelity", fidelity_json, "Output of the fidelity command")->check(CLI::ExistingFile);
    rep->add_option("--traditional", traditional_json, "Output of the traditional command")->check(CLI::ExistingFile);
    rep->add_option("--subset", subset, "Restrict counts and correlations to pairs with this method");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fid) return cmd_fidelity(g, manifest, sr, lr, early_exit);
        if (*trad) return cmd_traditional(g, manifest);
        if (*met) return cmd_metrics(g, manifest);
        if (*ce) return cmd_counterexample(g, kind, input, output_image, gain, max_mv, direction);
        if (*pairs) return cmd_pairs(g, config, subset);
        if (*serve) return cmd_serve(g, config, log, host, port, ui_dir, port_file);
        if (*rep) return cmd_report(g, config, log, score_files, fidelity_json, traditional_json, subset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
