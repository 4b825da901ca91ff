#include "fideval/campaign.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "fideval/error.hpp"
#include "fideval/image_io.hpp"
#include "fideval/rng.hpp"
#include "fideval/serialize.hpp"

namespace fideval {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::int64_t system_now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open campaign config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("campaign config '" + path.string() + "': " + e.what());
    }
    CampaignConfig cfg;
    cfg.study = j.get<StudyConfig>();
    if (j.contains("image_root")) {
        std::filesystem::path root = j.at("image_root").get<std::string>();
        cfg.image_root = root.is_absolute() ? root : path.parent_path() / root;
    }
    return cfg;
}

Campaign::Campaign(CampaignConfig config, const std::filesystem::path& event_log, Clock clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : Clock(system_now_ms)) {
    pairs_ = generate_pairs(config_.study.images, config_.study.methods, config_.study.seed);
    for (std::size_t i = 0; i < pairs_.size(); ++i) pair_index_.emplace(pairs_[i].pair_id, i);
    for (const auto& method : config_.study.methods) {
        for (const auto& image : config_.study.images) refs_.emplace(image_ref(method, image), std::pair{method, image});
    }
    if (!config_.image_root.empty()) verify_images();

    log_ = std::make_unique<EventLog>(event_log);
    for (const auto& e : log_->events()) {
        const auto it = pair_index_.find(e.pair_id);
        if (it == pair_index_.end()) {
            throw Error("event log references pair '" + e.pair_id + "' which is not part of this campaign");
        }
        mark_answered(ensure_session(e.annotator, e.timestamp_ms), it->second);
    }
}

std::vector<std::size_t> Campaign::permutation_for(const std::string& annotator) const {
    std::vector<std::size_t> order(pairs_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(config_.study.seed ^ stable_hash(annotator));
    rng.shuffle(std::span(order));
    return order;
}

std::string Campaign::session_id_for(const std::string& annotator) const {
    return hex64(stable_hash("session:" + std::to_string(config_.study.seed) + ":" + annotator));
}

std::string Campaign::image_ref(const std::string& method, const std::string& image) const {
    return hex64(stable_hash("image:" + std::to_string(config_.study.seed) + ":" + sr_image_key(method, image)));
}

Campaign::Session& Campaign::ensure_session(const std::string& annotator, std::int64_t now) {
    const auto existing = session_of_.find(annotator);
    if (existing != session_of_.end()) return sessions_.at(existing->second);
    const std::string sid = session_id_for(annotator);
    Session s;
    s.annotator = annotator;
    s.order = permutation_for(annotator);
    s.answered.assign(s.order.size(), false);
    s.created_at_ms = now;
    session_of_.emplace(annotator, sid);
    return sessions_.emplace(sid, std::move(s)).first->second;
}

void Campaign::mark_answered(Session& s, std::size_t pair_index) {
    for (std::size_t pos = 0; pos < s.order.size(); ++pos) {
        if (s.order[pos] == pair_index) {
            if (!s.answered[pos]) {
                s.answered[pos] = true;
                ++s.answered_count;
            }
            break;
        }
    }
    while (s.cursor < s.order.size() && s.answered[s.cursor]) ++s.cursor;
}

SessionInfo Campaign::info(const Session& s) const {
    return {session_of_.at(s.annotator), s.annotator, s.cursor, s.order.size(), s.created_at_ms};
}

const Campaign::Session& Campaign::find_session(const std::string& session_id) const {
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw UnknownSession("unknown session '" + session_id + "'");
    return it->second;
}

SessionInfo Campaign::start_session(const std::string& annotator) {
    if (annotator.empty()) throw PreconditionError("annotator id must not be empty");
    std::lock_guard lock(mutex_);
    return info(ensure_session(annotator, clock_()));
}

SessionInfo Campaign::session(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    return info(find_session(session_id));
}

std::optional<PairPayload> Campaign::next_pair(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    const Session& s = find_session(session_id);
    if (s.cursor >= s.order.size()) return std::nullopt;
    const PairRecord& p = pairs_[s.order[s.cursor]];
    return PairPayload{p.pair_id, image_ref(p.method_left, p.image), image_ref(p.method_right, p.image), s.cursor,
                       s.order.size()};
}

SubmitResult Campaign::submit_choice(const std::string& session_id, const std::string& pair_id, Choice choice) {
    std::lock_guard lock(mutex_);
    const auto sit = sessions_.find(session_id);
    if (sit == sessions_.end()) throw UnknownSession("unknown session '" + session_id + "'");
    Session& s = sit->second;

    const auto pit = pair_index_.find(pair_id);
    if (pit == pair_index_.end()) return {SubmitStatus::out_of_order, s.cursor};
    for (std::size_t pos = 0; pos < s.order.size(); ++pos) {
        if (s.order[pos] == pit->second && s.answered[pos]) return {SubmitStatus::duplicate, s.cursor};
    }
    if (s.cursor >= s.order.size() || s.order[s.cursor] != pit->second) {
        return {SubmitStatus::out_of_order, s.cursor};
    }
    log_->append({s.annotator, pair_id, choice, clock_()});
    mark_answered(s, pit->second);
    return {SubmitStatus::accepted, s.cursor};
}

std::filesystem::path Campaign::image_path(const std::string& method, const std::string& image) const {
    const auto dir = config_.image_root / method;
    for (const char* ext : {".png", ".pgm"}) {
        auto p = dir / (image + ext);
        if (std::filesystem::exists(p)) return p;
    }
    if (std::filesystem::exists(dir / image)) return dir / image;
    throw Error("no image file for '" + sr_image_key(method, image) + "' under " + config_.image_root.string());
}

void Campaign::verify_images() const {
    for (const auto& image : config_.study.images) {
        std::optional<std::pair<int, int>> dims;
        for (const auto& method : config_.study.methods) {
            const ImagePlane img = load_image(image_path(method, image));
            const std::pair<int, int> d{img.width(), img.height()};
            if (dims && *dims != d) {
                throw Error("SR results for image '" + image + "' differ in size; pairs must be shown at identical scale");
            }
            dims = d;
        }
    }
}

std::vector<std::uint8_t> Campaign::serve_image(const std::string& ref) const {
    const auto it = refs_.find(ref);
    if (it == refs_.end() || config_.image_root.empty()) throw UnknownImage("unknown image ref '" + ref + "'");
    {
        std::lock_guard lock(image_cache_mutex_);
        const auto cached = image_cache_.find(ref);
        if (cached != image_cache_.end()) return cached->second;
    }
    const auto& [method, image] = it->second;
    auto bytes = encode_png(load_image(image_path(method, image)));
    std::lock_guard lock(image_cache_mutex_);
    return image_cache_.emplace(ref, std::move(bytes)).first->second;
}

std::vector<AnnotatorProgress> Campaign::progress() const {
    std::lock_guard lock(mutex_);
    std::vector<AnnotatorProgress> out;
    for (const auto& [annotator, sid] : session_of_) {
        const Session& s = sessions_.at(sid);
        out.push_back({annotator, s.answered_count, s.order.size()});
    }
    return out;
}

std::vector<ChoiceEvent> Campaign::snapshot_events() const {
    std::lock_guard lock(mutex_);
    return log_->events();
}

}  // namespace fideval
