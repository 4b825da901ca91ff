#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fideval/error.hpp"
#include "fideval/event_log.hpp"
#include "fideval/study.hpp"

namespace fideval {

class UnknownSession : public Error {
public:
    using Error::Error;
};

class UnknownImage : public Error {
public:
    using Error::Error;
};

/// Study definition plus where the SR outputs live. Images are looked up as
/// `<image_root>/<method>/<image>.png` (or `.pgm`).
struct CampaignConfig {
    StudyConfig study;
    std::filesystem::path image_root;
};

CampaignConfig load_campaign_config(const std::filesystem::path& path);

struct SessionInfo {
    std::string session_id;
    std::string annotator;
    std::size_t cursor = 0;
    std::size_t total = 0;
    std::int64_t created_at_ms = 0;
};

/// What the annotator sees next. Image refs are opaque; nothing here names
/// an SR method.
struct PairPayload {
    std::string pair_id;
    std::string left_ref;
    std::string right_ref;
    std::size_t index = 0;
    std::size_t total = 0;
};

enum class SubmitStatus { accepted, duplicate, out_of_order };

struct SubmitResult {
    SubmitStatus status = SubmitStatus::accepted;
    std::size_t cursor = 0;
};

struct AnnotatorProgress {
    std::string annotator;
    std::size_t answered = 0;
    std::size_t total = 0;
};

/// Annotation campaign state: pair records, per-annotator sessions and the
/// durable event log. Reconstructed entirely by replaying the log, so a
/// restarted process reaches the same cursors. Thread-safe; log appends are
/// serialized through one writer.
class Campaign {
public:
    using Clock = std::function<std::int64_t()>;

    Campaign(CampaignConfig config, const std::filesystem::path& event_log, Clock clock = {});

    const CampaignConfig& config() const noexcept { return config_; }
    const std::vector<PairRecord>& pairs() const noexcept { return pairs_; }

    /// Idempotent per annotator: reconnecting resumes at the first
    /// unanswered pair of the same permutation.
    SessionInfo start_session(const std::string& annotator);

    /// The pair at the cursor (without advancing), or nullopt when done.
    std::optional<PairPayload> next_pair(const std::string& session_id) const;

    /// Records the choice durably before returning `accepted`. The pair must
    /// be the one at the cursor. Storage failures throw and leave the cursor
    /// unchanged.
    SubmitResult submit_choice(const std::string& session_id, const std::string& pair_id, Choice choice);

    /// PNG bytes for an image ref issued by next_pair.
    std::vector<std::uint8_t> serve_image(const std::string& ref) const;

    std::vector<AnnotatorProgress> progress() const;
    SessionInfo session(const std::string& session_id) const;

    /// Consistent copy of the event log for analysis.
    std::vector<ChoiceEvent> snapshot_events() const;

    /// Deterministic per-annotator presentation order (indices into pairs()).
    std::vector<std::size_t> permutation_for(const std::string& annotator) const;
    std::string session_id_for(const std::string& annotator) const;
    std::string image_ref(const std::string& method, const std::string& image) const;

private:
    struct Session {
        std::string annotator;
        std::vector<std::size_t> order;
        std::vector<bool> answered;  // indexed by position in `order`
        std::size_t cursor = 0;
        std::size_t answered_count = 0;
        std::int64_t created_at_ms = 0;
    };

    Session& ensure_session(const std::string& annotator, std::int64_t now);
    void mark_answered(Session& s, std::size_t pair_index);
    SessionInfo info(const Session& s) const;
    const Session& find_session(const std::string& session_id) const;
    std::filesystem::path image_path(const std::string& method, const std::string& image) const;
    void verify_images() const;

    CampaignConfig config_;
    std::vector<PairRecord> pairs_;
    std::map<std::string, std::size_t> pair_index_;
    std::map<std::string, std::pair<std::string, std::string>> refs_;  // ref -> (method, image)
    Clock clock_;

    mutable std::mutex mutex_;
    std::unique_ptr<EventLog> log_;
    std::map<std::string, Session> sessions_;           // by session id
    std::map<std::string, std::string> session_of_;     // annotator -> session id

    mutable std::mutex image_cache_mutex_;
    mutable std::map<std::string, std::vector<std::uint8_t>> image_cache_;
};

}  // namespace fideval
