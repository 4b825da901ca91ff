#include "fideval/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <set>
#include <string>

#include "fideval/error.hpp"
#include "fideval/image_io.hpp"
#include "fideval/serialize.hpp"

namespace fideval {

namespace {

struct Parsed {
    std::vector<ChoiceEvent> events;
    std::size_t good_bytes = 0;  // prefix ending at the last complete line
};

Parsed parse_log(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    Parsed out;
    std::set<std::pair<std::string, std::string>> seen;
    std::size_t start = 0;
    int line_no = 0;
    while (start < bytes.size()) {
        std::size_t end = start;
        while (end < bytes.size() && bytes[end] != '\n') ++end;
        if (end == bytes.size()) break;  // torn tail
        ++line_no;
        const std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                               bytes.begin() + static_cast<std::ptrdiff_t>(end));
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            ChoiceEvent e;
            try {
                e = nlohmann::json::parse(line).get<ChoiceEvent>();
            } catch (const std::exception& ex) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": bad event: " + ex.what());
            }
            if (!seen.emplace(e.annotator, e.pair_id).second) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": duplicate event for annotator '" +
                            e.annotator + "' and pair '" + e.pair_id + "'");
            }
            out.events.push_back(std::move(e));
        }
        start = end + 1;
        out.good_bytes = start;
    }
    return out;
}

}  // namespace

std::vector<ChoiceEvent> EventLog::read(const std::filesystem::path& path) {
    return parse_log(read_file_bytes(path), path).events;
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
    std::vector<std::uint8_t> bytes;
    if (std::filesystem::exists(path_)) bytes = read_file_bytes(path_);
    auto parsed = parse_log(bytes, path_);
    events_ = std::move(parsed.events);
    for (const auto& e : events_) keys_.emplace(e.annotator, e.pair_id);

    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open event log '" + path_.string() + "': " + std::strerror(errno));
    if (parsed.good_bytes < bytes.size()) {
        if (::ftruncate(fd_, static_cast<off_t>(parsed.good_bytes)) != 0) {
            const int err = errno;
            ::close(fd_);
            throw Error("cannot truncate torn event log tail: " + std::string(std::strerror(err)));
        }
    }
    size_ = static_cast<long long>(parsed.good_bytes);
}

void EventLog::rollback_and_throw(const char* what) {
    const int err = errno;
    // Drop any partial line so the next append starts on a clean boundary.
    [[maybe_unused]] const int rc = ::ftruncate(fd_, static_cast<off_t>(size_));
    throw Error(std::string(what) + ": " + std::strerror(err));
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

void EventLog::append(const ChoiceEvent& event) {
    if (keys_.contains({event.annotator, event.pair_id})) {
        throw Error("event log already holds a choice for this annotator and pair");
    }
    const std::string line = nlohmann::json(event).dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            rollback_and_throw("event log write failed");
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) rollback_and_throw("event log fsync failed");
    size_ += static_cast<long long>(line.size());
    events_.push_back(event);
    keys_.emplace(event.annotator, event.pair_id);
}

}  // namespace fideval
