#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fideval/study.hpp"

namespace fideval {

/// Append-only JSON-lines file of ChoiceEvents. Opening replays the existing
/// lines; a torn final line (no trailing newline) is an unacknowledged write
/// and is truncated away. append() returns only after the line is on disk.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);
    ~EventLog();

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    const std::vector<ChoiceEvent>& events() const noexcept { return events_; }
    const std::filesystem::path& path() const noexcept { return path_; }

    /// Throws Error on storage failure; the in-memory view is unchanged then.
    void append(const ChoiceEvent& event);

    /// Parses a whole log without opening it for writing.
    static std::vector<ChoiceEvent> read(const std::filesystem::path& path);

private:
    [[noreturn]] void rollback_and_throw(const char* what);

    std::filesystem::path path_;
    int fd_ = -1;
    long long size_ = 0;  // bytes of complete lines on disk
    std::vector<ChoiceEvent> events_;
    std::set<std::pair<std::string, std::string>> keys_;  // (annotator, pair)
};

}  // namespace fideval
