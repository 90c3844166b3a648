#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace quandary {

using Json = nlohmann::json;

/// Whole-file read; throws Error{io} when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Splits on '\n', dropping a trailing '\r' per line. A final empty line
/// produced by a terminating newline is not returned.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Serializes each value on its own line, then writes atomically.
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& records);

/// Parses a JSONL file; blank lines are skipped. Any malformed line throws.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Append-only line journal. Each append is flushed before returning so a
/// caller may acknowledge the transition afterwards.
class Journal {
  public:
    explicit Journal(std::filesystem::path path);

    void append(const Json& record);
    [[nodiscard]] std::vector<Json> replay() const;
    /// Replaces the journal contents with `records` (temp + rename).
    void compact(const std::vector<Json>& records);

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
};

}  // namespace quandary
