#include "quandary/common/io.hpp"

#include <fstream>
#include <sstream>

#include "quandary/common/error.hpp"

namespace quandary {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::io, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_lines(const fs::path& path)
{
    const std::string content = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) {
            end = content.size();
        }
        std::string line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorCode::io, "cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fail(ErrorCode::io, "short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void write_jsonl_atomic(const fs::path& path, const std::vector<Json>& records)
{
    std::string content;
    for (const auto& record : records) {
        content += record.dump();
        content += '\n';
    }
    write_file_atomic(path, content);
}

std::vector<Json> read_jsonl(const fs::path& path)
{
    std::vector<Json> records;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            fail(ErrorCode::parse,
                 path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

Journal::Journal(fs::path path) : path_(std::move(path))
{
    if (path_.has_parent_path()) {
        fs::create_directories(path_.parent_path());
    }
}

void Journal::append(const Json& record)
{
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        fail(ErrorCode::io, "cannot append to " + path_.string());
    }
    out << record.dump() << '\n';
    out.flush();
    if (!out) {
        fail(ErrorCode::io, "short write to " + path_.string());
    }
}

std::vector<Json> Journal::replay() const
{
    std::lock_guard lock(mutex_);
    if (!fs::exists(path_)) {
        return {};
    }
    return read_jsonl(path_);
}

void Journal::compact(const std::vector<Json>& records)
{
    std::lock_guard lock(mutex_);
    write_jsonl_atomic(path_, records);
}

}  // namespace quandary
