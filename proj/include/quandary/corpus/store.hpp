#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "quandary/corpus/types.hpp"

namespace quandary {

inline const std::string& record_key(const Quandary& q) { return q.id; }
inline const std::string& record_key(const ReferenceAnswer& a) { return a.quandary_id; }
inline const std::string& record_key(const Principle& p) { return p.id; }

/// Insertion-ordered record set with a hash index on the record key.
/// Readers share a lock; writers are serialized. When constructed with a
/// journal path, each insert is appended to it before becoming visible.
template <typename Record>
class RecordStore {
  public:
    RecordStore() = default;

    explicit RecordStore(std::filesystem::path journal) : journal_(std::make_unique<Journal>(std::move(journal)))
    {
        for (const auto& j : journal_->replay()) {
            insert_unlocked(from_json(j));
        }
    }

    /// Returns false when the key already exists; the store is unchanged.
    bool insert(Record record)
    {
        std::unique_lock lock(*mutex_);
        if (index_.contains(record_key(record))) {
            return false;
        }
        if (journal_) {
            journal_->append(to_json(record));
        }
        insert_unlocked(std::move(record));
        return true;
    }

    [[nodiscard]] std::optional<Record> find(const std::string& key) const
    {
        std::shared_lock lock(*mutex_);
        auto it = index_.find(key);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return records_[it->second];
    }

    [[nodiscard]] bool contains(const std::string& key) const
    {
        std::shared_lock lock(*mutex_);
        return index_.contains(key);
    }

    [[nodiscard]] std::vector<Record> all() const
    {
        std::shared_lock lock(*mutex_);
        return records_;
    }

    [[nodiscard]] std::size_t size() const
    {
        std::shared_lock lock(*mutex_);
        return records_.size();
    }

  private:
    static Record from_json(const Json& j)
    {
        if constexpr (std::is_same_v<Record, Quandary>) {
            return parse_quandary(j);
        } else if constexpr (std::is_same_v<Record, ReferenceAnswer>) {
            return parse_answer(j);
        } else {
            return parse_principle(j);
        }
    }

    void insert_unlocked(Record record)
    {
        index_.emplace(record_key(record), records_.size());
        records_.push_back(std::move(record));
    }

    std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
    std::unique_ptr<Journal> journal_;
    std::vector<Record> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

using QuandaryStore = RecordStore<Quandary>;
using AnswerStore = RecordStore<ReferenceAnswer>;
using PrincipleStore = RecordStore<Principle>;

struct Corpus {
    QuandaryStore quandaries;
    AnswerStore answers;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

struct IngestReport {
    std::size_t accepted_quandaries = 0;
    std::size_t accepted_answers = 0;
    std::vector<Rejection> rejections;
};

struct IngestResult {
    Corpus corpus;
    IngestReport report;
};

enum class IngestFormat { jsonl };

/// Reads quandary and answer records from a JSONL file.
///
/// A line carrying "context" is a quandary; it may embed its reference answer
/// under "answer" as {"text", "author"}. A line carrying "quandary_id" is a
/// standalone answer. Malformed lines, duplicate ids, and answers that do not
/// resolve to an ingested quandary are skipped and listed in the report.
/// Throws Error{io} if the file cannot be read.
IngestResult ingest(const std::filesystem::path& path, IngestFormat format = IngestFormat::jsonl);

/// Writes quandaries then answers as standalone records; `ingest` of the
/// result reproduces both stores.
void export_corpus(const std::filesystem::path& path, const Corpus& corpus);

Json to_json(const IngestReport& report);

}  // namespace quandary
