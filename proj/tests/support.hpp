#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "quandary/common/io.hpp"
#include "quandary/common/rng.hpp"
#include "quandary/corpus/types.hpp"

namespace quandary::testing {

inline std::filesystem::path fixture(const std::string& name)
{
    return std::filesystem::path(QUANDARY_FIXTURE_DIR) / name;
}

inline std::filesystem::path data_path(const std::string& name)
{
    return std::filesystem::path(QUANDARY_DATA_DIR) / name;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag)
    {
        static std::uint64_t counter = 0;
        DeterministicRng rng(static_cast<std::uint64_t>(std::rand()) ^ (++counter << 32U));
        path_ = std::filesystem::temp_directory_path() /
                ("quandary-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(rng.next() % 1000000));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

/// Random token sequences over a small vocabulary so overlaps are common.
class TokenGen {
  public:
    explicit TokenGen(std::uint64_t seed, std::size_t vocabulary = 8) : rng_(seed), vocabulary_(vocabulary) {}

    std::vector<std::string> tokens(std::size_t max_len)
    {
        const auto n = static_cast<std::size_t>(rng_.below(max_len + 1));
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(word());
        }
        return out;
    }

    std::string word() { return "w" + std::to_string(rng_.below(vocabulary_)); }

    std::string text(std::size_t max_len)
    {
        std::string s;
        for (const auto& t : tokens(max_len)) {
            s += s.empty() ? "" : " ";
            s += t;
        }
        return s;
    }

    DeterministicRng& rng() { return rng_; }

  private:
    DeterministicRng rng_;
    std::size_t vocabulary_;
};

inline Quandary make_quandary(const std::string& id, std::vector<std::string> context, std::string question)
{
    return Quandary{id, std::move(context), std::move(question), "test"};
}

inline Principle make_principle(const std::string& id, const std::string& text,
                                Provenance provenance = Provenance::retrieved)
{
    return Principle{id, text, provenance};
}

}  // namespace quandary::testing
