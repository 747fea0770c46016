#pragma once

// Content-addressed response cache: one JSON file per key under a root
// directory, filename = the key (a SHA-256 hex digest). Writes go to a
// temp file in the same directory and are renamed into place, so readers
// never observe partial entries. The first write for a key wins; later
// writers find the file present and leave it alone (greedy decoding is
// assumed to make all writers agree). An unreadable or mismatched entry
// is treated as a miss, counted, and overwritten by the next store.

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

#include "pforge/hash.hpp"

namespace pforge {

struct CachedResponse {
    std::string text;
    std::string provider;
    std::string model;

    bool operator==(const CachedResponse&) const = default;
};

struct CacheStats {
    size_t entries = 0;
    uintmax_t bytes = 0;
};

class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    std::optional<CachedResponse> load(const std::string& key) {
        const auto path = file_for(key);
        std::lock_guard<std::mutex> lock(shard_for(key));
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream buffer;
        buffer << in.rdbuf();
        try {
            const auto j = nlohmann::ordered_json::parse(buffer.str());
            if (j.at("request_sha256").get<std::string>() != key) {
                throw std::runtime_error("key mismatch");
            }
            return CachedResponse{j.at("response").get<std::string>(),
                                  j.at("provider").get<std::string>(),
                                  j.at("model").get<std::string>()};
        } catch (const std::exception&) {
            corrupt_entries_.fetch_add(1, std::memory_order_relaxed);
            return std::nullopt;
        }
    }

    // First write wins unless the existing entry is unreadable, in which
    // case it is replaced.
    void store(const std::string& key, const CachedResponse& value) {
        const auto path = file_for(key);
        std::lock_guard<std::mutex> lock(shard_for(key));
        if (readable(path, key)) return;
        nlohmann::ordered_json j;
        j["request_sha256"] = key;
        j["model"] = value.model;
        j["provider"] = value.provider;
        j["response"] = value.text;
        const auto tmp = path.string() + ".tmp-" +
                         std::to_string(tmp_counter_.fetch_add(1));
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) {
                throw std::runtime_error("cannot write cache entry: " + tmp);
            }
            out << j.dump() << '\n';
        }
        std::filesystem::rename(tmp, path);
    }

    CacheStats stats() const {
        CacheStats s;
        for (const auto& entry : std::filesystem::directory_iterator(root_)) {
            if (!entry.is_regular_file() ||
                entry.path().extension() != ".json") {
                continue;
            }
            ++s.entries;
            s.bytes += entry.file_size();
        }
        return s;
    }

    size_t clear() {
        size_t removed = 0;
        for (const auto& entry : std::filesystem::directory_iterator(root_)) {
            if (!entry.is_regular_file() ||
                entry.path().extension() != ".json") {
                continue;
            }
            std::error_code ec;
            if (std::filesystem::remove(entry.path(), ec)) ++removed;
        }
        return removed;
    }

    int corrupt_entries_seen() const {
        return corrupt_entries_.load(std::memory_order_relaxed);
    }

  private:
    std::filesystem::path file_for(const std::string& key) const {
        return root_ / (key + ".json");
    }

    bool readable(const std::filesystem::path& path, const std::string& key) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return false;
        std::ostringstream buffer;
        buffer << in.rdbuf();
        try {
            const auto j = nlohmann::ordered_json::parse(buffer.str());
            return j.at("request_sha256").get<std::string>() == key &&
                   j.contains("response");
        } catch (const std::exception&) {
            return false;
        }
    }

    std::mutex& shard_for(const std::string& key) {
        return shards_[fnv1a64(key) % shards_.size()];
    }

    std::filesystem::path root_;
    std::array<std::mutex, 64> shards_;
    std::atomic<int> corrupt_entries_{0};
    std::atomic<unsigned long long> tmp_counter_{0};
};

}  // namespace pforge
