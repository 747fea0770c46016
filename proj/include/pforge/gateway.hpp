#pragma once

// Uniform completion interface over an OpenAI-compatible remote endpoint
// and a deterministic scripted mock, plus the cache-aware Gateway that
// bounds parallelism and request rate.
//
// Cache keys hash a length-prefixed canonical encoding of every request
// field (model, messages, temperature bits, max_tokens); strings are
// taken verbatim since whitespace is meaningful in prompts.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "pforge/cache.hpp"
#include "pforge/embedding.hpp"
#include "pforge/hash.hpp"

namespace pforge {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 100;

    bool operator==(const CompletionRequest&) const = default;

    static CompletionRequest user_prompt(std::string model, std::string text) {
        CompletionRequest request;
        request.model = std::move(model);
        request.messages.push_back({"user", std::move(text)});
        return request;
    }
};

struct CompletionResult {
    std::string text;  // raw assistant message, untrimmed
    std::string provider;
    bool cached = false;
    double latency_ms = 0.0;
};

namespace detail {

inline void append_u64(std::string& out, uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }
}

inline void append_sized(std::string& out, const std::string& s) {
    append_u64(out, s.size());
    out += s;
}

}  // namespace detail

inline std::string canonical_request_bytes(const CompletionRequest& request) {
    std::string out;
    detail::append_sized(out, request.model);
    detail::append_u64(out, request.messages.size());
    for (const auto& message : request.messages) {
        detail::append_sized(out, message.role);
        detail::append_sized(out, message.content);
    }
    detail::append_u64(out, std::bit_cast<uint64_t>(request.temperature));
    detail::append_u64(out, static_cast<uint64_t>(request.max_tokens));
    return out;
}

inline std::string cache_key(const CompletionRequest& request) {
    return sha256_hex(canonical_request_bytes(request));
}

class ProviderError : public std::runtime_error {
  public:
    ProviderError(const std::string& what, int status, bool retryable)
        : std::runtime_error(what), status_(status), retryable_(retryable) {}

    int status() const { return status_; }  // 0 = transport failure
    bool retryable() const { return retryable_; }

  private:
    int status_;
    bool retryable_;
};

class Provider {
  public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    // Returns the assistant text; throws ProviderError when the call
    // cannot be satisfied.
    virtual std::string complete(const CompletionRequest& request) = 0;
};

// Scripted responses for deterministic runs. Matchers are evaluated in
// declaration order against all message contents joined by newlines;
// the first hit wins, otherwise default_response is returned.
struct MockRule {
    enum class Kind { Contains, ContainsAll, Matches };

    Kind kind = Kind::Contains;
    std::vector<std::string> needles;  // Contains/Matches use needles[0]
    std::string response;
};

struct MockScript {
    std::vector<MockRule> rules;
    std::string default_response;

    std::string respond(const std::string& haystack) const {
        for (const auto& rule : rules) {
            bool hit = false;
            switch (rule.kind) {
                case MockRule::Kind::Contains:
                    hit = haystack.find(rule.needles[0]) != std::string::npos;
                    break;
                case MockRule::Kind::ContainsAll:
                    hit = true;
                    for (const auto& needle : rule.needles) {
                        if (haystack.find(needle) == std::string::npos) {
                            hit = false;
                            break;
                        }
                    }
                    break;
                case MockRule::Kind::Matches:
                    // anchored; remember '.' does not cross newlines, use
                    // [\s\S] in patterns that must span lines
                    hit = std::regex_match(haystack, std::regex(rule.needles[0]));
                    break;
            }
            if (hit) return rule.response;
        }
        return default_response;
    }

    // {"rules": [{"contains": "...", "response": "..."},
    //            {"contains_all": ["...", "..."], "response": "..."},
    //            {"matches": "<anchored regex>", "response": "..."}],
    //  "default": "..."}
    static MockScript from_json(const nlohmann::ordered_json& j) {
        MockScript script;
        script.default_response = j.value("default", "");
        if (!j.contains("rules")) return script;
        size_t index = 0;
        for (const auto& rule_json : j.at("rules")) {
            MockRule rule;
            if (rule_json.contains("contains")) {
                rule.kind = MockRule::Kind::Contains;
                rule.needles = {rule_json["contains"].get<std::string>()};
            } else if (rule_json.contains("contains_all")) {
                rule.kind = MockRule::Kind::ContainsAll;
                rule.needles =
                    rule_json["contains_all"].get<std::vector<std::string>>();
                if (rule.needles.empty()) {
                    throw std::invalid_argument(
                        "mock rule " + std::to_string(index) +
                        ": contains_all needs at least one needle");
                }
            } else if (rule_json.contains("matches")) {
                rule.kind = MockRule::Kind::Matches;
                rule.needles = {rule_json["matches"].get<std::string>()};
            } else {
                throw std::invalid_argument(
                    "mock rule " + std::to_string(index) +
                    ": expected one of contains/contains_all/matches");
            }
            rule.response = rule_json.at("response").get<std::string>();
            script.rules.push_back(std::move(rule));
            ++index;
        }
        return script;
    }
};

class MockProvider : public Provider {
  public:
    explicit MockProvider(MockScript script) : script_(std::move(script)) {}

    std::string name() const override { return "mock"; }

    std::string complete(const CompletionRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        std::string haystack;
        for (const auto& message : request.messages) {
            if (!haystack.empty()) haystack.push_back('\n');
            haystack += message.content;
        }
        return script_.respond(haystack);
    }

    int call_count() const { return calls_.load(std::memory_order_relaxed); }

  private:
    MockScript script_;
    std::atomic<int> calls_{0};
};

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_ms = 500.0;
    double factor = 2.0;
    double max_delay_ms = 8000.0;
};

inline std::string api_key_from_env() {
    const char* value = std::getenv("PF_API_KEY");
    return value ? value : "";
}

namespace detail {

inline bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

inline std::string body_excerpt(const std::string& body) {
    constexpr size_t kLimit = 200;
    if (body.size() <= kLimit) return body;
    return body.substr(0, kLimit) + "...";
}

// Full-jitter backoff delay before the given retry (attempt is
// 1-based over completed tries).
inline double backoff_delay_ms(const RetryPolicy& policy, int attempt) {
    double cap = policy.base_delay_ms;
    for (int i = 1; i < attempt; ++i) cap *= policy.factor;
    cap = std::min(cap, policy.max_delay_ms);
    thread_local std::mt19937_64 rng(std::random_device{}());
    std::uniform_real_distribution<double> jitter(0.0, cap);
    return jitter(rng);
}

// POST with retries on 429/5xx/transport failure. Terminal statuses
// throw immediately with a body excerpt.
inline nlohmann::ordered_json post_json_with_retries(
    const std::string& base_url, const std::string& path,
    const std::string& api_key, const RetryPolicy& policy,
    const nlohmann::ordered_json& body) {
    std::string last_error = "no attempt made";
    int last_status = 0;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        if (attempt > 1) {
            const double delay = backoff_delay_ms(policy, attempt - 1);
            if (delay > 0) {
                std::this_thread::sleep_for(
                    std::chrono::duration<double, std::milli>(delay));
            }
        }
        httplib::Client client(base_url);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key);
        }
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_status = 0;
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                return nlohmann::ordered_json::parse(res->body);
            } catch (const std::exception& e) {
                throw ProviderError(
                    "malformed response body: " + body_excerpt(res->body), 200,
                    false);
            }
        }
        if (retryable_status(res->status)) {
            last_status = res->status;
            last_error = "status " + std::to_string(res->status) + ": " +
                         body_excerpt(res->body);
            continue;
        }
        throw ProviderError("provider returned status " +
                                std::to_string(res->status) + ": " +
                                body_excerpt(res->body),
                            res->status, false);
    }
    throw ProviderError("retries exhausted after " +
                            std::to_string(policy.max_attempts) +
                            " attempts; last error: " + last_error,
                        last_status, true);
}

}  // namespace detail

// OpenAI-compatible chat endpoint: POST <base>/v1/chat/completions.
class RemoteProvider : public Provider {
  public:
    explicit RemoteProvider(std::string base_url,
                            std::string api_key = api_key_from_env(),
                            RetryPolicy policy = {})
        : base_url_(std::move(base_url)),
          api_key_(std::move(api_key)),
          policy_(policy) {}

    std::string name() const override { return "remote"; }

    std::string complete(const CompletionRequest& request) override {
        nlohmann::ordered_json body;
        body["model"] = request.model;
        auto messages = nlohmann::ordered_json::array();
        for (const auto& message : request.messages) {
            messages.push_back(
                {{"role", message.role}, {"content", message.content}});
        }
        body["messages"] = std::move(messages);
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        const auto response = detail::post_json_with_retries(
            base_url_, "/v1/chat/completions", api_key_, policy_, body);
        try {
            return response.at("choices").at(0).at("message").at("content")
                .get<std::string>();
        } catch (const std::exception&) {
            throw ProviderError("response missing choices[0].message.content",
                                200, false);
        }
    }

  private:
    std::string base_url_;
    std::string api_key_;
    RetryPolicy policy_;
};

// OpenAI-compatible embeddings endpoint: POST <base>/v1/embeddings.
class RemoteEmbedder : public Embedder {
  public:
    RemoteEmbedder(std::string base_url, std::string model,
                   std::string api_key = api_key_from_env(),
                   RetryPolicy policy = {})
        : base_url_(std::move(base_url)),
          model_(std::move(model)),
          api_key_(std::move(api_key)),
          policy_(policy) {}

    std::vector<double> embed(const std::string& text) override {
        return embed_many({text}).at(0);
    }

    std::vector<std::vector<double>> embed_many(
        const std::vector<std::string>& texts) override {
        if (texts.empty()) return {};
        nlohmann::ordered_json body;
        body["model"] = model_;
        body["input"] = texts;
        const auto response = detail::post_json_with_retries(
            base_url_, "/v1/embeddings", api_key_, policy_, body);
        try {
            std::vector<std::vector<double>> out;
            for (const auto& row : response.at("data")) {
                out.push_back(row.at("embedding").get<std::vector<double>>());
            }
            if (out.size() != texts.size()) {
                throw std::runtime_error("row count mismatch");
            }
            return out;
        } catch (const ProviderError&) {
            throw;
        } catch (const std::exception& e) {
            throw ProviderError(std::string("malformed embeddings response: ") +
                                    e.what(),
                                200, false);
        }
    }

  private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    RetryPolicy policy_;
};

// Token bucket over an explicit millisecond timeline (injectable for
// tests). rate_per_sec 0 disables limiting. reserve() consumes one token
// and returns how long the caller must wait before acting on it.
class TokenBucket {
  public:
    TokenBucket(double rate_per_sec, double burst = 1.0)
        : rate_(rate_per_sec), burst_(burst), tokens_(burst) {}

    double reserve(double now_ms) {
        if (rate_ <= 0.0) return 0.0;
        std::lock_guard<std::mutex> lock(mu_);
        if (started_) {
            tokens_ = std::min(burst_,
                               tokens_ + (now_ms - last_ms_) * rate_ / 1000.0);
        } else {
            started_ = true;
        }
        last_ms_ = now_ms;
        tokens_ -= 1.0;
        if (tokens_ >= 0.0) return 0.0;
        return -tokens_ * 1000.0 / rate_;
    }

  private:
    std::mutex mu_;
    double rate_;
    double burst_;
    double tokens_;
    double last_ms_ = 0.0;
    bool started_ = false;
};

// Cache-aware completion: hit -> stored text, no provider call; miss ->
// provider call, then an atomic store.
inline CompletionResult cached_complete(Provider& provider,
                                        ResponseCache& cache,
                                        const CompletionRequest& request) {
    const std::string key = cache_key(request);
    if (auto hit = cache.load(key)) {
        return {hit->text, hit->provider, true, 0.0};
    }
    const auto start = std::chrono::steady_clock::now();
    std::string text = provider.complete(request);
    const double latency =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    cache.store(key, {text, provider.name(), request.model});
    return {std::move(text), provider.name(), false, latency};
}

struct GatewayOptions {
    int parallelism = 4;           // max in-flight provider calls
    double requests_per_sec = 0.0;  // 0 = unlimited; misses only
    double burst = 1.0;
};

// Shared front door: bounded parallelism, optional rate limit on cache
// misses, and call/hit counters.
class Gateway {
  public:
    Gateway(std::shared_ptr<Provider> provider,
            std::shared_ptr<ResponseCache> cache, GatewayOptions options = {})
        : provider_(std::move(provider)),
          cache_(std::move(cache)),
          options_(options),
          semaphore_(std::max(1, options.parallelism)),
          bucket_(options.requests_per_sec, options.burst),
          epoch_(std::chrono::steady_clock::now()) {}

    CompletionResult complete(const CompletionRequest& request) {
        const std::string key = cache_key(request);
        if (cache_) {
            if (auto hit = cache_->load(key)) {
                cache_hits_.fetch_add(1, std::memory_order_relaxed);
                return {hit->text, hit->provider, true, 0.0};
            }
        }
        semaphore_.acquire();
        struct Release {
            std::counting_semaphore<>& sem;
            ~Release() { sem.release(); }
        } release{semaphore_};
        const double wait_ms = bucket_.reserve(now_ms());
        if (wait_ms > 0.0) {
            std::this_thread::sleep_for(
                std::chrono::duration<double, std::milli>(wait_ms));
        }
        const auto start = std::chrono::steady_clock::now();
        std::string text = provider_->complete(request);
        const double latency =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - start)
                .count();
        provider_calls_.fetch_add(1, std::memory_order_relaxed);
        if (cache_) {
            cache_->store(key, {text, provider_->name(), request.model});
        }
        return {std::move(text), provider_->name(), false, latency};
    }

    int provider_calls() const {
        return provider_calls_.load(std::memory_order_relaxed);
    }
    int cache_hits() const {
        return cache_hits_.load(std::memory_order_relaxed);
    }
    Provider& provider() { return *provider_; }
    std::shared_ptr<ResponseCache> cache() { return cache_; }

  private:
    double now_ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - epoch_)
            .count();
    }

    std::shared_ptr<Provider> provider_;
    std::shared_ptr<ResponseCache> cache_;
    GatewayOptions options_;
    std::counting_semaphore<> semaphore_;
    TokenBucket bucket_;
    std::chrono::steady_clock::time_point epoch_;
    std::atomic<int> provider_calls_{0};
    std::atomic<int> cache_hits_{0};
};

}  // namespace pforge
