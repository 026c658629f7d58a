#pragma once

#include "qualit/embedding.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

namespace qualit::providers {

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    double top_p = 0.0;
    int top_k = 50;
    int max_tokens = 1024;

    // Throws InputError when a sampling parameter is out of range.
    void validate() const;
    // Sorted-key JSON object; the basis of the cache key.
    nlohmann::json canonical() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
    virtual std::string model() const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // Throws InputError for empty text.
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::string id() const = 0;
    virtual std::string model() const = 0;
};

// ---------------------------------------------------------------------------
// Offline mocks

// Recognises two prompt shapes and answers them without randomness:
//  * extraction prompts carrying a "TOKENS:" block -> the distinct tokens
//    ranked by (frequency desc, first occurrence asc), top 5, as "- tok" lines;
//  * labeling prompts carrying a "TOP WORDS:" line -> first three words
//    joined by "/".
// Anything else gets an empty reply.
class MockChatProvider final : public ChatProvider {
public:
    explicit MockChatProvider(std::string model = "mock-chat") : model_(std::move(model)) {}
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "mock"; }
    std::string model() const override { return model_; }
    std::uint64_t calls() const { return calls_.load(); }

private:
    std::string model_;
    std::atomic<std::uint64_t> calls_{0};
};

// Signed feature hashing of case-folded letter tokens into `dims` buckets, then L2
// normalization. Text without tokens (or whose hashes cancel) maps to e_0.
class MockEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDims = 256;

    explicit MockEmbedder(std::string model = "mock-embed", std::size_t dims = kDefaultDims)
        : model_(std::move(model)), dims_(dims) {}
    EmbeddingVector embed(std::string_view text) override;
    std::string id() const override { return "mock"; }
    std::string model() const override { return model_; }
    std::size_t dims() const { return dims_; }
    std::uint64_t calls() const { return calls_.load(); }

private:
    std::string model_;
    std::size_t dims_;
    std::atomic<std::uint64_t> calls_{0};
};

// Bucket and sign used by MockEmbedder for one token.
struct HashedFeature {
    std::size_t bucket;
    double sign;
};
HashedFeature hash_feature(std::string_view token, std::size_t dims);

// ---------------------------------------------------------------------------
// HTTP transport and retries

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Raised by transports for connection-level failures (no HTTP status).
class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                              const std::string& body) = 0;
};

// cpp-httplib backed transport; http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(120));

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{30'000};

    // Delay before retry number `retry` (1-based).
    std::chrono::milliseconds delay(int retry) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Sends `body` with retries on network errors, 5xx and 429. Other non-2xx
// statuses fail immediately with the message parsed from the body.
HttpResponse post_with_retry(HttpTransport& transport, const std::string& url,
                             const std::map<std::string, std::string>& headers, const std::string& body,
                             const RetryPolicy& policy, const Sleeper& sleep);

enum class ChatAdapter { generic, openai, anthropic };
enum class EmbedAdapter { generic, titan };

ChatAdapter parse_chat_adapter(std::string_view name);
EmbedAdapter parse_embed_adapter(std::string_view name);

struct HttpEndpoint {
    std::string url;
    std::string api_key;
    std::string model;
};

// Vendor payloads. Fields a vendor does not support are dropped.
nlohmann::json chat_payload(ChatAdapter adapter, const std::string& model, const ChatRequest& request);
std::string parse_chat_response(ChatAdapter adapter, const std::string& body);
nlohmann::json embed_payload(EmbedAdapter adapter, const std::string& model, std::string_view text);
std::vector<double> parse_embed_response(EmbedAdapter adapter, const std::string& body);

class HttpChatProvider final : public ChatProvider {
public:
    HttpChatProvider(HttpEndpoint endpoint, ChatAdapter adapter, std::shared_ptr<HttpTransport> transport,
                     RetryPolicy policy = {}, int max_in_flight = 8, Sleeper sleep = {});
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "http"; }
    std::string model() const override { return endpoint_.model; }

private:
    HttpEndpoint endpoint_;
    ChatAdapter adapter_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::counting_semaphore<1024> in_flight_;
};

class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(HttpEndpoint endpoint, EmbedAdapter adapter, std::shared_ptr<HttpTransport> transport,
                 RetryPolicy policy = {}, int max_in_flight = 8, Sleeper sleep = {});
    EmbeddingVector embed(std::string_view text) override;
    std::string id() const override { return "http"; }
    std::string model() const override { return endpoint_.model; }

private:
    HttpEndpoint endpoint_;
    EmbedAdapter adapter_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<std::size_t> dims_{0};
};

// ---------------------------------------------------------------------------
// Content-addressed cache

struct CacheKey {
    std::string digest;  // 64 lowercase hex chars (SHA-256)
    nlohmann::json canonical;

    static CacheKey for_chat(const ChatProvider& provider, const ChatRequest& request);
    static CacheKey for_embedding(const Embedder& embedder, std::string_view text);
};

std::string sha256_hex(std::string_view data);

// <dir>/<first-2-hex>/<digest>.json, written to a temp file then renamed.
// Safe for concurrent readers and writers across threads and processes.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<nlohmann::json> get(const CacheKey& key) const;
    void put(const CacheKey& key, const nlohmann::json& value) const;
    std::filesystem::path path_for(const CacheKey& key) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

class CachedChatProvider final : public ChatProvider {
public:
    CachedChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<ResponseCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return inner_->id(); }
    std::string model() const override { return inner_->model(); }
    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

private:
    std::shared_ptr<ChatProvider> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

class CachedEmbedder final : public Embedder {
public:
    CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<ResponseCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}
    EmbeddingVector embed(std::string_view text) override;
    std::string id() const override { return inner_->id(); }
    std::string model() const override { return inner_->model(); }
    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

private:
    std::shared_ptr<Embedder> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

// ---------------------------------------------------------------------------
// Construction from run configuration

struct ProviderSpec {
    std::string kind = "mock";  // "mock" | "http"
    std::string model;
    std::string adapter = "generic";
};

struct ProviderEnvironment {
    std::string chat_endpoint, chat_key, embed_endpoint, embed_key;
    // QUALIT_PROVIDER_ENDPOINT / _KEY, QUALIT_EMBED_ENDPOINT / _KEY
    static ProviderEnvironment from_env();
};

struct ProviderOptions {
    std::optional<std::filesystem::path> cache_dir;
    int max_in_flight = 8;
    RetryPolicy retry;
};

std::shared_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec, const ProviderEnvironment& env,
                                                 const ProviderOptions& opts);
std::shared_ptr<Embedder> make_embedder(const ProviderSpec& spec, const ProviderEnvironment& env,
                                        const ProviderOptions& opts);

}  // namespace qualit::providers
