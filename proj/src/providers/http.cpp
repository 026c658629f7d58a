#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "qualit/error.hpp"
#include "qualit/providers.hpp"

#include <cstdlib>
#include <regex>

namespace qualit::providers {

using nlohmann::json;

namespace {

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                      const std::string& body) override {
        static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(url, m, url_re)) throw NetworkError("malformed endpoint URL: " + url);
        httplib::Client client(m[1].str());
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);
        const std::string path = m[2].matched ? m[2].str() : "/";
        auto res = client.Post(path, hdrs, body, "application/json");
        if (!res) throw NetworkError(httplib::to_string(res.error()));
        return HttpResponse{res->status, res->body};
    }

private:
    std::chrono::seconds timeout_;
};

std::map<std::string, std::string> auth_headers(const HttpEndpoint& endpoint, bool anthropic = false) {
    std::map<std::string, std::string> headers;
    if (anthropic) {
        headers["anthropic-version"] = "2023-06-01";
        if (!endpoint.api_key.empty()) headers["x-api-key"] = endpoint.api_key;
    } else if (!endpoint.api_key.empty()) {
        headers["Authorization"] = "Bearer " + endpoint.api_key;
    }
    return headers;
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(timeout);
}

ChatAdapter parse_chat_adapter(std::string_view name) {
    if (name == "generic") return ChatAdapter::generic;
    if (name == "openai") return ChatAdapter::openai;
    if (name == "anthropic") return ChatAdapter::anthropic;
    throw ConfigError("unknown chat adapter: " + std::string(name));
}

EmbedAdapter parse_embed_adapter(std::string_view name) {
    if (name == "generic") return EmbedAdapter::generic;
    if (name == "titan") return EmbedAdapter::titan;
    throw ConfigError("unknown embedding adapter: " + std::string(name));
}

json chat_payload(ChatAdapter adapter, const std::string& model, const ChatRequest& request) {
    json payload;
    payload["model"] = model;
    payload["temperature"] = request.temperature;
    payload["top_p"] = request.top_p;
    payload["max_tokens"] = request.max_tokens;
    switch (adapter) {
        case ChatAdapter::generic:
        case ChatAdapter::anthropic:
            payload["system"] = request.system_prompt;
            payload["messages"] = json::array({{{"role", "user"}, {"content", request.user_prompt}}});
            payload["top_k"] = request.top_k;
            break;
        case ChatAdapter::openai:
            // no top_k in this API
            payload["messages"] = json::array({{{"role", "system"}, {"content", request.system_prompt}},
                                               {{"role", "user"}, {"content", request.user_prompt}}});
            break;
    }
    return payload;
}

std::string parse_chat_response(ChatAdapter adapter, const std::string& body) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProviderError("chat response is not a JSON object", 1, 200);
    try {
        if (adapter == ChatAdapter::openai || j.contains("choices")) {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        if (j.contains("content")) {
            const auto& c = j["content"];
            if (c.is_string()) return c.get<std::string>();
            std::string text;
            for (const auto& block : c) {
                if (block.value("type", "text") == "text") text += block.at("text").get<std::string>();
            }
            return text;
        }
        if (j.contains("completion")) return j["completion"].get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected chat response shape: ") + e.what(), 1, 200);
    }
    throw ProviderError("chat response carries no completion text", 1, 200);
}

json embed_payload(EmbedAdapter adapter, const std::string& model, std::string_view text) {
    if (adapter == EmbedAdapter::titan) return json{{"inputText", std::string(text)}};
    return json{{"model", model}, {"input", std::string(text)}};
}

std::vector<double> parse_embed_response(EmbedAdapter, const std::string& body) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProviderError("embedding response is not a JSON object", 1, 200);
    try {
        if (j.contains("embedding")) return j["embedding"].get<std::vector<double>>();
        if (j.contains("data")) return j["data"].at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected embedding response shape: ") + e.what(), 1, 200);
    }
    throw ProviderError("embedding response carries no vector", 1, 200);
}

HttpChatProvider::HttpChatProvider(HttpEndpoint endpoint, ChatAdapter adapter,
                                   std::shared_ptr<HttpTransport> transport, RetryPolicy policy,
                                   int max_in_flight, Sleeper sleep)
    : endpoint_(std::move(endpoint)),
      adapter_(adapter),
      transport_(std::move(transport)),
      policy_(policy),
      sleep_(std::move(sleep)),
      in_flight_(std::clamp(max_in_flight, 1, 1024)) {}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    request.validate();
    const std::string body = chat_payload(adapter_, endpoint_.model, request).dump();
    in_flight_.acquire();
    HttpResponse resp;
    try {
        resp = post_with_retry(*transport_, endpoint_.url, auth_headers(endpoint_, adapter_ == ChatAdapter::anthropic),
                               body, policy_, sleep_);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();
    return parse_chat_response(adapter_, resp.body);
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint, EmbedAdapter adapter, std::shared_ptr<HttpTransport> transport,
                           RetryPolicy policy, int max_in_flight, Sleeper sleep)
    : endpoint_(std::move(endpoint)),
      adapter_(adapter),
      transport_(std::move(transport)),
      policy_(policy),
      sleep_(std::move(sleep)),
      in_flight_(std::clamp(max_in_flight, 1, 1024)) {}

EmbeddingVector HttpEmbedder::embed(std::string_view text) {
    if (text.empty()) throw InputError("cannot embed empty text");
    const std::string body = embed_payload(adapter_, endpoint_.model, text).dump();
    in_flight_.acquire();
    HttpResponse resp;
    try {
        resp = post_with_retry(*transport_, endpoint_.url, auth_headers(endpoint_), body, policy_, sleep_);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();
    auto values = parse_embed_response(adapter_, resp.body);
    std::size_t expected = 0;
    if (!dims_.compare_exchange_strong(expected, values.size()) && expected != values.size()) {
        throw ProviderError("embedding dimension changed from " + std::to_string(expected) + " to " +
                                std::to_string(values.size()),
                            1, 200);
    }
    return EmbeddingVector::normalized(std::move(values));
}

ProviderEnvironment ProviderEnvironment::from_env() {
    return ProviderEnvironment{env_or_empty("QUALIT_PROVIDER_ENDPOINT"), env_or_empty("QUALIT_PROVIDER_KEY"),
                               env_or_empty("QUALIT_EMBED_ENDPOINT"), env_or_empty("QUALIT_EMBED_KEY")};
}

std::shared_ptr<ChatProvider> make_chat_provider(const ProviderSpec& spec, const ProviderEnvironment& env,
                                                 const ProviderOptions& opts) {
    std::shared_ptr<ChatProvider> base;
    if (spec.kind == "mock") {
        base = std::make_shared<MockChatProvider>(spec.model.empty() ? "mock-chat" : spec.model);
    } else if (spec.kind == "http") {
        if (env.chat_endpoint.empty()) throw ConfigError("QUALIT_PROVIDER_ENDPOINT is not set for http provider");
        base = std::make_shared<HttpChatProvider>(HttpEndpoint{env.chat_endpoint, env.chat_key, spec.model},
                                                  parse_chat_adapter(spec.adapter), make_http_transport(),
                                                  opts.retry, opts.max_in_flight);
    } else {
        throw ConfigError("unknown provider kind: " + spec.kind);
    }
    if (!opts.cache_dir) return base;
    return std::make_shared<CachedChatProvider>(base, std::make_shared<ResponseCache>(*opts.cache_dir));
}

std::shared_ptr<Embedder> make_embedder(const ProviderSpec& spec, const ProviderEnvironment& env,
                                        const ProviderOptions& opts) {
    std::shared_ptr<Embedder> base;
    if (spec.kind == "mock") {
        base = std::make_shared<MockEmbedder>(spec.model.empty() ? "mock-embed" : spec.model);
    } else if (spec.kind == "http") {
        if (env.embed_endpoint.empty()) throw ConfigError("QUALIT_EMBED_ENDPOINT is not set for http embedder");
        base = std::make_shared<HttpEmbedder>(HttpEndpoint{env.embed_endpoint, env.embed_key, spec.model},
                                              parse_embed_adapter(spec.adapter), make_http_transport(),
                                              opts.retry, opts.max_in_flight);
    } else {
        throw ConfigError("unknown embedder kind: " + spec.kind);
    }
    if (!opts.cache_dir) return base;
    return std::make_shared<CachedEmbedder>(base, std::make_shared<ResponseCache>(*opts.cache_dir));
}

}  // namespace qualit::providers
