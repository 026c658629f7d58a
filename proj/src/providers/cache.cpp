#include "qualit/error.hpp"
#include "qualit/log.hpp"
#include "qualit/providers.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <array>
#include <fstream>
#include <sstream>
#include <thread>

namespace qualit::providers {

namespace fs = std::filesystem;
using nlohmann::json;

void ChatRequest::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw InputError("temperature must be in [0, 2]");
    if (!(top_p >= 0.0 && top_p <= 1.0)) throw InputError("top_p must be in [0, 1]");
    if (top_k < 1) throw InputError("top_k must be >= 1");
    if (max_tokens < 1) throw InputError("max_tokens must be >= 1");
}

json ChatRequest::canonical() const {
    // nlohmann::json objects are std::map backed, so keys serialize sorted.
    return json{{"max_tokens", max_tokens}, {"system_prompt", system_prompt}, {"temperature", temperature},
                {"top_k", top_k},           {"top_p", top_p},                 {"user_prompt", user_prompt}};
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0x0f]);
    }
    return out;
}

CacheKey CacheKey::for_chat(const ChatProvider& provider, const ChatRequest& request) {
    json canonical{{"kind", "chat"}, {"model", provider.model()}, {"provider", provider.id()},
                   {"request", request.canonical()}};
    return CacheKey{sha256_hex(canonical.dump()), std::move(canonical)};
}

CacheKey CacheKey::for_embedding(const Embedder& embedder, std::string_view text) {
    json canonical{{"kind", "embedding"}, {"model", embedder.model()}, {"provider", embedder.id()},
                   {"request", {{"text", std::string(text)}}}};
    return CacheKey{sha256_hex(canonical.dump()), std::move(canonical)};
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ResponseCache::path_for(const CacheKey& key) const {
    return dir_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::optional<json> ResponseCache::get(const CacheKey& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    auto entry = json::parse(buf.str(), nullptr, false);
    if (entry.is_discarded() || !entry.is_object() || !entry.contains("value") || entry.value("key", json()) != key.canonical) {
        logger()->warn("ignoring unreadable or mismatched cache entry {}", path_for(key).string());
        return std::nullopt;
    }
    return entry["value"];
}

void ResponseCache::put(const CacheKey& key, const json& value) const {
    static std::atomic<std::uint64_t> counter{0};
    const fs::path target = path_for(key);
    fs::create_directories(target.parent_path());
    std::ostringstream tmp_name;
    tmp_name << target.filename().string() << ".tmp." << ::getpid() << "."
             << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
    const fs::path tmp = target.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
        out << json{{"key", key.canonical}, {"value", value}}.dump() << '\n';
        out.flush();
        if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot publish cache file " + target.string());
    }
}

std::string CachedChatProvider::complete(const ChatRequest& request) {
    request.validate();
    const auto key = CacheKey::for_chat(*inner_, request);
    if (auto hit = cache_->get(key); hit && hit->is_string()) {
        ++hits_;
        return hit->get<std::string>();
    }
    ++misses_;
    std::string text = inner_->complete(request);
    cache_->put(key, text);
    return text;
}

EmbeddingVector CachedEmbedder::embed(std::string_view text) {
    if (text.empty()) throw InputError("cannot embed empty text");
    const auto key = CacheKey::for_embedding(*inner_, text);
    if (auto hit = cache_->get(key); hit && hit->is_array()) {
        try {
            auto v = EmbeddingVector::from_unit(hit->get<std::vector<double>>());
            ++hits_;
            return v;
        } catch (const std::exception& e) {
            logger()->warn("discarding cached embedding: {}", e.what());
        }
    }
    ++misses_;
    EmbeddingVector v = inner_->embed(text);
    cache_->put(key, json(std::vector<double>(v.values().begin(), v.values().end())));
    return v;
}

}  // namespace qualit::providers
