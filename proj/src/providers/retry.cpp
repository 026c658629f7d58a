#include "qualit/error.hpp"
#include "qualit/log.hpp"
#include "qualit/providers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace qualit::providers {
namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

std::string message_from_body(const std::string& body) {
    const auto parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_object()) {
        if (parsed.contains("error")) {
            const auto& err = parsed["error"];
            if (err.is_string()) return err.get<std::string>();
            if (err.is_object() && err.contains("message") && err["message"].is_string()) {
                return err["message"].get<std::string>();
            }
        }
        if (parsed.contains("message") && parsed["message"].is_string()) {
            return parsed["message"].get<std::string>();
        }
    }
    return body.substr(0, 200);
}

}  // namespace

std::chrono::milliseconds RetryPolicy::delay(int retry) const {
    const double scaled = static_cast<double>(base_delay.count()) * std::pow(multiplier, retry - 1);
    const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

HttpResponse post_with_retry(HttpTransport& transport, const std::string& url,
                             const std::map<std::string, std::string>& headers, const std::string& body,
                             const RetryPolicy& policy, const Sleeper& sleep) {
    std::string last_error;
    int last_status = 0;
    const int max_attempts = policy.max_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        try {
            HttpResponse resp = transport.post(url, headers, body);
            if (resp.status >= 200 && resp.status < 300) return resp;
            last_status = resp.status;
            last_error = "HTTP " + std::to_string(resp.status) + ": " + message_from_body(resp.body);
            if (!retryable(resp.status)) {
                throw ProviderError("provider error: " + last_error, attempt, resp.status);
            }
        } catch (const NetworkError& e) {
            last_status = 0;
            last_error = std::string("network failure: ") + e.what();
        }
        if (attempt < max_attempts) {
            const auto wait = policy.delay(attempt);
            logger()->warn("request to {} failed ({}), retry {}/{} in {} ms", url, last_error, attempt,
                           policy.max_retries, wait.count());
            if (sleep) {
                sleep(wait);
            } else {
                std::this_thread::sleep_for(wait);
            }
        }
    }
    throw ProviderError("provider error: " + std::to_string(policy.max_retries) + " retries exhausted after " +
                            std::to_string(max_attempts) + " attempts (" + last_error + ")",
                        max_attempts, last_status);
}

}  // namespace qualit::providers
