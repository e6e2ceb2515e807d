// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include <httplib.h>

#include "maps/provider.hpp"

namespace maps {

namespace {

constexpr std::chrono::milliseconds kMaxBackoff{60'000};

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    UrlParts parts{url.substr(0, path_start), path_start == std::string::npos ? "" : url.substr(path_start)};
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
    return parts;
}

class HttplibTransport final : public Transport {
public:
    HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                      const std::string& body, std::chrono::milliseconds timeout) override {
        const auto slash = url.find('/', url.find("://") + 3);
        httplib::Client client(url.substr(0, slash));
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        client.set_connection_timeout(secs);
        client.set_read_timeout(secs);
        client.set_write_timeout(secs);
        httplib::Headers h;
        std::string content_type = "application/json";
        for (const auto& [k, v] : headers) {
            if (k == "Content-Type") content_type = v;
            else h.emplace(k, v);
        }
        auto res = client.Post(slash == std::string::npos ? "/" : url.substr(slash), h, body, content_type);
        HttpResponse out;
        if (!res) return out;
        out.status = res->status;
        out.body = res->body;
        for (const auto& [k, v] : res->headers) {
            std::string key = k;
            std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
            out.headers[key] = v;
        }
        return out;
    }
};

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

// RAII slot on the in-flight limiter.
class Slot {
public:
    explicit Slot(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
    ~Slot() { sem_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    std::counting_semaphore<1024>& sem_;
};

}  // namespace

std::unique_ptr<Transport> make_httplib_transport() { return std::make_unique<HttplibTransport>(); }

HttpProvider::HttpProvider(ProviderConfig config, std::unique_ptr<Transport> transport, std::string api_key,
                           Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      api_key_(std::move(api_key)),
      sleep_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
    if (auto p = config_.problems(); !p.empty()) throw ConfigError("provider '" + config_.model_id + "': " + p.front());
    split_url(config_.base_url);
}

std::unique_ptr<HttpProvider> HttpProvider::from_environment(ProviderConfig config) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable " + config.api_key_env + " is not set (model '" + config.model_id + "')");
    return std::make_unique<HttpProvider>(std::move(config), make_httplib_transport(), key);
}

std::chrono::milliseconds HttpProvider::backoff(int retry, std::optional<double> retry_after_s) const {
    double ms = static_cast<double>(config_.retry.backoff_base.count()) * std::pow(2.0, std::max(0, retry - 1));
    if (config_.retry.jitter) {
        thread_local std::mt19937_64 rng{std::random_device{}()};
        ms *= std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    }
    if (retry_after_s && *retry_after_s > 0) ms = std::max(ms, *retry_after_s * 1000.0);
    return std::min(kMaxBackoff, std::chrono::milliseconds(static_cast<std::int64_t>(ms)));
}

CompletionResult HttpProvider::complete(const PromptBundle& bundle, const DecodingParams& decoding,
                                        const CallContext& ctx) {
    const UrlParts url = split_url(config_.base_url);
    const std::string endpoint = url.origin + url.path + "/chat/completions";
    const std::string body = chat_request_body(config_.model_id, bundle, decoding);
    const std::map<std::string, std::string> headers{{"Authorization", "Bearer " + api_key_},
                                                     {"Content-Type", "application/json"}};
    const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config_.timeout_s * 1000.0));
    const std::string where = "model '" + config_.model_id + "', question '" + ctx.question_id + "', call " +
                              std::to_string(ctx.ordinal);

    Slot slot(in_flight_);
    for (int attempt = 0;; ++attempt) {
        const auto start = std::chrono::steady_clock::now();
        HttpResponse res = transport_->post(endpoint, headers, body, timeout);
        const double latency =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (res.status >= 200 && res.status < 300) {
            CompletionResult result = parse_chat_response(res.body, config_.model_id);
            result.latency_ms = latency;
            result.retries = attempt;
            return result;
        }
        if (!retryable(res.status))
            throw ProviderFailure("HTTP " + std::to_string(res.status) + " for " + where + ": " + res.body.substr(0, 500));
        if (attempt >= config_.retry.max_retries)
            throw ProviderFailure("giving up after " + std::to_string(attempt) + " retries for " + where +
                                  (res.status == 0 ? " (no response)" : " (HTTP " + std::to_string(res.status) + ")"));
        std::optional<double> retry_after;
        if (auto it = res.headers.find("retry-after"); it != res.headers.end()) {
            char* end = nullptr;
            const double v = std::strtod(it->second.c_str(), &end);
            if (end != it->second.c_str()) retry_after = v;
        }
        sleep_(backoff(attempt + 1, retry_after));
    }
}

}  // namespace maps
