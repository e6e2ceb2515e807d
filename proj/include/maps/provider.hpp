// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "maps/domain.hpp"
#include "maps/prompt_forge.hpp"

namespace maps {

struct DecodingParams {
    double temperature = 0.0;
    double top_p = 1.0;

    friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

/// Identifies one provider call inside one attempt. `ordinal` counts calls
/// within the attempt starting at 0.
struct CallContext {
    std::string attempt_key;
    std::string question_id;
    int ordinal = 0;
};

struct CompletionResult {
    std::string text;
    TokenUsage usage;
    std::string model_id;
    double latency_ms = 0.0;
    int retries = 0;
};

/// Chat-completion endpoint. Implementations must be safe for concurrent use.
class Provider {
public:
    virtual ~Provider() = default;
    virtual const std::string& model_id() const = 0;
    virtual CompletionResult complete(const PromptBundle& bundle, const DecodingParams& decoding,
                                      const CallContext& ctx) = 0;
};

// ---------------------------------------------------------------------------
// Scripted provider (deterministic test double)

struct ScriptedReply {
    std::string text;
    TokenUsage usage;
    /// Non-zero simulates a transport failure with this HTTP status.
    int fail_status = 0;
};

struct Invocation {
    std::string attempt_key;
    std::string question_id;
    int ordinal = 0;
    PromptPurpose purpose = PromptPurpose::initial;
};

/// Replies keyed by (question_id, call ordinal within the attempt). A call
/// with no scripted reply throws OverConsumption. The invocation log is
/// totally ordered.
class ScriptedProvider final : public Provider {
public:
    struct OverConsumption : ProviderFailure {
        using ProviderFailure::ProviderFailure;
    };

    explicit ScriptedProvider(std::string model_id,
                              std::map<std::string, std::vector<ScriptedReply>> script = {});

    void set_replies(const std::string& question_id, std::vector<ScriptedReply> replies);

    const std::string& model_id() const override { return model_id_; }
    CompletionResult complete(const PromptBundle& bundle, const DecodingParams& decoding,
                              const CallContext& ctx) override;

    std::vector<Invocation> invocations() const;
    std::size_t call_count() const;
    /// Decoding params seen on the most recent call.
    DecodingParams last_decoding() const;

    /// Line-delimited JSON: {"question_id": ..., "replies": [{"text", "prompt_tokens",
    /// "completion_tokens"}, ...]}.
    static std::unique_ptr<ScriptedProvider> load(const std::string& model_id, const std::string& path);

private:
    std::string model_id_;
    std::map<std::string, std::vector<ScriptedReply>> script_;
    mutable std::mutex mu_;
    std::vector<Invocation> log_;
    DecodingParams last_decoding_;
};

// ---------------------------------------------------------------------------
// Live HTTP provider

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    bool jitter = true;
};

struct ProviderConfig {
    std::string base_url;  // e.g. https://openrouter.ai/api/v1
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model_id;
    double timeout_s = 120.0;
    RetryPolicy retry;
    int max_in_flight = 4;

    /// Empty when valid.
    std::vector<std::string> problems() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lower-cased names
};

/// One HTTP POST. status 0 means the request never got a response.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                              const std::string& body, std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<Transport> make_httplib_transport();

/// Request body for a chat-completions endpoint.
std::string chat_request_body(const std::string& model_id, const PromptBundle& bundle,
                              const DecodingParams& decoding);
/// Parses choices[0].message.content and usage; throws ProtocolError.
CompletionResult parse_chat_response(const std::string& body, const std::string& fallback_model);

class HttpProvider final : public Provider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    HttpProvider(ProviderConfig config, std::unique_ptr<Transport> transport, std::string api_key,
                 Sleeper sleeper = {});
    /// Reads the API key from `config.api_key_env`; throws ConfigError when unset.
    static std::unique_ptr<HttpProvider> from_environment(ProviderConfig config);

    const std::string& model_id() const override { return config_.model_id; }
    CompletionResult complete(const PromptBundle& bundle, const DecodingParams& decoding,
                              const CallContext& ctx) override;

    /// Delay before retry number `retry` (1-based), honoring Retry-After seconds when given.
    std::chrono::milliseconds backoff(int retry, std::optional<double> retry_after_s) const;

private:
    ProviderConfig config_;
    std::unique_ptr<Transport> transport_;
    std::string api_key_;
    Sleeper sleep_;
    std::counting_semaphore<1024> in_flight_;
};

// ---------------------------------------------------------------------------

/// Per-model token accumulator.
class UsageLedger {
public:
    void record(const CompletionResult& result);
    void add(const std::string& model_id, const TokenUsage& usage);
    TokenUsage total(const std::string& model_id) const;
    TokenUsage total() const;
    const std::map<std::string, TokenUsage>& by_model() const { return by_model_; }

private:
    std::map<std::string, TokenUsage> by_model_;
};

}  // namespace maps
