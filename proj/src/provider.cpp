// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/provider.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace maps {

// ---------------------------------------------------------------------------
// ScriptedProvider

ScriptedProvider::ScriptedProvider(std::string model_id, std::map<std::string, std::vector<ScriptedReply>> script)
    : model_id_(std::move(model_id)), script_(std::move(script)) {}

void ScriptedProvider::set_replies(const std::string& question_id, std::vector<ScriptedReply> replies) {
    std::lock_guard lock(mu_);
    script_[question_id] = std::move(replies);
}

CompletionResult ScriptedProvider::complete(const PromptBundle& bundle, const DecodingParams& decoding,
                                            const CallContext& ctx) {
    std::lock_guard lock(mu_);
    log_.push_back({ctx.attempt_key, ctx.question_id, ctx.ordinal, bundle.purpose});
    last_decoding_ = decoding;
    auto it = script_.find(ctx.question_id);
    if (it == script_.end() || ctx.ordinal < 0 || static_cast<std::size_t>(ctx.ordinal) >= it->second.size())
        throw OverConsumption("scripted provider '" + model_id_ + "' has no reply for question '" + ctx.question_id +
                              "' call " + std::to_string(ctx.ordinal));
    const ScriptedReply& reply = it->second[static_cast<std::size_t>(ctx.ordinal)];
    if (reply.fail_status != 0)
        throw ProviderFailure("scripted failure (HTTP " + std::to_string(reply.fail_status) + ") for question '" +
                              ctx.question_id + "' call " + std::to_string(ctx.ordinal));
    return {reply.text, reply.usage, model_id_, 0.0, 0};
}

std::vector<Invocation> ScriptedProvider::invocations() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::size_t ScriptedProvider::call_count() const {
    std::lock_guard lock(mu_);
    return log_.size();
}

DecodingParams ScriptedProvider::last_decoding() const {
    std::lock_guard lock(mu_);
    return last_decoding_;
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::load(const std::string& model_id, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read provider script '" + path + "'");
    std::map<std::string, std::vector<ScriptedReply>> script;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            auto& replies = script[j.at("question_id").get<std::string>()];
            for (const auto& r : j.at("replies")) {
                ScriptedReply reply;
                reply.text = r.value("text", std::string{});
                reply.usage = {r.value("prompt_tokens", std::int64_t{0}), r.value("completion_tokens", std::int64_t{0})};
                reply.fail_status = r.value("fail_status", 0);
                replies.push_back(std::move(reply));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("provider script '" + path + "' line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return std::make_unique<ScriptedProvider>(model_id, std::move(script));
}

// ---------------------------------------------------------------------------
// Wire format

std::string chat_request_body(const std::string& model_id, const PromptBundle& bundle, const DecodingParams& decoding) {
    nlohmann::ordered_json body;
    body["model"] = model_id;
    auto messages = nlohmann::ordered_json::array();
    if (bundle.system) messages.push_back({{"role", "system"}, {"content", *bundle.system}});
    messages.push_back({{"role", "user"}, {"content", bundle.user}});
    body["messages"] = std::move(messages);
    body["temperature"] = decoding.temperature;
    body["top_p"] = decoding.top_p;
    return body.dump();
}

CompletionResult parse_chat_response(const std::string& body, const std::string& fallback_model) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    try {
        CompletionResult r;
        const auto& message = j.at("choices").at(0).at("message");
        const auto& content = message.at("content");
        r.text = content.is_null() ? std::string{} : content.get<std::string>();
        const auto& usage = j.at("usage");
        r.usage.prompt_tokens = usage.at("prompt_tokens").get<std::int64_t>();
        r.usage.completion_tokens = usage.at("completion_tokens").get<std::int64_t>();
        if (r.usage.prompt_tokens < 0 || r.usage.completion_tokens < 0) throw ProtocolError("negative token usage");
        r.model_id = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : fallback_model;
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed chat-completions response: ") + e.what());
    }
}

std::vector<std::string> ProviderConfig::problems() const {
    std::vector<std::string> out;
    if (model_id.empty()) out.emplace_back("model_id is empty");
    if (base_url.empty()) out.emplace_back("base_url is empty");
    if (timeout_s <= 0) out.emplace_back("timeout must be positive");
    if (retry.max_retries < 0) out.emplace_back("max_retries must be >= 0");
    if (max_in_flight < 1 || max_in_flight > 1024) out.emplace_back("max_in_flight must be in 1..1024");
    return out;
}

// ---------------------------------------------------------------------------
// UsageLedger

void UsageLedger::record(const CompletionResult& result) { add(result.model_id, result.usage); }

void UsageLedger::add(const std::string& model_id, const TokenUsage& usage) { by_model_[model_id] += usage; }

TokenUsage UsageLedger::total(const std::string& model_id) const {
    auto it = by_model_.find(model_id);
    return it == by_model_.end() ? TokenUsage{} : it->second;
}

TokenUsage UsageLedger::total() const {
    TokenUsage sum;
    for (const auto& [_, u] : by_model_) sum += u;
    return sum;
}

}  // namespace maps
