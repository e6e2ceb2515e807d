// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/run_log.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace maps {

namespace {

using ojson = nlohmann::ordered_json;

ojson usage_json(const TokenUsage& u) {
    return ojson{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

TokenUsage usage_from(const nlohmann::json& j) {
    return {j.at("prompt_tokens").get<std::int64_t>(), j.at("completion_tokens").get<std::int64_t>()};
}

ojson optional_text(const std::optional<std::string>& s) { return s ? ojson(*s) : ojson(nullptr); }

std::optional<std::string> optional_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

template <typename E>
E parse_enum(const nlohmann::json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
    const auto s = j.get<std::string>();
    auto v = parse(s);
    if (!v) throw DataError(std::string("unknown ") + what + " '" + s + "'");
    return *v;
}

}  // namespace

std::string serialize_trace(const AttemptTrace& t) {
    ojson j;
    j["schema_version"] = std::string(kRunLogSchemaVersion);
    j["question_id"] = t.question_id;
    j["model_id"] = t.model_id;
    j["dataset"] = t.dataset;
    j["variant"] = std::string(to_string(t.variant));
    j["gold"] = t.gold;
    j["run_index"] = t.run_index;

    ojson strategy;
    strategy["kind"] = std::string(to_string(t.strategy.kind));
    strategy["max_layers"] = t.strategy.max_layers;
    strategy["boxed_output"] = t.strategy.boxed_output;
    auto exemplars = ojson::array();
    for (const auto& ex : t.strategy.exemplars) exemplars.push_back({{"problem", ex.problem}, {"solution", ex.solution}});
    strategy["exemplars"] = std::move(exemplars);
    j["strategy"] = std::move(strategy);

    auto layers = ojson::array();
    for (const LayerRecord& l : t.layers) {
        ojson layer;
        layer["layer_index"] = l.layer_index;
        layer["reflection_prompt"] = optional_text(l.reflection_prompt);
        layer["reflection_source"] = std::string(to_string(l.reflection_source));
        layer["model_output"] = l.model_output;
        layer["extracted"] = optional_text(l.extracted);
        layer["verdict"] = std::string(to_string(l.verdict));
        layer["usage"] = usage_json(l.usage);
        layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    j["final_verdict"] = std::string(to_string(t.final_verdict));
    j["total_usage"] = usage_json(t.total_usage);
    j["total_cost_usd"] = t.total_cost_usd.to_string(12);
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

AttemptTrace parse_trace(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        const auto version = j.at("schema_version").get<std::string>();
        if (version != kRunLogSchemaVersion) throw DataError("unsupported run-log schema_version '" + version + "'");

        AttemptTrace t;
        t.question_id = j.at("question_id").get<std::string>();
        t.model_id = j.at("model_id").get<std::string>();
        t.dataset = j.at("dataset").get<std::string>();
        t.variant = parse_enum<Variant>(j.at("variant"), parse_variant, "variant");
        t.gold = j.at("gold").get<std::string>();
        t.run_index = j.at("run_index").get<int>();

        const auto& s = j.at("strategy");
        t.strategy.kind = parse_enum<StrategyKind>(s.at("kind"), parse_strategy_kind, "strategy kind");
        t.strategy.max_layers = s.at("max_layers").get<int>();
        t.strategy.boxed_output = s.at("boxed_output").get<bool>();
        for (const auto& ex : s.at("exemplars"))
            t.strategy.exemplars.push_back({ex.at("problem").get<std::string>(), ex.at("solution").get<std::string>()});

        for (const auto& l : j.at("layers")) {
            LayerRecord layer;
            layer.layer_index = l.at("layer_index").get<int>();
            layer.reflection_prompt = optional_from(l.at("reflection_prompt"));
            layer.reflection_source =
                parse_enum<ReflectionSource>(l.at("reflection_source"), parse_reflection_source, "reflection source");
            layer.model_output = l.at("model_output").get<std::string>();
            layer.extracted = optional_from(l.at("extracted"));
            layer.verdict = parse_enum<Verdict>(l.at("verdict"), parse_verdict, "verdict");
            layer.usage = usage_from(l.at("usage"));
            t.layers.push_back(std::move(layer));
        }
        t.final_verdict = parse_enum<Verdict>(j.at("final_verdict"), parse_verdict, "verdict");
        t.total_usage = usage_from(j.at("total_usage"));
        t.total_cost_usd = Money::parse(j.at("total_cost_usd").get<std::string>());
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed run-log record: ") + e.what());
    }
}

std::string RunKey::to_string() const {
    return dataset + "|" + std::string(maps::to_string(variant)) + "|" + model_id + "|" + strategy + "|run" +
           std::to_string(run_index) + "|" + question_id;
}

RunKey key_of(const AttemptTrace& t) {
    return {t.dataset, t.variant, t.model_id, t.strategy.label(), t.run_index, t.question_id};
}

RunLogContents read_run_log(const std::filesystem::path& file) {
    RunLogContents out;
    std::ifstream in(file, std::ios::binary);
    if (!in) return out;
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t start = 0;
    int lineno = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        ++lineno;
        if (nl == std::string::npos) {
            out.torn_tail = true;
            break;
        }
        std::string_view line(text.data() + start, nl - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                out.traces.push_back(parse_trace(line));
            } catch (const DataError& e) {
                throw DataError(file.string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        start = nl + 1;
    }
    return out;
}

void repair_torn_tail(const std::filesystem::path& file) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(file, ec);
    if (ec || size == 0) return;
    std::ifstream in(file, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    if (text.back() == '\n') return;
    const auto nl = text.rfind('\n');
    std::filesystem::resize_file(file, nl == std::string::npos ? 0 : nl + 1);
}

RunLogWriter::RunLogWriter(const std::filesystem::path& file) : out_(file, std::ios::binary | std::ios::app) {
    if (!out_) throw ConfigError("cannot open run log '" + file.string() + "' for appending");
}

void RunLogWriter::append(const AttemptTrace& trace) {
    const std::string line = serialize_trace(trace) + "\n";
    std::lock_guard lock(mu_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw Error("write to run log failed");
}

}  // namespace maps
