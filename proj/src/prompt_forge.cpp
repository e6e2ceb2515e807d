// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/prompt_forge.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "maps/builtin_assets.hpp"

namespace maps {

namespace {

constexpr std::string_view kStepByStep = "Let's think step by step.";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Template files end with a newline; prompts do not.
std::string chomp(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

std::string_view to_string(PromptPurpose p) {
    switch (p) {
    case PromptPurpose::initial: return "initial";
    case PromptPurpose::meta_prompt_request: return "meta_prompt_request";
    case PromptPurpose::reflection: return "reflection";
    }
    return "?";
}

TemplateSet TemplateSet::builtin() {
    return {"v1", chomp(assets::kMetaPromptV1), chomp(assets::kStaticReflectionV1), chomp(assets::kReflectionV1)};
}

TemplateSet TemplateSet::load(const std::filesystem::path& root, const std::string& version) {
    const auto dir = root / version;
    return {version, chomp(read_file(dir / "meta_prompt.txt")), chomp(read_file(dir / "static_reflection.txt")),
            chomp(read_file(dir / "reflection.txt"))};
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::vector<Exemplar> parse_exemplars(std::string_view jsonl) {
    std::vector<Exemplar> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("problem").get<std::string>(), j.at("solution").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw DataError("exemplar line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) { return parse_exemplars(read_file(path)); }

std::vector<Exemplar> builtin_exemplars() { return parse_exemplars(assets::kExemplarsJsonl); }

// ---------------------------------------------------------------------------

PromptForge::PromptForge(TemplateSet templates) : templates_(std::move(templates)) {}

std::string PromptForge::answer_format(Variant variant) {
    if (is_gsm_family(variant))
        return "Show your reasoning, then give the final numeric answer on the last line in the form \"#### <answer>\".";
    return "Show your reasoning, then present the final answer in boxed notation, as \\boxed{<answer>}.";
}

std::string PromptForge::render_history(std::span<const LayerRecord> history) {
    std::string out;
    for (const LayerRecord& layer : history) {
        if (!out.empty()) out += "\n\n";
        out += "Attempt " + std::to_string(layer.layer_index + 1);
        out += layer.layer_index == 0 ? " (initial answer)" : " (reflection layer " + std::to_string(layer.layer_index) + ")";
        out += ":\n";
        if (layer.reflection_prompt) out += "Reflection prompt used:\n" + *layer.reflection_prompt + "\n";
        out += "Solution:\n" + layer.model_output + "\n";
        out += "Extracted answer: " + layer.extracted.value_or("(none found)") + "\n";
        out += "Verdict: ";
        out += layer.verdict == Verdict::unparseable ? "no final answer could be read" : "incorrect";
    }
    return out;
}

PromptBundle PromptForge::build_initial(const Question& question, const StrategySpec& spec) const {
    if (auto problems = check_strategy(spec, question.variant, std::max(spec.max_layers, kDefaultLayerCap));
        !problems.empty())
        throw PreconditionError("invalid strategy for " + std::string(to_string(question.variant)) + ": " + problems.front());

    PromptBundle b;
    b.purpose = PromptPurpose::initial;
    if (spec.kind == StrategyKind::Baseline) {
        b.user = question.body;
        if (spec.boxed_output) b.user += "\n\nPresent the final answer in boxed notation, as \\boxed{<answer>}.";
        return b;
    }
    if (is_gsm_family(question.variant)) {
        for (const Exemplar& ex : spec.exemplars) b.user += "Q: " + ex.problem + "\nA: " + ex.solution + "\n\n";
        b.user += "Q: " + question.body + "\nA: " + std::string(kStepByStep);
        return b;
    }
    b.user = question.body + "\n\n" + std::string(kStepByStep) +
             " Reason step by step, and present the final answer in boxed notation, as \\boxed{<answer>}.";
    return b;
}

PromptBundle PromptForge::build_static_reflection(const Question& question, std::string_view prior_output) const {
    if (prior_output.empty()) throw PreconditionError("static reflection needs the previous output");
    return {std::nullopt,
            render(templates_.static_reflection, {{"question", question.body},
                                                  {"prior_output", std::string(prior_output)},
                                                  {"answer_format", answer_format(question.variant)}}),
            PromptPurpose::reflection};
}

PromptBundle PromptForge::build_meta_prompt(const Question& question, std::span<const LayerRecord> history) const {
    if (history.empty()) throw PreconditionError("meta-prompt needs at least one prior attempt");
    if (history.back().verdict == Verdict::correct) throw PreconditionError("meta-prompt requested after a correct answer");
    return {std::nullopt,
            render(templates_.meta_prompt, {{"question", question.body},
                                            {"history", render_history(history)},
                                            {"answer_format", answer_format(question.variant)}}),
            PromptPurpose::meta_prompt_request};
}

PromptBundle PromptForge::build_reflection_from_generated(const Question& question, std::string_view generated_reflection,
                                                          std::string_view prior_output) const {
    if (generated_reflection.empty()) throw PreconditionError("generated reflection prompt is empty");
    return {std::nullopt,
            render(templates_.reflection, {{"reflection", std::string(generated_reflection)},
                                           {"question", question.body},
                                           {"prior_output", std::string(prior_output)},
                                           {"answer_format", answer_format(question.variant)}}),
            PromptPurpose::reflection};
}

}  // namespace maps
