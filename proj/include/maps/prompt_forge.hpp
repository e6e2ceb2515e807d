// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maps/domain.hpp"

namespace maps {

enum class PromptPurpose { initial, meta_prompt_request, reflection };

std::string_view to_string(PromptPurpose p);

struct PromptBundle {
    std::optional<std::string> system;
    std::string user;
    PromptPurpose purpose = PromptPurpose::initial;

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// The three prompt templates, pinned by version. Placeholders are
/// `{question}`, `{history}`, `{prior_output}`, `{reflection}` and
/// `{answer_format}`; any other brace text (LaTeX, JSON) is left alone.
struct TemplateSet {
    std::string version;
    std::string meta_prompt;
    std::string static_reflection;
    std::string reflection;

    /// The v1 set compiled into the binary from data/templates/v1.
    static TemplateSet builtin();
    /// Reads `<root>/<version>/{meta_prompt,static_reflection,reflection}.txt`.
    static TemplateSet load(const std::filesystem::path& root, const std::string& version);
};

/// Single-pass placeholder substitution: text inserted for one placeholder
/// is never rescanned, so a question containing "{history}" stays verbatim.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars);

/// The standard eight grade-school CoT exemplars (data/exemplars/gsm8k_cot8.jsonl).
std::vector<Exemplar> builtin_exemplars();
/// Line-delimited JSON records with `problem` and `solution` fields.
std::vector<Exemplar> parse_exemplars(std::string_view jsonl);
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);

class PromptForge {
public:
    explicit PromptForge(TemplateSet templates = TemplateSet::builtin());

    const TemplateSet& templates() const { return templates_; }

    PromptBundle build_initial(const Question& question, const StrategySpec& spec) const;
    PromptBundle build_static_reflection(const Question& question, std::string_view prior_output) const;
    /// Asks the model for a reflection prompt tailored to this question and
    /// every failed attempt in `history`.
    PromptBundle build_meta_prompt(const Question& question, std::span<const LayerRecord> history) const;
    PromptBundle build_reflection_from_generated(const Question& question, std::string_view generated_reflection,
                                                 std::string_view prior_output) const;

    /// How the final answer must be written for a variant.
    static std::string answer_format(Variant variant);
    static std::string render_history(std::span<const LayerRecord> history);

private:
    TemplateSet templates_;
};

}  // namespace maps
