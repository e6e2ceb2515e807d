// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "maps/answer_codec.hpp"
#include "maps/domain.hpp"
#include "maps/prompt_forge.hpp"
#include "maps/provider.hpp"

namespace maps {

struct EngineConfig {
    StrategySpec spec;
    DecodingParams decoding;
    /// Upper bound on MAPS layers. Raising it past 3 is an explicit override.
    int layer_cap = kDefaultLayerCap;

    std::vector<std::string> problems() const;
};

/// Decides whether a model output answers the question. Only gold-answer
/// verification ships; the interface leaves room for proxy signals.
class Verifier {
public:
    virtual ~Verifier() = default;
    virtual codec::Judgement check(const Question& question, std::string_view output) const = 0;
};

class GoldAnswerVerifier final : public Verifier {
public:
    codec::Judgement check(const Question& question, std::string_view output) const override;
};

/// Runs one strategy on one question.
///
/// Layer 0 is the initial answer. Baseline and CoT stop there. SR adds one
/// reflection layer built from the static template. MAPS adds up to
/// `spec.max_layers` layers, each made of two calls: a meta-prompt request
/// that yields a tailored reflection prompt, then the re-answer under that
/// prompt. Any correct verdict ends the attempt immediately. An empty
/// meta-prompt reply falls back to the static template for that layer.
///
/// A provider failure propagates as ProviderFailure; the attempt leaves no
/// trace and can be rerun.
class StrategyEngine {
public:
    explicit StrategyEngine(const PromptForge& forge);
    StrategyEngine(const PromptForge& forge, const Verifier& verifier);

    AttemptTrace run_attempt(const Question& question, const EngineConfig& config, Provider& provider,
                             int run_index = 0, const std::string& attempt_key = {}) const;

private:
    const PromptForge& forge_;
    GoldAnswerVerifier gold_verifier_;
    const Verifier& verifier_;
};

/// Provider calls made by an attempt that executed `reflections` reflection layers.
int provider_call_count(const StrategySpec& spec, int reflections);

}  // namespace maps
