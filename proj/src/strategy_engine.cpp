// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/strategy_engine.hpp"

namespace maps {

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string_view prior_or_placeholder(const std::string& output) {
    return blank(output) ? std::string_view("(the previous attempt produced no output)") : std::string_view(output);
}

}  // namespace

std::vector<std::string> EngineConfig::problems() const {
    std::vector<std::string> out;
    if (!(decoding.temperature >= 0.0)) out.emplace_back("temperature must be >= 0");
    if (!(decoding.top_p > 0.0 && decoding.top_p <= 1.0)) out.emplace_back("top_p must be in (0, 1]");
    if (spec.max_layers < 0) out.emplace_back("max_layers must be >= 0");
    if (spec.kind == StrategyKind::MAPS && spec.max_layers > layer_cap)
        out.push_back("max_layers " + std::to_string(spec.max_layers) + " exceeds the layer cap " +
                      std::to_string(layer_cap));
    if ((spec.kind == StrategyKind::Baseline || spec.kind == StrategyKind::CoT) && spec.max_layers != 0)
        out.emplace_back("Baseline and CoT run no reflection layers");
    if (spec.kind == StrategyKind::SR && spec.max_layers != 1) out.emplace_back("SR runs exactly one reflection layer");
    return out;
}

codec::Judgement GoldAnswerVerifier::check(const Question& question, std::string_view output) const {
    return codec::judge(output, question.gold, question.variant);
}

StrategyEngine::StrategyEngine(const PromptForge& forge) : forge_(forge), verifier_(gold_verifier_) {}

StrategyEngine::StrategyEngine(const PromptForge& forge, const Verifier& verifier) : forge_(forge), verifier_(verifier) {}

AttemptTrace StrategyEngine::run_attempt(const Question& question, const EngineConfig& config, Provider& provider,
                                         int run_index, const std::string& attempt_key) const {
    if (auto p = config.problems(); !p.empty()) throw PreconditionError("invalid engine config: " + p.front());
    const StrategySpec& spec = config.spec;

    AttemptTrace trace;
    trace.question_id = question.id;
    trace.model_id = provider.model_id();
    trace.dataset = question.dataset;
    trace.variant = question.variant;
    trace.gold = question.gold.canonical;
    trace.strategy = spec;
    trace.run_index = run_index;

    int ordinal = 0;
    auto call = [&](const PromptBundle& bundle) {
        const CallContext ctx{attempt_key.empty() ? question.id : attempt_key, question.id, ordinal++};
        return provider.complete(bundle, config.decoding, ctx);
    };
    auto judge = [&](LayerRecord& layer) {
        const codec::Judgement j = verifier_.check(question, layer.model_output);
        layer.extracted = j.extracted;
        layer.verdict = j.verdict;
    };

    {
        LayerRecord initial;
        const CompletionResult r = call(forge_.build_initial(question, spec));
        initial.model_output = r.text;
        initial.usage = r.usage;
        judge(initial);
        trace.layers.push_back(std::move(initial));
    }

    auto done = [&] { return trace.layers.back().verdict == Verdict::correct; };

    if (spec.kind == StrategyKind::SR && !done()) {
        LayerRecord layer;
        layer.layer_index = 1;
        const PromptBundle bundle =
            forge_.build_static_reflection(question, prior_or_placeholder(trace.layers.back().model_output));
        layer.reflection_prompt = bundle.user;
        layer.reflection_source = ReflectionSource::static_template;
        const CompletionResult r = call(bundle);
        layer.model_output = r.text;
        layer.usage = r.usage;
        judge(layer);
        trace.layers.push_back(std::move(layer));
    }

    if (spec.kind == StrategyKind::MAPS) {
        for (int level = 1; level <= spec.max_layers && !done(); ++level) {
            LayerRecord layer;
            layer.layer_index = level;
            const std::string_view prior = prior_or_placeholder(trace.layers.back().model_output);

            const CompletionResult meta = call(forge_.build_meta_prompt(question, trace.layers));
            layer.usage = meta.usage;

            PromptBundle bundle;
            if (blank(meta.text)) {
                bundle = forge_.build_static_reflection(question, prior);
                layer.reflection_prompt = bundle.user;
                layer.reflection_source = ReflectionSource::static_fallback;
            } else {
                bundle = forge_.build_reflection_from_generated(question, meta.text, prior);
                layer.reflection_prompt = meta.text;
                layer.reflection_source = ReflectionSource::generated;
            }
            const CompletionResult r = call(bundle);
            layer.model_output = r.text;
            layer.usage += r.usage;
            judge(layer);
            trace.layers.push_back(std::move(layer));
        }
    }

    trace.final_verdict = trace.layers.back().verdict;
    for (const LayerRecord& layer : trace.layers) trace.total_usage += layer.usage;
    return trace;
}

int provider_call_count(const StrategySpec& spec, int reflections) {
    switch (spec.kind) {
    case StrategyKind::Baseline:
    case StrategyKind::CoT: return 1;
    case StrategyKind::SR: return 1 + std::min(reflections, 1);
    case StrategyKind::MAPS: return 1 + 2 * reflections;
    }
    return 1;
}

}  // namespace maps
