// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "maps/answer_codec.hpp"
#include "maps/prompt_forge.hpp"
#include "support/fixtures.hpp"

using namespace maps;

namespace {

Question question(Variant v, std::string body = "What is 2 + 2?") {
    Question q;
    q.id = "q";
    q.body = std::move(body);
    q.gold = *codec::normalize("4");
    q.dataset = std::string(to_string(v));
    q.variant = v;
    return q;
}

std::size_t count(const std::string& s, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("render substitutes known placeholders in one pass") {
    CHECK(render("a {x} b {y}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
    CHECK(render("\\frac{1}{2} and {x}", {{"x", "v"}}) == "\\frac{1}{2} and v");
    CHECK(render("{x}", {{"x", "{y}"}, {"y", "boom"}}) == "{y}");
    CHECK(render("{\"json\": 1}", {}) == "{\"json\": 1}");
    CHECK(render("unclosed {x", {{"x", "1"}}) == "unclosed {x");
}

TEST_CASE("builtin templates carry every placeholder they need") {
    const auto t = TemplateSet::builtin();
    CHECK(t.version == "v1");
    CHECK(t.meta_prompt.find("{question}") != std::string::npos);
    CHECK(t.meta_prompt.find("{history}") != std::string::npos);
    CHECK(t.static_reflection.find("{prior_output}") != std::string::npos);
    CHECK(t.reflection.find("{reflection}") != std::string::npos);
    CHECK(t.reflection.find("{question}") != std::string::npos);
    CHECK(t.meta_prompt.back() != '\n');
}

TEST_CASE("template sets load from a versioned directory") {
    const fixtures::TempDir dir;
    fixtures::write_file(dir / "v2/meta_prompt.txt", "M {question} {history}\n");
    fixtures::write_file(dir / "v2/static_reflection.txt", "S {question}\n");
    fixtures::write_file(dir / "v2/reflection.txt", "R {reflection}\n");
    const auto t = TemplateSet::load(dir.path(), "v2");
    CHECK(t.version == "v2");
    CHECK(t.meta_prompt == "M {question} {history}");
    CHECK_THROWS_AS(TemplateSet::load(dir.path(), "v3"), ConfigError);
}

TEST_CASE("initial prompts per strategy and variant") {
    const PromptForge forge;
    const auto ex = builtin_exemplars();

    const auto base = forge.build_initial(question(Variant::gsm8k), make_strategy(StrategyKind::Baseline, Variant::gsm8k, ex));
    CHECK(base.user == "What is 2 + 2?");
    CHECK(base.purpose == PromptPurpose::initial);
    CHECK_FALSE(base.system);

    const auto cot = forge.build_initial(question(Variant::symbolic_p2), make_strategy(StrategyKind::CoT, Variant::symbolic_p2, ex));
    CHECK(count(cot.user, "Q: ") == 9);
    CHECK(cot.user.find(ex.front().problem) != std::string::npos);
    CHECK(cot.user.size() > 200);
    CHECK(cot.user.rfind("Q: What is 2 + 2?\nA: Let's think step by step.") != std::string::npos);
    CHECK(cot.user.substr(cot.user.size() - 28) == "A: Let's think step by step.");

    const auto aime = forge.build_initial(question(Variant::aime_2025), make_strategy(StrategyKind::MAPS, Variant::aime_2025, ex));
    CHECK(aime.user.find("\\boxed{") != std::string::npos);
    CHECK(aime.user.find("Q: ") == std::string::npos);

    const auto math_base = forge.build_initial(question(Variant::math_500), make_strategy(StrategyKind::Baseline, Variant::math_500, ex));
    CHECK(math_base.user.find("\\boxed{") != std::string::npos);

    auto broken = make_strategy(StrategyKind::CoT, Variant::gsm8k, ex);
    broken.exemplars.pop_back();
    CHECK_THROWS_AS(forge.build_initial(question(Variant::gsm8k), broken), PreconditionError);
}

TEST_CASE("questions containing placeholder text are not expanded") {
    const PromptForge forge;
    const auto q = question(Variant::gsm8k, "Explain {history} and {reflection}");
    const auto b = forge.build_static_reflection(q, "prior {question}");
    CHECK(b.user.find("Explain {history} and {reflection}") != std::string::npos);
    CHECK(b.user.find("prior {question}") != std::string::npos);
}

TEST_CASE("reflection prompts") {
    const PromptForge forge;
    const auto q = question(Variant::gsm8k);
    CHECK_THROWS_AS(forge.build_static_reflection(q, ""), PreconditionError);

    const auto s = forge.build_static_reflection(q, "2 + 2 = 5\n#### 5");
    CHECK(s.purpose == PromptPurpose::reflection);
    CHECK(s.user.find("2 + 2 = 5") != std::string::npos);
    CHECK(s.user.find("####") != std::string::npos);

    CHECK_THROWS_AS(forge.build_reflection_from_generated(q, "", "x"), PreconditionError);
    const auto g = forge.build_reflection_from_generated(q, "Watch the carry digit.", "#### 5");
    CHECK(g.user.rfind("Watch the carry digit.", 0) == 0);
    CHECK(g.user.find("What is 2 + 2?") != std::string::npos);

    const auto m = forge.build_reflection_from_generated(question(Variant::math_500), "Hint", "x");
    CHECK(m.user.find("\\boxed{") != std::string::npos);
}

TEST_CASE("meta prompt embeds the full failure history") {
    const PromptForge forge;
    const auto q = question(Variant::gsm8k);
    std::vector<LayerRecord> history(2);
    history[0].model_output = "first try #### 5";
    history[0].extracted = "5";
    history[1].layer_index = 1;
    history[1].reflection_prompt = "check addition";
    history[1].model_output = "no answer";
    history[1].verdict = Verdict::unparseable;

    const auto b = forge.build_meta_prompt(q, history);
    CHECK(b.purpose == PromptPurpose::meta_prompt_request);
    CHECK(b.user.find("What is 2 + 2?") != std::string::npos);
    CHECK(b.user.find("first try #### 5") != std::string::npos);
    CHECK(b.user.find("Extracted answer: 5") != std::string::npos);
    CHECK(b.user.find("check addition") != std::string::npos);
    CHECK(b.user.find("(none found)") != std::string::npos);
    CHECK(b.user.find("{history}") == std::string::npos);

    CHECK_THROWS_AS(forge.build_meta_prompt(q, {}), PreconditionError);
    history[1].verdict = Verdict::correct;
    CHECK_THROWS_AS(forge.build_meta_prompt(q, history), PreconditionError);
}

TEST_CASE("exemplar parsing") {
    const auto ex = parse_exemplars("{\"problem\": \"p\", \"solution\": \"s\"}\n\n{\"problem\": \"q\", \"solution\": \"t\"}\n");
    REQUIRE(ex.size() == 2);
    CHECK(ex[1] == Exemplar{"q", "t"});
    CHECK_THROWS_AS(parse_exemplars("{\"problem\": \"p\"}\n"), DataError);
}
