// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "maps/domain.hpp"
#include "maps/prompt_forge.hpp"

using namespace maps;

TEST_CASE("rational values are stored reduced with a positive denominator") {
    auto r = Rational::make(6, -8);
    REQUIRE(r);
    CHECK(r->num() == -3);
    CHECK(r->den() == 4);
    CHECK(r->to_string() == "-3/4");
    CHECK(Rational::make(10, 5)->to_string() == "2");
    CHECK_FALSE(Rational::make(1, 0));
    CHECK(*Rational::make(2, 4) == *Rational::make(-1, -2));
}

TEST_CASE("money parses decimals exactly and rounds half away from zero") {
    CHECK(Money::parse("0.15").pico() == 150'000'000'000);
    CHECK(Money::parse("12").pico() == 12 * Money::kPicoPerUsd);
    CHECK(Money::parse("-0.000001").pico() == -1'000'000);
    CHECK(Money::parse("0.000000000001").pico() == 1);
    CHECK_THROWS_AS(Money::parse("0.0000000000001"), DataError);
    CHECK_THROWS_AS(Money::parse("1e-3"), DataError);
    CHECK_THROWS_AS(Money::parse(""), DataError);
    CHECK_THROWS_AS(Money::parse("abc"), DataError);

    CHECK(Money::parse("0.0250395").to_string(6) == "0.025040");
    CHECK(Money::parse("0.0250394").to_string(6) == "0.025039");
    CHECK(Money::parse("-0.0000005").to_string(6) == "-0.000001");
    CHECK(Money::parse("0.75").to_string(6) == "0.750000");
    CHECK(Money::parse("3").to_string(0) == "3");
    CHECK(Money().to_string(2) == "0.00");
}

TEST_CASE("money addition detects overflow") {
    Money big = Money::from_pico(std::numeric_limits<std::int64_t>::max() - 1);
    CHECK_THROWS(big += Money::from_pico(5));
}

TEST_CASE("token usage addition is associative and commutative") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        TokenUsage a{static_cast<std::int64_t>(rng() % 100000), static_cast<std::int64_t>(rng() % 100000)};
        TokenUsage b{static_cast<std::int64_t>(rng() % 100000), static_cast<std::int64_t>(rng() % 100000)};
        TokenUsage c{static_cast<std::int64_t>(rng() % 100000), static_cast<std::int64_t>(rng() % 100000)};
        CHECK((a + b) + c == a + (b + c));
        CHECK(a + b == b + a);
        CHECK(a + TokenUsage{} == a);
    }
}

TEST_CASE("enum names round-trip") {
    for (auto v : {Variant::gsm8k, Variant::symbolic_main, Variant::symbolic_p1, Variant::symbolic_p2,
                   Variant::aime_2025, Variant::math_500})
        CHECK(parse_variant(to_string(v)) == v);
    for (auto k : {StrategyKind::Baseline, StrategyKind::CoT, StrategyKind::SR, StrategyKind::MAPS})
        CHECK(parse_strategy_kind(to_string(k)) == k);
    for (auto v : {Verdict::correct, Verdict::incorrect, Verdict::unparseable}) CHECK(parse_verdict(to_string(v)) == v);
    for (auto s : {ReflectionSource::none, ReflectionSource::static_template, ReflectionSource::generated,
                   ReflectionSource::static_fallback})
        CHECK(parse_reflection_source(to_string(s)) == s);
    CHECK_FALSE(parse_variant("gsm9k"));
    CHECK(is_symbolic(Variant::symbolic_p2));
    CHECK_FALSE(is_symbolic(Variant::gsm8k));
    CHECK(is_gsm_family(Variant::gsm8k));
    CHECK_FALSE(is_gsm_family(Variant::math_500));
}

TEST_CASE("protocol strategy specs") {
    const auto ex = builtin_exemplars();
    REQUIRE(ex.size() == kCotExemplarCount);

    const auto cot = make_strategy(StrategyKind::CoT, Variant::symbolic_p1, ex);
    CHECK(cot.exemplars.size() == 8);
    CHECK_FALSE(cot.boxed_output);
    CHECK(check_strategy(cot, Variant::symbolic_p1).empty());

    const auto math = make_strategy(StrategyKind::MAPS, Variant::math_500, ex);
    CHECK(math.max_layers == 3);
    CHECK(math.exemplars.empty());
    CHECK(math.boxed_output);
    CHECK(check_strategy(math, Variant::math_500).empty());
    CHECK(math.label() == "MAPS-3L");

    const auto base = make_strategy(StrategyKind::Baseline, Variant::gsm8k, ex);
    CHECK(base.exemplars.empty());
    CHECK(check_strategy(base, Variant::gsm8k).empty());

    auto bad = make_strategy(StrategyKind::MAPS, Variant::gsm8k, ex, 4);
    CHECK_FALSE(check_strategy(bad, Variant::gsm8k).empty());
    CHECK(check_strategy(bad, Variant::gsm8k, 4).empty());

    auto few = cot;
    few.exemplars.resize(3);
    CHECK_FALSE(check_strategy(few, Variant::gsm8k).empty());

    auto unboxed = math;
    unboxed.boxed_output = false;
    CHECK_FALSE(check_strategy(unboxed, Variant::aime_2025).empty());

    CHECK(make_strategy(StrategyKind::SR, Variant::gsm8k, ex).label() == "SR");
    CHECK(make_strategy(StrategyKind::MAPS, Variant::gsm8k, ex, 1).label() == "MAPS-1L");
}

namespace {

AttemptTrace sample_trace() {
    AttemptTrace t;
    t.question_id = "q1";
    t.model_id = "m";
    t.dataset = "gsm8k";
    t.gold = "14";
    t.strategy = make_strategy(StrategyKind::MAPS, Variant::gsm8k, builtin_exemplars(), 3);
    LayerRecord l0;
    l0.model_output = "#### 7";
    l0.extracted = "7";
    l0.verdict = Verdict::incorrect;
    l0.usage = {10, 2};
    LayerRecord l1;
    l1.layer_index = 1;
    l1.reflection_prompt = "check it";
    l1.reflection_source = ReflectionSource::generated;
    l1.model_output = "#### 14";
    l1.extracted = "14";
    l1.verdict = Verdict::correct;
    l1.usage = {30, 6};
    t.layers = {l0, l1};
    t.final_verdict = Verdict::correct;
    t.total_usage = {40, 8};
    return t;
}

bool mentions(const std::vector<std::string>& problems, std::string_view what) {
    for (const auto& p : problems)
        if (p.find(what) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_trace accepts a consistent trace") { CHECK(validate_trace(sample_trace()).empty()); }

TEST_CASE("validate_trace reports each broken invariant") {
    auto t = sample_trace();
    t.total_usage = {41, 8};
    CHECK(mentions(validate_trace(t), "usage sum mismatch"));

    t = sample_trace();
    t.layers.push_back(t.layers.back());
    t.layers.back().layer_index = 2;
    t.total_usage += t.layers.back().usage;
    CHECK(mentions(validate_trace(t), "layer after correct verdict"));

    t = sample_trace();
    t.layers[1].extracted = "15";
    CHECK(mentions(validate_trace(t), "does not match gold"));

    t = sample_trace();
    t.final_verdict = Verdict::incorrect;
    CHECK(mentions(validate_trace(t), "final verdict"));

    t = sample_trace();
    t.layers[1].reflection_prompt.reset();
    CHECK(mentions(validate_trace(t), "no reflection prompt"));

    t = sample_trace();
    t.strategy = make_strategy(StrategyKind::CoT, Variant::gsm8k, builtin_exemplars());
    CHECK(mentions(validate_trace(t), "more layers"));

    t = sample_trace();
    t.layers.clear();
    CHECK(mentions(validate_trace(t), "no layers"));
}

TEST_CASE("price sheet parsing") {
    const auto sheet = PriceSheet::parse_csv(
        "model_id,usd_per_1m_input,usd_per_1m_output\n"
        "gpt-4o-mini,0.15,0.60\n"
        "vendor/model-x,2.5,10\n");
    CHECK(sheet.at("gpt-4o-mini").usd_per_1m_input == Money::parse("0.15"));
    CHECK(sheet.at("vendor/model-x").usd_per_1m_output == Money::parse("10"));
    CHECK_THROWS_AS(sheet.at("unknown"), ConfigError);
    CHECK_THROWS_AS(PriceSheet::parse_csv("model,in,out\nm,1,2\n"), ConfigError);
    CHECK_THROWS_AS(PriceSheet::parse_csv("model_id,usd_per_1m_input,usd_per_1m_output\nm,0.0000001,1\n"),
                    ConfigError);
    CHECK_THROWS_AS(PriceSheet::parse_csv("model_id,usd_per_1m_input,usd_per_1m_output\nm,-1,1\n"), ConfigError);
    CHECK_THROWS_AS(PriceSheet::parse_csv("model_id,usd_per_1m_input,usd_per_1m_output\nm,1,1\nm,2,2\n"),
                    ConfigError);
}
