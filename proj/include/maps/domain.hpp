// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maps {

// ---------------------------------------------------------------------------
// Errors. Each family maps to one CLI exit code (see tools/maps_cli.cpp).

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct ProviderFailure : Error {
    using Error::Error;
};
struct ProtocolError : ProviderFailure {
    using ProviderFailure::ProviderFailure;
};
struct PreconditionError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------

enum class Variant { gsm8k, symbolic_main, symbolic_p1, symbolic_p2, aime_2025, math_500 };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

/// GSM8K and the three GSM-Symbolic variants share the `#### n` answer
/// convention and the 8-shot exemplar prompt.
constexpr bool is_gsm_family(Variant v) {
    return v == Variant::gsm8k || v == Variant::symbolic_main || v == Variant::symbolic_p1 ||
           v == Variant::symbolic_p2;
}
constexpr bool is_symbolic(Variant v) {
    return v == Variant::symbolic_main || v == Variant::symbolic_p1 || v == Variant::symbolic_p2;
}

/// Exact rational with a positive denominator, always stored reduced.
class Rational {
public:
    Rational() = default;
    static std::optional<Rational> make(std::int64_t num, std::int64_t den);
    static Rational integer(std::int64_t v) { return Rational(v, 1); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    bool is_integer() const { return den_ == 1; }

    /// "n" for integers, "n/d" otherwise.
    std::string to_string() const;

    friend bool operator==(const Rational&, const Rational&) = default;

private:
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {}
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

struct GoldAnswer {
    std::string canonical;
    std::optional<Rational> numeric;

    friend bool operator==(const GoldAnswer&, const GoldAnswer&) = default;
};

struct Question {
    std::string id;
    std::string body;
    GoldAnswer gold;
    std::string dataset;
    Variant variant = Variant::gsm8k;
};

enum class StrategyKind { Baseline, CoT, SR, MAPS };

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> parse_strategy_kind(std::string_view s);

struct Exemplar {
    std::string problem;
    std::string solution;

    friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

inline constexpr int kDefaultLayerCap = 3;
inline constexpr std::size_t kCotExemplarCount = 8;

struct StrategySpec {
    StrategyKind kind = StrategyKind::Baseline;
    int max_layers = 0;
    std::vector<Exemplar> exemplars;
    bool boxed_output = false;

    /// Short display label: Baseline, CoT, SR, MAPS-1L, MAPS-3L, ...
    std::string label() const;

    friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// Builds the spec the experimental protocol prescribes for a strategy on a
/// dataset variant: 8 exemplars on GSM-family data, boxed output elsewhere.
StrategySpec make_strategy(StrategyKind kind, Variant variant, const std::vector<Exemplar>& exemplars,
                           int max_layers = -1);

/// Violations of the StrategySpec invariants for the given variant. Empty when valid.
std::vector<std::string> check_strategy(const StrategySpec& spec, Variant variant,
                                        int layer_cap = kDefaultLayerCap);

enum class Verdict { correct, incorrect, unparseable };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

/// Where a layer's reflection prompt came from.
enum class ReflectionSource { none, static_template, generated, static_fallback };

std::string_view to_string(ReflectionSource s);
std::optional<ReflectionSource> parse_reflection_source(std::string_view s);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// Exact USD amount held as integer pico-dollars (1e-12 USD).
class Money {
public:
    static constexpr std::int64_t kPicoPerUsd = 1'000'000'000'000;

    constexpr Money() = default;
    static constexpr Money from_pico(std::int64_t p) { return Money(p); }

    /// Parses a plain decimal such as "0.15", "12", "-0.000001". At most 12
    /// fractional digits; anything else throws DataError.
    static Money parse(std::string_view decimal);

    constexpr std::int64_t pico() const { return pico_; }

    /// Fixed-point rendering with `decimals` digits, rounded half away from zero.
    std::string to_string(int decimals = 12) const;

    Money& operator+=(Money o);
    friend Money operator+(Money a, Money b) { return a += b; }
    friend auto operator<=>(const Money&, const Money&) = default;

private:
    constexpr explicit Money(std::int64_t p) : pico_(p) {}
    std::int64_t pico_ = 0;
};

struct LayerRecord {
    int layer_index = 0;
    std::optional<std::string> reflection_prompt;
    ReflectionSource reflection_source = ReflectionSource::none;
    std::string model_output;
    std::optional<std::string> extracted;
    Verdict verdict = Verdict::incorrect;
    TokenUsage usage;

    friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

struct AttemptTrace {
    std::string question_id;
    std::string model_id;
    std::string dataset;
    Variant variant = Variant::gsm8k;
    std::string gold;  // canonical gold answer, kept so a trace can be checked standalone
    StrategySpec strategy;
    int run_index = 0;
    std::vector<LayerRecord> layers;
    Verdict final_verdict = Verdict::incorrect;
    TokenUsage total_usage;
    Money total_cost_usd;

    friend bool operator==(const AttemptTrace&, const AttemptTrace&) = default;
};

/// Every AttemptTrace invariant that does not hold, as a short description.
/// Violations are data; this never throws.
std::vector<std::string> validate_trace(const AttemptTrace& trace);

struct ModelRates {
    Money usd_per_1m_input;
    Money usd_per_1m_output;
};

/// Per-model USD rates per million tokens. Rates carry at most six decimal
/// places so that per-token costs stay exact in pico-dollars.
class PriceSheet {
public:
    void set(const std::string& model_id, ModelRates rates);
    bool contains(const std::string& model_id) const { return rates_.count(model_id) != 0; }
    /// Throws ConfigError for an unknown model; a missing price is never zero.
    const ModelRates& at(const std::string& model_id) const;
    const std::map<std::string, ModelRates>& entries() const { return rates_; }

    /// CSV with header `model_id,usd_per_1m_input,usd_per_1m_output`.
    static PriceSheet parse_csv(std::string_view text);
    static PriceSheet load_csv(const std::string& path);

private:
    std::map<std::string, ModelRates> rates_;
};

}  // namespace maps
