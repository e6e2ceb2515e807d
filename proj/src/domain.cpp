// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/domain.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "maps/answer_codec.hpp"

namespace maps {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
    for (const auto& [e, name] : table)
        if (name == s) return e;
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
    for (const auto& [v, name] : table)
        if (v == e) return name;
    return "?";
}

constexpr std::array<std::pair<Variant, std::string_view>, 6> kVariants{{
    {Variant::gsm8k, "gsm8k"},
    {Variant::symbolic_main, "symbolic_main"},
    {Variant::symbolic_p1, "symbolic_p1"},
    {Variant::symbolic_p2, "symbolic_p2"},
    {Variant::aime_2025, "aime_2025"},
    {Variant::math_500, "math_500"},
}};

constexpr std::array<std::pair<StrategyKind, std::string_view>, 4> kKinds{{
    {StrategyKind::Baseline, "Baseline"},
    {StrategyKind::CoT, "CoT"},
    {StrategyKind::SR, "SR"},
    {StrategyKind::MAPS, "MAPS"},
}};

constexpr std::array<std::pair<Verdict, std::string_view>, 3> kVerdicts{{
    {Verdict::correct, "correct"},
    {Verdict::incorrect, "incorrect"},
    {Verdict::unparseable, "unparseable"},
}};

constexpr std::array<std::pair<ReflectionSource, std::string_view>, 4> kSources{{
    {ReflectionSource::none, "none"},
    {ReflectionSource::static_template, "static"},
    {ReflectionSource::generated, "generated"},
    {ReflectionSource::static_fallback, "static_fallback"},
}};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(Variant v) { return name_of(kVariants, v); }
std::optional<Variant> parse_variant(std::string_view s) { return lookup(kVariants, s); }
std::string_view to_string(StrategyKind k) { return name_of(kKinds, k); }
std::optional<StrategyKind> parse_strategy_kind(std::string_view s) { return lookup(kKinds, s); }
std::string_view to_string(Verdict v) { return name_of(kVerdicts, v); }
std::optional<Verdict> parse_verdict(std::string_view s) { return lookup(kVerdicts, s); }
std::string_view to_string(ReflectionSource s) { return name_of(kSources, s); }
std::optional<ReflectionSource> parse_reflection_source(std::string_view s) { return lookup(kSources, s); }

// ---------------------------------------------------------------------------
// Rational

std::optional<Rational> Rational::make(std::int64_t num, std::int64_t den) {
    constexpr auto kMin = std::numeric_limits<std::int64_t>::min();
    if (den == 0 || num == kMin || den == kMin) return std::nullopt;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(num, den);
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

// ---------------------------------------------------------------------------
// StrategySpec

std::string StrategySpec::label() const {
    if (kind == StrategyKind::MAPS) return "MAPS-" + std::to_string(max_layers) + "L";
    return std::string(to_string(kind));
}

StrategySpec make_strategy(StrategyKind kind, Variant variant, const std::vector<Exemplar>& exemplars,
                           int max_layers) {
    StrategySpec spec;
    spec.kind = kind;
    const bool gsm = is_gsm_family(variant);
    spec.boxed_output = !gsm;
    switch (kind) {
    case StrategyKind::Baseline: spec.max_layers = 0; break;
    case StrategyKind::CoT: spec.max_layers = 0; break;
    case StrategyKind::SR: spec.max_layers = 1; break;
    case StrategyKind::MAPS: spec.max_layers = max_layers < 0 ? kDefaultLayerCap : max_layers; break;
    }
    if (kind != StrategyKind::Baseline && gsm) spec.exemplars = exemplars;
    return spec;
}

std::vector<std::string> check_strategy(const StrategySpec& spec, Variant variant, int layer_cap) {
    std::vector<std::string> out;
    switch (spec.kind) {
    case StrategyKind::Baseline:
    case StrategyKind::CoT:
        if (spec.max_layers != 0) out.push_back(std::string(to_string(spec.kind)) + " requires max_layers = 0");
        break;
    case StrategyKind::SR:
        if (spec.max_layers != 1) out.push_back("SR requires max_layers = 1");
        break;
    case StrategyKind::MAPS:
        if (spec.max_layers < 1 || spec.max_layers > layer_cap)
            out.push_back("MAPS requires 1 <= max_layers <= " + std::to_string(layer_cap));
        break;
    }
    const bool gsm = is_gsm_family(variant);
    if (spec.kind == StrategyKind::Baseline) {
        if (!spec.exemplars.empty()) out.push_back("Baseline takes no exemplars");
    } else if (gsm) {
        if (spec.exemplars.size() != kCotExemplarCount)
            out.push_back("expected " + std::to_string(kCotExemplarCount) + " exemplars on " +
                          std::string(to_string(variant)) + ", got " + std::to_string(spec.exemplars.size()));
    } else if (!spec.exemplars.empty()) {
        out.push_back("exemplars are not used on " + std::string(to_string(variant)));
    }
    if (!gsm && !spec.boxed_output) out.push_back("boxed output is required on " + std::string(to_string(variant)));
    return out;
}

// ---------------------------------------------------------------------------
// Money

Money Money::parse(std::string_view text) {
    const std::string s = trim(text);
    auto fail = [&] { return DataError("invalid decimal amount '" + std::string(text) + "'"); };
    if (s.empty()) throw fail();
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '-' || s[i] == '+') negative = s[i++] == '-';
    std::int64_t whole = 0;
    std::size_t digits = 0;
    constexpr std::int64_t kMaxWhole = std::numeric_limits<std::int64_t>::max() / kPicoPerUsd - 1;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, ++digits) {
        whole = whole * 10 + (s[i] - '0');
        if (whole > kMaxWhole) throw fail();
    }
    std::int64_t frac = 0;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, ++frac_digits) {
            if (frac_digits == 12) throw fail();
            frac = frac * 10 + (s[i] - '0');
        }
    }
    if (i != s.size() || digits + frac_digits == 0) throw fail();
    for (std::size_t k = frac_digits; k < 12; ++k) frac *= 10;
    const std::int64_t pico = whole * kPicoPerUsd + frac;
    return Money(negative ? -pico : pico);
}

std::string Money::to_string(int decimals) const {
    decimals = std::clamp(decimals, 0, 12);
    std::int64_t scale = 1;
    for (int k = decimals; k < 12; ++k) scale *= 10;
    const bool negative = pico_ < 0;
    // |INT64_MIN| does not fit; amounts that large are not meaningful here.
    std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(pico_ + 1)) + 1 : static_cast<std::uint64_t>(pico_);
    std::uint64_t q = mag / static_cast<std::uint64_t>(scale);
    const std::uint64_t r = mag % static_cast<std::uint64_t>(scale);
    if (scale > 1 && r * 2 >= static_cast<std::uint64_t>(scale)) ++q;
    std::uint64_t unit = 1;
    for (int k = 0; k < decimals; ++k) unit *= 10;
    std::string out = (negative && q != 0) ? "-" : "";
    out += std::to_string(q / unit);
    if (decimals > 0) {
        std::string frac = std::to_string(q % unit);
        out += '.';
        out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0');
        out += frac;
    }
    return out;
}

Money& Money::operator+=(Money o) {
    std::int64_t sum = 0;
    if (__builtin_add_overflow(pico_, o.pico_, &sum)) throw DataError("money overflow");
    pico_ = sum;
    return *this;
}

// ---------------------------------------------------------------------------
// Traces

std::vector<std::string> validate_trace(const AttemptTrace& trace) {
    std::vector<std::string> out;
    if (trace.layers.empty()) {
        out.emplace_back("trace has no layers");
        return out;
    }
    TokenUsage sum;
    bool seen_correct = false;
    bool reported_after_correct = false;
    const auto gold = codec::normalize(trace.gold);
    for (std::size_t i = 0; i < trace.layers.size(); ++i) {
        const LayerRecord& layer = trace.layers[i];
        if (layer.layer_index != static_cast<int>(i)) out.push_back("layer " + std::to_string(i) + " has index " +
                                                                    std::to_string(layer.layer_index));
        if (seen_correct && !reported_after_correct) {
            out.emplace_back("layer after correct verdict");
            reported_after_correct = true;
        }
        if (i == 0 && layer.reflection_prompt) out.emplace_back("layer 0 has a reflection prompt");
        if (i > 0 && !layer.reflection_prompt) out.push_back("layer " + std::to_string(i) + " has no reflection prompt");
        if (layer.usage.prompt_tokens < 0 || layer.usage.completion_tokens < 0)
            out.push_back("layer " + std::to_string(i) + " has negative usage");
        if (layer.verdict == Verdict::correct) {
            const auto candidate = layer.extracted ? codec::normalize(*layer.extracted) : std::nullopt;
            if (!candidate || !gold || codec::compare(*candidate, *gold, trace.variant) != Verdict::correct)
                out.push_back("layer " + std::to_string(i) + " is correct but its answer does not match gold");
            seen_correct = true;
        }
        sum += layer.usage;
    }
    if (trace.final_verdict != trace.layers.back().verdict) out.emplace_back("final verdict differs from last layer");
    if (sum != trace.total_usage) out.emplace_back("usage sum mismatch");
    if (static_cast<int>(trace.layers.size()) > 1 + trace.strategy.max_layers)
        out.emplace_back("more layers than the strategy allows");
    return out;
}

// ---------------------------------------------------------------------------
// PriceSheet

void PriceSheet::set(const std::string& model_id, ModelRates rates) {
    constexpr std::int64_t kMicro = 1'000'000;
    for (Money m : {rates.usd_per_1m_input, rates.usd_per_1m_output}) {
        if (m.pico() < 0) throw ConfigError("negative price for model '" + model_id + "'");
        if (m.pico() % kMicro != 0)
            throw ConfigError("price for model '" + model_id + "' has more than six decimal places");
    }
    rates_[model_id] = rates;
}

const ModelRates& PriceSheet::at(const std::string& model_id) const {
    auto it = rates_.find(model_id);
    if (it == rates_.end()) throw ConfigError("no price entry for model '" + model_id + "'");
    return it->second;
}

PriceSheet PriceSheet::parse_csv(std::string_view text) {
    PriceSheet sheet;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
        if (header) {
            header = false;
            if (cells.size() != 3 || cells[0] != "model_id")
                throw ConfigError("price sheet header must be model_id,usd_per_1m_input,usd_per_1m_output");
            continue;
        }
        if (cells.size() != 3 || cells[0].empty())
            throw ConfigError("price sheet line " + std::to_string(lineno) + ": expected 3 fields");
        if (sheet.contains(cells[0])) throw ConfigError("duplicate price entry for model '" + cells[0] + "'");
        try {
            sheet.set(cells[0], {Money::parse(cells[1]), Money::parse(cells[2])});
        } catch (const DataError& e) {
            throw ConfigError("price sheet line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (header) throw ConfigError("price sheet is empty");
    return sheet;
}

PriceSheet PriceSheet::load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read price sheet '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace maps
