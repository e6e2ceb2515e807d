// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/answer_codec.hpp"

#include <cctype>
#include <regex>

namespace maps::codec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

// Position one past the brace matching s[open], or npos.
std::size_t match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
}

// `\cmd{X}` -> `X` for every occurrence.
void unwrap_command(std::string& s, std::string_view cmd) {
    for (std::size_t pos = s.find(cmd); pos != std::string::npos; pos = s.find(cmd, pos)) {
        const std::size_t open = pos + cmd.size();
        if (open >= s.size() || s[open] != '{') {
            pos = open;
            continue;
        }
        const std::size_t end = match_brace(s, open);
        if (end == std::string::npos) return;
        s = s.substr(0, pos) + s.substr(open + 1, end - open - 2) + s.substr(end);
    }
}

bool wrapped_in_braces(std::string_view s) {
    return s.size() >= 2 && s.front() == '{' && match_brace(s, 0) == s.size();
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!is_digit(c)) return false;
    return true;
}

std::optional<std::int64_t> parse_int(std::string_view digits) {
    std::int64_t v = 0;
    for (char c : digits) {
        if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, c - '0', &v)) return std::nullopt;
    }
    return v;
}

std::optional<Rational> parse_fraction(std::string_view num, std::string_view den, bool negative) {
    // A sign may sit inside either part: \frac{-1}{2}, -1/2.
    for (std::string_view* part : {&num, &den}) {
        if (!part->empty() && part->front() == '-') {
            negative = !negative;
            part->remove_prefix(1);
        }
    }
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    auto n = parse_int(num);
    auto d = parse_int(den);
    if (!n || !d) return std::nullopt;
    return Rational::make(negative ? -*n : *n, *d);
}

// Exact value of an integer, decimal, a/b or \frac{a}{b} literal.
std::optional<Rational> parse_numeric(std::string s) {
    for (std::string_view sym : {"\\$", "$", "€", "£", ","}) replace_all(s, sym, "");
    while (!s.empty() && s.back() == '.') s.pop_back();
    if (s.empty()) return std::nullopt;

    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        i = 1;
    }
    std::string_view body = std::string_view(s).substr(i);
    if (body.empty()) return std::nullopt;

    if (body.starts_with("\\frac{")) {
        const std::size_t num_end = match_brace(body, 5);
        if (num_end == std::string_view::npos || num_end >= body.size() || body[num_end] != '{') return std::nullopt;
        const std::size_t den_end = match_brace(body, num_end);
        if (den_end != body.size()) return std::nullopt;
        return parse_fraction(body.substr(6, num_end - 7), body.substr(num_end + 1, den_end - num_end - 2), negative);
    }
    if (auto slash = body.find('/'); slash != std::string_view::npos)
        return parse_fraction(body.substr(0, slash), body.substr(slash + 1), negative);

    if (auto dot = body.find('.'); dot != std::string_view::npos) {
        std::string_view whole = body.substr(0, dot);
        std::string_view frac = body.substr(dot + 1);
        if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac)) return std::nullopt;
        while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
        std::string digits = std::string(whole) + std::string(frac);
        if (digits.empty()) digits = "0";
        auto n = parse_int(digits);
        if (!n || frac.size() > 18) return std::nullopt;
        std::int64_t den = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
        return Rational::make(negative ? -*n : *n, den);
    }
    if (!all_digits(body)) return std::nullopt;
    auto n = parse_int(body);
    if (!n) return std::nullopt;
    return Rational::make(negative ? -*n : *n, 1);
}

// Whitespace- and markup-insensitive form shared by numeric and symbolic answers.
std::string structural_form(std::string_view raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw)
        if (!is_space(c)) s.push_back(c);
    for (;;) {
        const std::string before = s;
        if (s.size() >= 2 && s.front() == '$' && s.back() == '$' && s.find('$', 1) == s.size() - 1)
            s = s.substr(1, s.size() - 2);
        unwrap_command(s, "\\text");
        unwrap_command(s, "\\mathrm");
        unwrap_command(s, "\\textbf");
        replace_all(s, "\\dfrac", "\\frac");
        replace_all(s, "\\tfrac", "\\frac");
        replace_all(s, "\\left", "");
        replace_all(s, "\\right", "");
        for (std::string_view sp : {"\\!", "\\,", "\\;", "\\:"}) replace_all(s, sp, "");
        while (!s.empty() && s.back() == '.') s.pop_back();
        while (wrapped_in_braces(s)) s = s.substr(1, s.size() - 2);
        if (s == before) break;
    }
    return s;
}

}  // namespace

std::vector<Rule> rules_for(Variant variant) {
    if (variant == Variant::math_500) return {Rule::boxed, Rule::hash_marker};
    return {Rule::boxed, Rule::hash_marker, Rule::last_number};
}

std::optional<std::string> extract_boxed(std::string_view text) {
    for (std::string_view cmd : {"\\boxed", "\\fbox"}) {
        std::optional<std::pair<std::size_t, std::string>> last;
        for (std::size_t pos = text.find(cmd); pos != std::string_view::npos; pos = text.find(cmd, pos + 1)) {
            std::size_t open = pos + cmd.size();
            while (open < text.size() && text[open] == ' ') ++open;
            if (open >= text.size() || text[open] != '{') continue;
            const std::size_t end = match_brace(text, open);
            if (end == std::string_view::npos) continue;
            last = {pos, std::string(text.substr(open + 1, end - open - 2))};
        }
        if (last) {
            // \boxed wins over \fbox; among one command the last occurrence wins.
            return trim(last->second).empty() ? std::nullopt : std::optional(trim(last->second));
        }
    }
    return std::nullopt;
}

std::optional<std::string> extract_hash_marker(std::string_view text) {
    const std::size_t pos = text.rfind("####");
    if (pos == std::string_view::npos) return std::nullopt;
    std::string_view rest = text.substr(pos + 4);
    rest = rest.substr(0, rest.find('\n'));
    std::string answer = trim(rest);
    if (answer.empty()) return std::nullopt;
    // "#### 18 dollars" -> "18"; non-numeric answers are kept whole.
    static const std::regex leading_number(R"(^(?:\\?\$\s*)?-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:/\d+)?)");
    std::smatch m;
    if (std::regex_search(answer, m, leading_number)) {
        const std::string tail = trim(answer.substr(static_cast<std::size_t>(m.length(0))));
        if (tail.empty() || std::isalpha(static_cast<unsigned char>(tail.front())) || tail == ".") return m.str(0);
    }
    return answer;
}

std::optional<std::string> extract_last_number(std::string_view text) {
    static const std::regex number(R"(-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:/\d+)?)");
    std::optional<std::string> last;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it)
        last = it->str();
    return last;
}

std::optional<std::string> extract_final_answer(std::string_view output, const std::vector<Rule>& rules) {
    for (Rule rule : rules) {
        std::optional<std::string> hit;
        switch (rule) {
        case Rule::boxed: hit = extract_boxed(output); break;
        case Rule::hash_marker: hit = extract_hash_marker(output); break;
        case Rule::last_number: hit = extract_last_number(output); break;
        }
        if (hit) return hit;
    }
    return std::nullopt;
}

std::optional<std::string> extract_final_answer(std::string_view output, Variant variant) {
    return extract_final_answer(output, rules_for(variant));
}

std::optional<GoldAnswer> normalize(std::string_view raw) {
    const std::string form = structural_form(raw);
    if (form.empty()) return std::nullopt;
    if (auto value = parse_numeric(form)) return GoldAnswer{value->to_string(), value};
    return GoldAnswer{form, std::nullopt};
}

Verdict compare(const GoldAnswer& candidate, const GoldAnswer& gold) {
    if (candidate.numeric && gold.numeric) return *candidate.numeric == *gold.numeric ? Verdict::correct : Verdict::incorrect;
    return candidate.canonical == gold.canonical ? Verdict::correct : Verdict::incorrect;
}

Verdict compare(const GoldAnswer& candidate, const GoldAnswer& gold, Variant variant) {
    if (variant == Variant::aime_2025) {
        const auto& n = candidate.numeric;
        if (!n || !n->is_integer() || n->num() < 0 || n->num() > 999) return Verdict::incorrect;
    }
    return compare(candidate, gold);
}

Judgement judge(std::string_view output, const GoldAnswer& gold, Variant variant) {
    const auto raw = extract_final_answer(output, variant);
    if (!raw) return {};
    const auto candidate = normalize(*raw);
    if (!candidate) return {};
    return {candidate->canonical, compare(*candidate, gold, variant)};
}

}  // namespace maps::codec
