// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maps/domain.hpp"

namespace maps::codec {

enum class Rule { boxed, hash_marker, last_number };

/// Priority-ordered extraction rules for a dataset variant. GSM-family and
/// AIME outputs fall back to the last number in the text; MATH answers are
/// expressions, so they only accept an explicit boxed or `####` answer.
std::vector<Rule> rules_for(Variant variant);

/// Contents of the last balanced `\boxed{...}` (or `\fbox{...}`) in `text`.
std::optional<std::string> extract_boxed(std::string_view text);
/// Remainder of the line after the last `####` marker.
std::optional<std::string> extract_hash_marker(std::string_view text);
/// Last number-like token (integer, decimal, or a/b fraction; commas allowed
/// as thousands separators).
std::optional<std::string> extract_last_number(std::string_view text);

/// First rule in priority order that matches wins.
std::optional<std::string> extract_final_answer(std::string_view output, Variant variant);
std::optional<std::string> extract_final_answer(std::string_view output, const std::vector<Rule>& rules);

/// Normalizes a raw answer. Returns nullopt when nothing is left after
/// normalization (the unparseable signal).
std::optional<GoldAnswer> normalize(std::string_view raw);

/// Exact rational equality when both sides are numeric, else canonical
/// string equality. Never returns Verdict::unparseable.
Verdict compare(const GoldAnswer& candidate, const GoldAnswer& gold);

/// compare() plus the variant's answer-format rules: AIME candidates must be
/// integers in [0, 999].
Verdict compare(const GoldAnswer& candidate, const GoldAnswer& gold, Variant variant);

/// Extract, normalize and compare in one step.
struct Judgement {
    std::optional<std::string> extracted;  // canonical form of the candidate
    Verdict verdict = Verdict::unparseable;
};
Judgement judge(std::string_view output, const GoldAnswer& gold, Variant variant);

}  // namespace maps::codec
