// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maps/analytics.hpp"
#include "maps/domain.hpp"

namespace maps {

struct ReportOptions {
    double alpha = 0.05;
    /// Keep blocks where every strategy scored the same (all-zero AIME rows).
    bool include_tied_blocks = true;
};

struct Report {
    nlohmann::ordered_json document;
    std::string accuracy_csv;
    std::string cost_csv;

    /// Pretty-printed document, newline-terminated.
    std::string text() const;
};

/// Aggregates a run log into accuracy, symbolic-loss, cost and
/// rank-statistics sections. Output depends only on the set of traces, not
/// on their order in the log. Throws DataError on an empty or invalid log.
Report build_report(const std::vector<AttemptTrace>& traces, const PriceSheet& prices,
                    const ReportOptions& options = {});

nlohmann::ordered_json to_json(const stats::RankSummary& summary);

}  // namespace maps
