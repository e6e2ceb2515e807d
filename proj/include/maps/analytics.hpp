// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "maps/domain.hpp"
#include "maps/ranks.hpp"

namespace maps::stats {

/// N_corr / N_total. Unparseable verdicts count toward the total only.
double accuracy(std::span<const Verdict> verdicts);
double mean_accuracy(std::span<const double> per_run);

/// Relative change in percent, 100 * (symbolic - gsm8k) / gsm8k. Negative
/// means accuracy was lost. This is the value printed in parentheses next
/// to GSM-Symbolic accuracies.
double symbolic_loss(double acc_gsm8k, double acc_symbolic);
/// Plain difference acc_gsm8k - acc_symbolic (positive means accuracy was lost).
double symbolic_loss_absolute(double acc_gsm8k, double acc_symbolic);

Money cost_of(const TokenUsage& usage, const ModelRates& rates);
Money cost_of(const std::map<std::string, TokenUsage>& usage_by_model, const PriceSheet& prices);

struct FriedmanResult {
    std::size_t treatments = 0;
    std::size_t blocks = 0;
    double statistic = 0.0;  // plain chi-square form
    double p_value = 1.0;
    double statistic_tie_corrected = 0.0;
    double p_value_tie_corrected = 1.0;
};

/// Friedman test over treatments (columns), blocks (rows). p-values use the
/// chi-square distribution with k-1 degrees of freedom. A matrix with no
/// variation inside any block yields statistic 0, p 1.
FriedmanResult friedman(const AccuracyMatrix& m);

/// Studentized range quantile divided by sqrt(2), infinite degrees of freedom,
/// for k = 2..20 treatments. alpha is 0.05 or 0.10.
double nemenyi_q(std::size_t k, double alpha = 0.05);
double nemenyi_cd(std::size_t k, std::size_t n, double alpha = 0.05);

struct RankedTreatment {
    std::string label;
    double mean_rank = 0.0;
};

/// Treatments by ascending mean rank (1 = best). Equal means are ordered by label.
std::vector<RankedTreatment> mean_ranks(const AccuracyMatrix& m);

struct RankSummary {
    std::vector<RankedTreatment> ranking;
    FriedmanResult friedman;
    double alpha = 0.05;
    double critical_difference = 0.0;
    /// significant[i][j] for ranking positions i, j: mean ranks differ by at least the CD.
    std::vector<std::vector<bool>> significant;
    /// Maximal runs of consecutive treatments whose mean ranks lie within the CD
    /// of each other (the bars of a CD diagram). Singletons are omitted.
    std::vector<std::vector<std::string>> cliques;
};

RankSummary rank_summary(const AccuracyMatrix& m, double alpha = 0.05);

}  // namespace maps::stats
