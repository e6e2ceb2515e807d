// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace maps::stats {

namespace {

// Two-tailed studentized range quantiles / sqrt(2), infinite df, k = 2..20.
// k <= 10 are the published post-hoc table values; k > 10 extend it with the
// same distribution.
constexpr std::array<double, 19> kQ05{1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
                                      3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
constexpr std::array<double, 19> kQ10{1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
                                      3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319};

double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

void require_shape(const AccuracyMatrix& m) {
    if (m.treatments() < 2) throw PreconditionError("rank statistics need at least 2 treatments");
    if (m.blocks() < 2) throw PreconditionError("rank statistics need at least 2 blocks");
}

}  // namespace

double accuracy(std::span<const Verdict> verdicts) {
    if (verdicts.empty()) throw PreconditionError("accuracy of an empty verdict list");
    const auto correct = std::count(verdicts.begin(), verdicts.end(), Verdict::correct);
    return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

double mean_accuracy(std::span<const double> per_run) {
    if (per_run.empty()) throw PreconditionError("mean accuracy of no runs");
    return std::accumulate(per_run.begin(), per_run.end(), 0.0) / static_cast<double>(per_run.size());
}

double symbolic_loss(double acc_gsm8k, double acc_symbolic) {
    if (!(acc_gsm8k > 0.0)) throw PreconditionError("symbolic loss needs a positive GSM8K accuracy");
    return 100.0 * (acc_symbolic - acc_gsm8k) / acc_gsm8k;
}

double symbolic_loss_absolute(double acc_gsm8k, double acc_symbolic) { return acc_gsm8k - acc_symbolic; }

Money cost_of(const TokenUsage& usage, const ModelRates& rates) {
    constexpr std::int64_t kTokensPerRate = 1'000'000;
    std::int64_t in = 0, out = 0, total = 0;
    if (__builtin_mul_overflow(usage.prompt_tokens, rates.usd_per_1m_input.pico() / kTokensPerRate, &in) ||
        __builtin_mul_overflow(usage.completion_tokens, rates.usd_per_1m_output.pico() / kTokensPerRate, &out) ||
        __builtin_add_overflow(in, out, &total))
        throw DataError("cost overflow");
    return Money::from_pico(total);
}

Money cost_of(const std::map<std::string, TokenUsage>& usage_by_model, const PriceSheet& prices) {
    Money total;
    for (const auto& [model, usage] : usage_by_model) total += cost_of(usage, prices.at(model));
    return total;
}

FriedmanResult friedman(const AccuracyMatrix& m) {
    require_shape(m);
    const BlockRanks ranks = rank_blocks(m);
    const std::vector<double> sums = rank_sums(ranks);
    const double k = static_cast<double>(m.treatments());
    const double n = static_cast<double>(m.blocks());

    // sum_j (R_j - N(k+1)/2)^2 is exactly zero when every block is fully tied.
    const double expected = n * (k + 1.0) / 2.0;
    double ss = 0.0;
    for (double r : sums) ss += (r - expected) * (r - expected);

    FriedmanResult out;
    out.treatments = m.treatments();
    out.blocks = m.blocks();
    out.statistic = 12.0 / (n * k * (k + 1.0)) * ss;
    out.p_value = chi2_sf(out.statistic, k - 1.0);

    const double ties = std::accumulate(ranks.tie_terms.begin(), ranks.tie_terms.end(), 0.0);
    const double correction = 1.0 - ties / (n * (k * k * k - k));
    if (correction > 0.0) {
        out.statistic_tie_corrected = out.statistic / correction;
        out.p_value_tie_corrected = chi2_sf(out.statistic_tie_corrected, k - 1.0);
    }
    return out;
}

double nemenyi_q(std::size_t k, double alpha) {
    if (k < 2 || k > 20) throw PreconditionError("Nemenyi table covers 2..20 treatments, got " + std::to_string(k));
    if (std::abs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
    if (std::abs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
    throw PreconditionError("Nemenyi table covers alpha 0.05 and 0.10 only");
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
    if (n < 1) throw PreconditionError("critical difference needs at least one block");
    const double kk = static_cast<double>(k);
    return nemenyi_q(k, alpha) * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n)));
}

std::vector<RankedTreatment> mean_ranks(const AccuracyMatrix& m) {
    if (m.treatments() < 1 || m.blocks() < 1) throw PreconditionError("mean ranks of an empty matrix");
    const std::vector<double> sums = rank_sums(rank_blocks(m));
    std::vector<RankedTreatment> out;
    out.reserve(sums.size());
    for (std::size_t t = 0; t < sums.size(); ++t)
        out.push_back({m.treatment_labels()[t], sums[t] / static_cast<double>(m.blocks())});
    std::sort(out.begin(), out.end(), [](const RankedTreatment& a, const RankedTreatment& b) {
        if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
        return a.label < b.label;
    });
    return out;
}

RankSummary rank_summary(const AccuracyMatrix& m, double alpha) {
    RankSummary s;
    s.friedman = friedman(m);
    s.ranking = mean_ranks(m);
    s.alpha = alpha;
    s.critical_difference = nemenyi_cd(m.treatments(), m.blocks(), alpha);

    const std::size_t k = s.ranking.size();
    s.significant.assign(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            s.significant[i][j] = std::abs(s.ranking[i].mean_rank - s.ranking[j].mean_rank) >= s.critical_difference;

    std::size_t last_end = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t end = i + 1;
        while (end < k && s.ranking[end].mean_rank - s.ranking[i].mean_rank < s.critical_difference) ++end;
        if (end - i >= 2 && end > last_end) {
            std::vector<std::string> clique;
            for (std::size_t j = i; j < end; ++j) clique.push_back(s.ranking[j].label);
            s.cliques.push_back(std::move(clique));
            last_end = end;
        }
    }
    return s;
}

}  // namespace maps::stats
