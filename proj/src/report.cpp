// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "maps/run_log.hpp"

namespace maps {

namespace {

using ojson = nlohmann::ordered_json;

struct CellKey {
    std::string model_id;
    Variant variant = Variant::gsm8k;
    std::string dataset;
    StrategyKind kind = StrategyKind::Baseline;
    int max_layers = 0;

    std::string strategy() const { return StrategySpec{kind, max_layers, {}, false}.label(); }
    auto tie() const { return std::tie(model_id, variant, dataset, kind, max_layers); }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct Cell {
    std::map<int, std::vector<Verdict>> by_run;
    std::size_t attempts = 0;
    std::size_t correct = 0;
    std::size_t unparseable = 0;
    TokenUsage usage;
    double mean_accuracy = 0.0;
    std::vector<double> per_run;
};

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Rounds half away from zero to whole pico-dollars.
Money per_hundred(Money total, std::size_t attempts) {
    const __int128 scaled = static_cast<__int128>(total.pico()) * 100;
    const __int128 n = static_cast<__int128>(attempts);
    __int128 q = scaled / n;
    const __int128 r = scaled % n;
    if (2 * (r < 0 ? -r : r) >= n) q += scaled < 0 ? -1 : 1;
    return Money::from_pico(static_cast<std::int64_t>(q));
}

}  // namespace

std::string Report::text() const { return document.dump(2) + "\n"; }

ojson to_json(const stats::RankSummary& s) {
    ojson j;
    j["friedman"] = {{"treatments", s.friedman.treatments},
                     {"blocks", s.friedman.blocks},
                     {"statistic", s.friedman.statistic},
                     {"p_value", s.friedman.p_value},
                     {"statistic_tie_corrected", s.friedman.statistic_tie_corrected},
                     {"p_value_tie_corrected", s.friedman.p_value_tie_corrected}};
    j["alpha"] = s.alpha;
    j["critical_difference"] = s.critical_difference;
    auto ranking = ojson::array();
    for (const auto& r : s.ranking) ranking.push_back({{"treatment", r.label}, {"mean_rank", r.mean_rank}});
    j["ranking"] = std::move(ranking);
    auto pairs = ojson::array();
    for (std::size_t a = 0; a < s.ranking.size(); ++a)
        for (std::size_t b = a + 1; b < s.ranking.size(); ++b)
            if (s.significant[a][b]) pairs.push_back({s.ranking[a].label, s.ranking[b].label});
    j["significant_pairs"] = std::move(pairs);
    j["cliques"] = s.cliques;
    return j;
}

Report build_report(const std::vector<AttemptTrace>& traces, const PriceSheet& prices, const ReportOptions& options) {
    if (traces.empty()) throw DataError("run log is empty");

    std::set<RunKey> keys;
    std::map<CellKey, Cell> cells;
    for (const AttemptTrace& t : traces) {
        if (auto problems = validate_trace(t); !problems.empty())
            throw DataError("invalid trace " + key_of(t).to_string() + ": " + problems.front());
        if (!keys.insert(key_of(t)).second) throw DataError("duplicate run key " + key_of(t).to_string());
        Cell& c = cells[{t.model_id, t.variant, t.dataset, t.strategy.kind, t.strategy.max_layers}];
        c.by_run[t.run_index].push_back(t.final_verdict);
        ++c.attempts;
        c.correct += t.final_verdict == Verdict::correct;
        c.unparseable += t.final_verdict == Verdict::unparseable;
        c.usage += t.total_usage;
    }
    for (auto& [key, c] : cells) {
        for (const auto& [run, verdicts] : c.by_run) c.per_run.push_back(stats::accuracy(verdicts));
        c.mean_accuracy = stats::mean_accuracy(c.per_run);
    }

    auto gsm8k_cell = [&](const CellKey& k) -> const Cell* {
        for (const auto& [other, c] : cells)
            if (other.model_id == k.model_id && other.variant == Variant::gsm8k && other.kind == k.kind &&
                other.max_layers == k.max_layers)
                return &c;
        return nullptr;
    };

    Report report;
    ojson& doc = report.document;
    doc["schema_version"] = std::string(kRunLogSchemaVersion);
    doc["traces"] = traces.size();

    std::ostringstream acc_csv;
    acc_csv << "model_id,dataset,variant,strategy,runs,attempts,correct,unparseable,mean_accuracy,"
               "symbolic_loss_pct,symbolic_loss_abs\n";
    auto accuracy = ojson::array();
    for (const auto& [k, c] : cells) {
        ojson row;
        row["model_id"] = k.model_id;
        row["dataset"] = k.dataset;
        row["variant"] = std::string(to_string(k.variant));
        row["strategy"] = k.strategy();
        row["runs"] = c.by_run.size();
        row["attempts"] = c.attempts;
        row["correct"] = c.correct;
        row["unparseable"] = c.unparseable;
        row["per_run_accuracy"] = c.per_run;
        row["mean_accuracy"] = c.mean_accuracy;
        std::string loss_pct, loss_abs;
        if (is_symbolic(k.variant)) {
            if (const Cell* base = gsm8k_cell(k); base && base->mean_accuracy > 0.0) {
                const double rel = stats::symbolic_loss(base->mean_accuracy, c.mean_accuracy);
                const double abs = stats::symbolic_loss_absolute(base->mean_accuracy, c.mean_accuracy);
                row["symbolic_loss_pct"] = rel;
                row["symbolic_loss_abs"] = abs;
                loss_pct = fixed(rel, 2);
                loss_abs = fixed(abs, 4);
            }
        }
        acc_csv << k.model_id << ',' << k.dataset << ',' << to_string(k.variant) << ',' << k.strategy() << ','
                << c.by_run.size() << ',' << c.attempts << ',' << c.correct << ',' << c.unparseable << ','
                << fixed(c.mean_accuracy, 4) << ',' << loss_pct << ',' << loss_abs << '\n';
        accuracy.push_back(std::move(row));
    }
    doc["accuracy"] = std::move(accuracy);

    std::ostringstream cost_csv;
    cost_csv << "model_id,dataset,variant,strategy,attempts,prompt_tokens,completion_tokens,total_cost_usd,"
                "cost_per_100_questions_usd\n";
    auto cost = ojson::array();
    for (const auto& [k, c] : cells) {
        const Money total = stats::cost_of(c.usage, prices.at(k.model_id));
        const Money hundred = per_hundred(total, c.attempts);
        ojson row;
        row["model_id"] = k.model_id;
        row["dataset"] = k.dataset;
        row["variant"] = std::string(to_string(k.variant));
        row["strategy"] = k.strategy();
        row["attempts"] = c.attempts;
        row["prompt_tokens"] = c.usage.prompt_tokens;
        row["completion_tokens"] = c.usage.completion_tokens;
        row["total_cost_usd"] = total.to_string(6);
        row["cost_per_100_questions_usd"] = hundred.to_string(6);
        cost_csv << k.model_id << ',' << k.dataset << ',' << to_string(k.variant) << ',' << k.strategy() << ','
                 << c.attempts << ',' << c.usage.prompt_tokens << ',' << c.usage.completion_tokens << ','
                 << total.to_string(6) << ',' << hundred.to_string(6) << '\n';
        cost.push_back(std::move(row));
    }
    doc["cost"] = std::move(cost);

    // Strategies as treatments, (model, dataset) cells as blocks.
    std::vector<std::pair<StrategyKind, int>> strategy_order;
    std::map<std::pair<std::string, std::string>, std::map<std::pair<StrategyKind, int>, double>> blocks;
    for (const auto& [k, c] : cells) {
        const auto s = std::make_pair(k.kind, k.max_layers);
        if (std::find(strategy_order.begin(), strategy_order.end(), s) == strategy_order.end()) strategy_order.push_back(s);
        blocks[{k.model_id, k.dataset + "/" + std::string(to_string(k.variant))}][s] = c.mean_accuracy;
    }
    std::sort(strategy_order.begin(), strategy_order.end());
    std::vector<std::string> treatment_labels;
    for (const auto& [kind, layers] : strategy_order) treatment_labels.push_back(StrategySpec{kind, layers, {}, false}.label());
    std::vector<std::string> block_labels;
    std::vector<double> values;
    for (const auto& [block, scores] : blocks) {
        if (scores.size() != strategy_order.size()) continue;
        block_labels.push_back(block.first + " @ " + block.second);
        for (const auto& s : strategy_order) values.push_back(scores.at(s));
    }

    ojson ranks;
    ranks["treatments"] = "strategy";
    ranks["blocks"] = "model @ dataset";
    ranks["include_tied_blocks"] = options.include_tied_blocks;
    stats::AccuracyMatrix matrix(block_labels, treatment_labels, values);
    if (!options.include_tied_blocks) matrix = matrix.without_tied_blocks();
    if (matrix.treatments() >= 2 && matrix.treatments() <= 20 && matrix.blocks() >= 2) {
        ranks["status"] = "ok";
        ranks["summary"] = to_json(stats::rank_summary(matrix, options.alpha));
    } else {
        ranks["status"] = "insufficient data: need 2..20 strategies and at least 2 complete model/dataset blocks";
    }
    doc["rank_statistics"] = std::move(ranks);

    report.accuracy_csv = acc_csv.str();
    report.cost_csv = cost_csv.str();
    return report;
}

}  // namespace maps
