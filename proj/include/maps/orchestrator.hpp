// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maps/corpus.hpp"
#include "maps/domain.hpp"
#include "maps/provider.hpp"
#include "maps/run_log.hpp"

namespace maps {

struct DatasetEntry {
    std::string id;
    Variant variant = Variant::gsm8k;
    std::filesystem::path path;
    /// Evaluate the whole file once instead of `runs` samples. Defaults to
    /// true for AIME 2025 and MATH-500.
    bool full_set = false;
};

struct ModelEntry {
    std::string id;
    std::string provider = "scripted";  // "scripted" or "http"
    std::filesystem::path script;       // scripted only
    ProviderConfig http;                // http only
};

struct StrategyEntry {
    StrategyKind kind = StrategyKind::CoT;
    int max_layers = -1;  // -1: the kind's default
};

/// Declarative experiment grid, read from a JSON file. Relative paths are
/// resolved against the config file's directory. See README for the key set.
struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<DatasetEntry> datasets;
    std::vector<ModelEntry> models;
    std::vector<StrategyEntry> strategies;
    SamplePlan sampling{5, 100, 42};
    std::filesystem::path price_sheet;
    std::filesystem::path output_dir;
    int parallel = 1;
    std::string template_version = "v1";
    std::optional<std::filesystem::path> templates_dir;  // builtin v1 when unset
    std::optional<std::filesystem::path> exemplars;      // builtin 8-shot set when unset
    DecodingParams decoding;
    int layer_cap = kDefaultLayerCap;

    static ExperimentConfig parse(std::string_view json_text, const std::filesystem::path& base_dir);
    static ExperimentConfig load(const std::filesystem::path& file);

    /// Problems with the config against a price sheet: unknown variants,
    /// models without prices, invalid provider settings. Empty when valid.
    std::vector<std::string> problems(const PriceSheet& prices) const;
};

using ProviderFactory = std::function<std::shared_ptr<Provider>(const ModelEntry&)>;

enum class Execution { serial, parallel };

struct RunOptions {
    bool live = false;
    int parallel = 0;  // overrides config.parallel when > 0
    Execution execution = Execution::parallel;
    /// Replaces provider construction (tests inject scripted providers here).
    ProviderFactory provider_factory;
    /// Refuse live runs whose projected cost exceeds this.
    std::optional<Money> budget;
    std::ostream* progress = nullptr;
};

struct RunSummary {
    std::size_t planned = 0;
    std::size_t skipped = 0;  // already present in the log
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;
    std::filesystem::path log_dir;
    Money projected_cost;
};

/// One attempt of the grid: dataset x model x strategy x run x question.
struct PlannedAttempt {
    RunKey key;
    std::size_t dataset_index = 0;
    std::size_t model_index = 0;
    std::size_t strategy_index = 0;
    std::size_t question_index = 0;
};

struct LoadedExperiment {
    std::vector<Corpus> corpora;
    /// samples[dataset][run] = question ids
    std::vector<std::vector<std::vector<std::string>>> samples;
    std::vector<std::vector<StrategySpec>> strategies;  // [dataset][strategy]
    std::vector<PlannedAttempt> grid;
};

/// Loads corpora, draws samples and enumerates the grid in a fixed order.
LoadedExperiment plan_experiment(const ExperimentConfig& config);

/// Runs every planned attempt not yet in `<output_dir>/traces.jsonl`,
/// appending one trace per attempt, and writes `<output_dir>/manifest.json`.
/// Throws ConfigError when the existing manifest pins different data,
/// seeds or templates. Provider failures are counted in the summary; the
/// log keeps every completed attempt so the run can be resumed.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// JSON listing the sampled question ids per dataset and run.
std::string sample_listing(const ExperimentConfig& config);

}  // namespace maps
