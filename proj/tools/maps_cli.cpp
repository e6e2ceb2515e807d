// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

// maps: run experiment grids, report on run logs, rank-test accuracy tables.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "maps/orchestrator.hpp"
#include "maps/report.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kProvider = 3, kData = 4 };

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw maps::ConfigError("cannot write '" + p.string() + "'");
    out << text;
}

int cmd_run(const std::string& config_path, bool live, int parallel, bool serial, const std::string& budget) {
    const auto config = maps::ExperimentConfig::load(config_path);
    maps::RunOptions options;
    options.live = live;
    options.parallel = parallel;
    options.execution = serial ? maps::Execution::serial : maps::Execution::parallel;
    options.progress = &std::cerr;
    if (!budget.empty()) {
        try {
            options.budget = maps::Money::parse(budget);
        } catch (const maps::DataError& e) {
            throw maps::ConfigError(std::string("--budget: ") + e.what());
        }
    }
    const auto summary = maps::run_experiment(config, options);
    std::cout << "planned " << summary.planned << ", skipped " << summary.skipped << ", completed "
              << summary.completed << ", failed " << summary.failed << "\n"
              << "log: " << (summary.log_dir / "traces.jsonl").string() << "\n";
    for (const auto& f : summary.failures) std::cerr << "failed: " << f << "\n";
    return summary.failed ? kProvider : kOk;
}

int cmd_report(const std::string& log_dir, const std::string& prices_path, std::string out_dir, double alpha,
               bool exclude_tied) {
    // Accepts the run directory or the traces file itself.
    std::filesystem::path log_file = log_dir;
    if (std::filesystem::is_directory(log_file)) log_file /= "traces.jsonl";
    const auto contents = maps::read_run_log(log_file);
    if (contents.torn_tail) std::cerr << "warning: ignoring a torn final line in the run log\n";
    const auto prices = maps::PriceSheet::load_csv(prices_path);
    const auto report = maps::build_report(contents.traces, prices, {alpha, !exclude_tied});
    if (out_dir.empty()) out_dir = log_file.parent_path().string();
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "report.json", report.text());
    write_file(std::filesystem::path(out_dir) / "accuracy.csv", report.accuracy_csv);
    write_file(std::filesystem::path(out_dir) / "costs.csv", report.cost_csv);
    std::cout << report.accuracy_csv << "\n" << report.cost_csv << "\n"
              << report.document["rank_statistics"].dump(2) << "\n";
    return kOk;
}

int cmd_stats(const std::string& matrix_path, double alpha, bool transpose, bool exclude_tied) {
    auto matrix = maps::stats::AccuracyMatrix::load_csv(matrix_path);
    if (transpose) matrix = matrix.transposed();
    if (exclude_tied) matrix = matrix.without_tied_blocks();
    std::cout << maps::to_json(maps::stats::rank_summary(matrix, alpha)).dump(2) << "\n";
    return kOk;
}

int cmd_validate(const std::string& config_path) {
    const auto config = maps::ExperimentConfig::load(config_path);
    const auto prices = maps::PriceSheet::load_csv(config.price_sheet.string());
    if (const auto problems = config.problems(prices); !problems.empty()) {
        for (const auto& p : problems) std::cerr << "config: " << p << "\n";
        return kConfig;
    }
    const auto ex = maps::plan_experiment(config);
    for (const auto& c : ex.corpora)
        std::cout << c.manifest.dataset << " (" << maps::to_string(c.manifest.variant) << "): "
                  << c.manifest.record_count << " records, sha256 " << c.manifest.sha256 << "\n";
    std::cout << ex.grid.size() << " attempts planned\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAPS multi-layer self-reflection harness"};
    app.require_subcommand(1);

    std::string config_path, budget, log_dir, prices_path, out_dir, matrix_path;
    bool live = false, serial = false, exclude_tied = false, transpose = false;
    int parallel = 0;
    double alpha = 0.05;

    auto* run = app.add_subcommand("run", "Run (or resume) an experiment grid");
    run->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_flag("--live", live, "Allow paid calls to HTTP providers");
    run->add_option("-j,--parallel", parallel, "Concurrent attempts (overrides the config)")->check(CLI::PositiveNumber);
    run->add_flag("--serial", serial, "Run attempts one at a time on the calling thread");
    run->add_option("--budget", budget, "Refuse live runs projected to cost more than this many USD");

    auto* report = app.add_subcommand("report", "Accuracy, symbolic loss, cost and rank statistics for a run log");
    report->add_option("-l,--log", log_dir, "Run directory or its traces.jsonl")->required()->check(CLI::ExistingPath);
    report->add_option("-p,--prices", prices_path, "Price sheet CSV")->required()->check(CLI::ExistingFile);
    report->add_option("-o,--out", out_dir, "Where to write report.json, accuracy.csv, costs.csv (default: the log dir)");
    report->add_option("--alpha", alpha, "Significance level (0.05 or 0.10)");
    report->add_flag("--exclude-tied-blocks", exclude_tied, "Drop blocks where every strategy scored the same");

    auto* stats = app.add_subcommand("stats", "Friedman test and Nemenyi critical difference for an accuracy table");
    stats->add_option("-m,--matrix", matrix_path, "CSV: block label column, then one column per treatment")
        ->required()
        ->check(CLI::ExistingFile);
    stats->add_option("--alpha", alpha, "Significance level (0.05 or 0.10)");
    stats->add_flag("--transpose", transpose, "Treat columns as blocks and rows as treatments");
    stats->add_flag("--exclude-tied-blocks", exclude_tied, "Drop blocks where every treatment scored the same");

    auto* sample = app.add_subcommand("sample", "Print the sampled question ids per dataset and run");
    sample->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate", "Check a config, its price sheet and corpora without running");
    validate->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(config_path, live, parallel, serial, budget);
        if (*report) return cmd_report(log_dir, prices_path, out_dir, alpha, exclude_tied);
        if (*stats) return cmd_stats(matrix_path, alpha, transpose, exclude_tied);
        if (*sample) {
            std::cout << maps::sample_listing(maps::ExperimentConfig::load(config_path));
            return kOk;
        }
        if (*validate) return cmd_validate(config_path);
    } catch (const maps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const maps::ProviderFailure& e) {
        std::cerr << "provider failure: " << e.what() << "\n";
        return kProvider;
    } catch (const maps::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const maps::PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const maps::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
