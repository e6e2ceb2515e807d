// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "maps/orchestrator.hpp"
#include "maps/provider.hpp"
#include "maps/ranks.hpp"
#include "table2.hpp"

namespace maps::fixtures {

// Synthetic grade-school corpus and script. Question i has gold 3i + 7 and
// first answers correctly at layer i % 5 (4: never). Reply o (the o-th call
// of an attempt) belongs to layer ceil(o / 2), so the same script serves SR
// (answers at calls 0, 1) and MAPS (answers at calls 0, 2, 4, 6).

inline constexpr const char* kModel = "scripted-model";
inline constexpr int kRepliesPerQuestion = 7;

inline std::string question_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "g%04d", i);
    return buf;
}

inline long gold_of(int i) { return 3L * i + 7; }

inline TokenUsage usage_of(int i, int ordinal) {
    return {200 + 37 * ordinal + i % 13, 40 + 11 * ordinal + i % 7};
}

inline std::vector<ScriptedReply> replies_for(int i) {
    const int first_correct = i % 5;
    std::vector<ScriptedReply> out;
    for (int o = 0; o < kRepliesPerQuestion; ++o) {
        const int layer = (o + 1) / 2;
        const long v = layer >= first_correct && first_correct < 4 ? gold_of(i) : gold_of(i) + 1;
        ScriptedReply r;
        r.text = o % 2 == 0 ? "Adding the two amounts gives " + std::to_string(v) + ".\n#### " + std::to_string(v)
                            : "Recompute the total carefully and finish with #### " + std::to_string(v) + ".";
        r.usage = usage_of(i, o);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string corpus_jsonl(int n) {
    std::ostringstream out;
    for (int i = 0; i < n; ++i) {
        out << "{\"id\": \"" << question_id(i) << "\", \"question\": \"Ann has " << i << " apples and buys "
            << 2 * i + 7 << " more. How many apples does she have now?\", \"answer\": \"She has " << i << " + "
            << 2 * i + 7 << " = " << gold_of(i) << " apples.\\n#### " << gold_of(i) << "\"}\n";
    }
    return out.str();
}

inline std::string script_jsonl(int n) {
    std::ostringstream out;
    for (int i = 0; i < n; ++i) {
        out << "{\"question_id\": \"" << question_id(i) << "\", \"replies\": [";
        const auto replies = replies_for(i);
        for (std::size_t o = 0; o < replies.size(); ++o) {
            if (o) out << ", ";
            std::string text;
            for (char c : replies[o].text) text += c == '\n' ? std::string("\\n") : std::string(1, c);
            out << "{\"text\": \"" << text << "\", \"prompt_tokens\": " << replies[o].usage.prompt_tokens
                << ", \"completion_tokens\": " << replies[o].usage.completion_tokens << "}";
        }
        out << "]}\n";
    }
    return out.str();
}

inline std::shared_ptr<ScriptedProvider> scripted_provider(int n, const std::string& model = kModel) {
    auto p = std::make_shared<ScriptedProvider>(model);
    for (int i = 0; i < n; ++i) p->set_replies(question_id(i), replies_for(i));
    return p;
}

inline std::string prices_csv() {
    return "model_id,usd_per_1m_input,usd_per_1m_output\nscripted-model,0.137,0.583\n";
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("maps-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

/// Writes corpus, script and prices into `dir` and returns a config for one
/// scripted model over a gsm8k corpus of `corpus_size` questions.
inline ExperimentConfig grid_config(const TempDir& dir, int corpus_size, int runs, std::size_t sample_size,
                                    const std::string& strategies_json) {
    write_file(dir / "corpus.jsonl", corpus_jsonl(corpus_size));
    write_file(dir / "script.jsonl", script_jsonl(corpus_size));
    write_file(dir / "prices.csv", prices_csv());
    const std::string config = R"({
  "name": "grid",
  "output_dir": "out",
  "price_sheet": "prices.csv",
  "sampling": {"runs": )" + std::to_string(runs) +
                               R"(, "sample_size": )" + std::to_string(sample_size) + R"(, "seed": 42},
  "parallel": 4,
  "datasets": [{"id": "gsm8k", "variant": "gsm8k", "path": "corpus.jsonl"}],
  "models": [{"id": "scripted-model", "provider": "scripted", "script": "script.jsonl"}],
  "strategies": )" + strategies_json + "\n}\n";
    write_file(dir / "config.json", config);
    return ExperimentConfig::load(dir / "config.json");
}

inline constexpr const char* kAllStrategies =
    R"(["Baseline", "CoT", "SR", {"kind": "MAPS", "max_layers": 1}, {"kind": "MAPS", "max_layers": 3}])";

// Published accuracy table in matrix form.

/// Symbolic-p2 row: strategies as blocks, models as treatments.
inline stats::AccuracyMatrix p2_matrix() {
    std::vector<std::string> blocks(kStrategies.begin(), kStrategies.end());
    std::vector<std::string> treatments(kModels.begin(), kModels.end());
    std::vector<double> values;
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t m = 0; m < 8; ++m) values.push_back(kAccuracy[m][3][s]);
    return {blocks, treatments, values};
}

/// Every model x dataset cell as a block, strategies as treatments.
inline stats::AccuracyMatrix strategy_matrix() {
    std::vector<std::string> blocks;
    std::vector<double> values;
    for (std::size_t m = 0; m < 8; ++m)
        for (std::size_t d = 0; d < 6; ++d) {
            blocks.push_back(std::string(kModels[m]) + " @ " + std::string(kDatasets[d]));
            for (std::size_t s = 0; s < 5; ++s) values.push_back(kAccuracy[m][d][s]);
        }
    return {blocks, std::vector<std::string>(kStrategies.begin(), kStrategies.end()), values};
}

}  // namespace maps::fixtures
