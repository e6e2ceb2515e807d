// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "maps/domain.hpp"

namespace maps {

inline constexpr std::string_view kRunLogSchemaVersion = "1";

/// One JSON object on a single line, no trailing newline. Keys are emitted
/// in a fixed order so identical traces serialize to identical bytes.
std::string serialize_trace(const AttemptTrace& trace);
/// Inverse of serialize_trace. Throws DataError on malformed input or an
/// unknown schema_version.
AttemptTrace parse_trace(std::string_view line);

/// The resumability unit of an experiment.
struct RunKey {
    std::string dataset;
    Variant variant = Variant::gsm8k;
    std::string model_id;
    std::string strategy;  // StrategySpec::label(), i.e. kind plus layer cap
    int run_index = 0;
    std::string question_id;

    std::string to_string() const;
    friend auto operator<=>(const RunKey&, const RunKey&) = default;
};

RunKey key_of(const AttemptTrace& trace);

struct RunLogContents {
    std::vector<AttemptTrace> traces;
    /// An unterminated final line left by an interrupted writer.
    bool torn_tail = false;
};

/// Reads `traces.jsonl`. A torn final line is reported, not parsed; any
/// other malformed line throws DataError.
RunLogContents read_run_log(const std::filesystem::path& file);

/// Cuts an unterminated final line so appends start on a fresh line.
void repair_torn_tail(const std::filesystem::path& file);

/// Serialized appender: whole lines only, flushed after each record.
class RunLogWriter {
public:
    explicit RunLogWriter(const std::filesystem::path& file);
    void append(const AttemptTrace& trace);

private:
    std::mutex mu_;
    std::ofstream out_;
};

}  // namespace maps
