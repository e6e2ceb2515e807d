// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "maps/domain.hpp"

namespace maps {

struct CorpusManifest {
    std::string dataset;
    Variant variant = Variant::gsm8k;
    std::string source_path;
    std::size_t record_count = 0;
    std::string sha256;  // of the raw file bytes, lowercase hex
};

struct Corpus {
    CorpusManifest manifest;
    std::vector<Question> questions;
};

struct SamplePlan {
    int runs = 1;
    std::size_t sample_size = 0;
    std::uint64_t seed = 0;
};

std::string sha256_hex(std::string_view bytes);

/// Parses line-delimited JSON records. GSM family: {question, answer} with the
/// gold taken from the `#### n` tail of `answer`. MATH-500: {problem, answer,
/// subject, level}. AIME: {id, problem, answer}. Ids come from `id`
/// (suffixed with `instance` when present) or `unique_id`; records without
/// one get a content-derived id so ids never depend on record order.
///
/// Throws DataError listing every record with a missing or unparseable gold,
/// and on duplicate ids.
Corpus parse_corpus(std::string_view jsonl, const std::string& dataset, Variant variant,
                    const std::string& source_path = {});
Corpus load_corpus(const std::filesystem::path& path, const std::string& dataset, Variant variant);

/// SplitMix64 finalizer, used to derive per-run child seeds.
std::uint64_t splitmix64(std::uint64_t x);
/// Child seed for run `run`: splitmix64(seed + 0x9E3779B97F4A7C15 * (run + 1)).
std::uint64_t child_seed(std::uint64_t seed, int run);

/// One id list per run. Each run sorts the corpus ids, seeds std::mt19937_64
/// with child_seed(seed, run), and takes the first `sample_size` positions of
/// a forward Fisher-Yates shuffle. Bounded draws use rejection sampling on the
/// raw 64-bit output (see uniform_below), so results are identical across
/// standard libraries.
std::vector<std::vector<std::string>> draw_samples(const std::vector<Question>& corpus, const SamplePlan& plan);

/// Uniform integer in [0, bound) from raw mt19937_64 output.
std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng);

struct FullSetPlan {
    SamplePlan plan;
    std::optional<std::string> warning;  // set when the variant is normally subsampled
};

/// Single run over the whole corpus, the protocol for AIME 2025 and MATH-500.
FullSetPlan full_set_plan(const Corpus& corpus, std::uint64_t seed = 0);

}  // namespace maps
