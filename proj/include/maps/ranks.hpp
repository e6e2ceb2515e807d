// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maps::stats {

/// Blocks x treatments table of scores (accuracies), stored row-major.
/// CSV form: header row = treatment labels after a leading block-label
/// column, one row per block.
class AccuracyMatrix {
public:
    AccuracyMatrix() = default;
    AccuracyMatrix(std::vector<std::string> block_labels, std::vector<std::string> treatment_labels,
                   std::vector<double> values);

    std::size_t blocks() const { return block_labels_.size(); }
    std::size_t treatments() const { return treatment_labels_.size(); }
    double at(std::size_t block, std::size_t treatment) const { return values_[block * treatments() + treatment]; }
    std::span<const double> row(std::size_t block) const {
        return {values_.data() + block * treatments(), treatments()};
    }
    const std::vector<std::string>& block_labels() const { return block_labels_; }
    const std::vector<std::string>& treatment_labels() const { return treatment_labels_; }
    const std::vector<double>& values() const { return values_; }

    /// Same matrix without blocks whose scores are all equal (e.g. all-zero AIME rows).
    AccuracyMatrix without_tied_blocks() const;
    /// Swaps the roles of blocks and treatments.
    AccuracyMatrix transposed() const;

    static AccuracyMatrix parse_csv(std::string_view text);
    static AccuracyMatrix load_csv(const std::string& path);
    std::string to_csv() const;

private:
    std::vector<std::string> block_labels_;
    std::vector<std::string> treatment_labels_;
    std::vector<double> values_;
};

/// Within-block ranks, 1 = highest score, ties share the average rank.
struct BlockRanks {
    std::size_t blocks = 0;
    std::size_t treatments = 0;
    std::vector<double> ranks;      // blocks x treatments, row-major
    std::vector<double> tie_terms;  // per block: sum over tie groups of t^3 - t
};

/// Reference kernel, one block after another.
BlockRanks rank_blocks_serial(const AccuracyMatrix& m);
/// OpenMP kernel, blocks ranked in parallel. Bit-identical to the serial one.
BlockRanks rank_blocks(const AccuracyMatrix& m);

/// Column sums of a rank table.
std::vector<double> rank_sums_serial(const BlockRanks& r);
std::vector<double> rank_sums(const BlockRanks& r);

}  // namespace maps::stats
