// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "maps/domain.hpp"

namespace maps::stats {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Ranks one block into `out` (1 = largest), returns the tie term.
double rank_one(std::span<const double> values, std::span<double> out, std::vector<std::size_t>& order) {
    const std::size_t k = values.size();
    order.resize(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    double tie_term = 0.0;
    for (std::size_t i = 0; i < k;) {
        std::size_t j = i + 1;
        while (j < k && values[order[j]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t m = i; m < j; ++m) out[order[m]] = avg;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    return tie_term;
}

BlockRanks empty_ranks(const AccuracyMatrix& m) {
    BlockRanks r;
    r.blocks = m.blocks();
    r.treatments = m.treatments();
    r.ranks.assign(r.blocks * r.treatments, 0.0);
    r.tie_terms.assign(r.blocks, 0.0);
    return r;
}

}  // namespace

AccuracyMatrix::AccuracyMatrix(std::vector<std::string> block_labels, std::vector<std::string> treatment_labels,
                               std::vector<double> values)
    : block_labels_(std::move(block_labels)), treatment_labels_(std::move(treatment_labels)), values_(std::move(values)) {
    if (values_.size() != block_labels_.size() * treatment_labels_.size())
        throw DataError("accuracy matrix is not rectangular");
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("accuracy values must lie in [0, 1]");
}

AccuracyMatrix AccuracyMatrix::without_tied_blocks() const {
    std::vector<std::string> labels;
    std::vector<double> values;
    for (std::size_t b = 0; b < blocks(); ++b) {
        auto r = row(b);
        if (std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); })) continue;
        labels.push_back(block_labels_[b]);
        values.insert(values.end(), r.begin(), r.end());
    }
    return {std::move(labels), treatment_labels_, std::move(values)};
}

AccuracyMatrix AccuracyMatrix::transposed() const {
    std::vector<double> values;
    values.reserve(values_.size());
    for (std::size_t t = 0; t < treatments(); ++t)
        for (std::size_t b = 0; b < blocks(); ++b) values.push_back(at(b, t));
    return {treatment_labels_, block_labels_, std::move(values)};
}

AccuracyMatrix AccuracyMatrix::parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> treatments;
    std::vector<std::string> blocks;
    std::vector<double> values;
    bool header = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (header) {
            if (cells.size() < 2) throw DataError("matrix header needs a block column and at least one treatment");
            treatments.assign(cells.begin() + 1, cells.end());
            header = false;
            continue;
        }
        if (cells.size() != treatments.size() + 1)
            throw DataError("matrix line " + std::to_string(lineno) + ": expected " +
                            std::to_string(treatments.size() + 1) + " cells, got " + std::to_string(cells.size()));
        blocks.push_back(cells[0]);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            char* end = nullptr;
            const double v = std::strtod(cells[i].c_str(), &end);
            if (cells[i].empty() || end != cells[i].c_str() + cells[i].size())
                throw DataError("matrix line " + std::to_string(lineno) + ": '" + cells[i] + "' is not a number");
            values.push_back(v);
        }
    }
    if (header) throw DataError("matrix CSV is empty");
    return {std::move(blocks), std::move(treatments), std::move(values)};
}

AccuracyMatrix AccuracyMatrix::load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read matrix '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::string AccuracyMatrix::to_csv() const {
    std::ostringstream out;
    out << "block";
    for (const auto& t : treatment_labels_) out << ',' << csv_cell(t);
    out << '\n';
    char buf[32];
    for (std::size_t b = 0; b < blocks(); ++b) {
        out << csv_cell(block_labels_[b]);
        for (double v : row(b)) {
            std::snprintf(buf, sizeof buf, "%.6g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

BlockRanks rank_blocks_serial(const AccuracyMatrix& m) {
    BlockRanks r = empty_ranks(m);
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < r.blocks; ++b)
        r.tie_terms[b] = rank_one(m.row(b), {r.ranks.data() + b * r.treatments, r.treatments}, order);
    return r;
}

BlockRanks rank_blocks(const AccuracyMatrix& m) {
    BlockRanks r = empty_ranks(m);
    const auto blocks = static_cast<std::int64_t>(r.blocks);
#pragma omp parallel
    {
        std::vector<std::size_t> order;
#pragma omp for schedule(static)
        for (std::int64_t b = 0; b < blocks; ++b) {
            const auto ub = static_cast<std::size_t>(b);
            r.tie_terms[ub] = rank_one(m.row(ub), {r.ranks.data() + ub * r.treatments, r.treatments}, order);
        }
    }
    return r;
}

std::vector<double> rank_sums_serial(const BlockRanks& r) {
    std::vector<double> sums(r.treatments, 0.0);
    for (std::size_t b = 0; b < r.blocks; ++b)
        for (std::size_t t = 0; t < r.treatments; ++t) sums[t] += r.ranks[b * r.treatments + t];
    return sums;
}

std::vector<double> rank_sums(const BlockRanks& r) {
    // One column per iteration keeps the block summation order of the serial kernel.
    std::vector<double> sums(r.treatments, 0.0);
    const auto treatments = static_cast<std::int64_t>(r.treatments);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < treatments; ++t) {
        double s = 0.0;
        for (std::size_t b = 0; b < r.blocks; ++b) s += r.ranks[b * r.treatments + static_cast<std::size_t>(t)];
        sums[static_cast<std::size_t>(t)] = s;
    }
    return sums;
}

}  // namespace maps::stats
