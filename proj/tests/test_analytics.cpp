// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "maps/analytics.hpp"
#include "support/fixtures.hpp"

using namespace maps;
using namespace maps::stats;
using doctest::Approx;

namespace {

AccuracyMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t k, double grid) {
    std::vector<std::string> bl, tl;
    for (std::size_t b = 0; b < n; ++b) bl.push_back("b" + std::to_string(b));
    for (std::size_t t = 0; t < k; ++t) tl.push_back("t" + std::to_string(t));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v;
    for (std::size_t i = 0; i < n * k; ++i) v.push_back(std::round(u(rng) * grid) / grid);
    return {bl, tl, v};
}

}  // namespace

TEST_CASE("accuracy and mean accuracy") {
    const std::vector<Verdict> v{Verdict::correct, Verdict::incorrect, Verdict::unparseable, Verdict::correct};
    CHECK(accuracy(v) == 0.5);
    CHECK_THROWS_AS(accuracy(std::vector<Verdict>{}), PreconditionError);
    const std::vector<double> runs{0.9, 0.8, 1.0};
    CHECK(mean_accuracy(runs) == Approx(0.9));
    CHECK_THROWS_AS(mean_accuracy(std::vector<double>{}), PreconditionError);
}

TEST_CASE("symbolic loss") {
    CHECK(symbolic_loss(0.761, 0.680) == Approx(-10.644).epsilon(1e-4));
    CHECK(symbolic_loss(0.5, 0.5) == 0.0);
    CHECK(symbolic_loss(0.8, 0.9) > 0.0);
    CHECK(symbolic_loss_absolute(0.761, 0.680) == Approx(0.081));
    CHECK_THROWS_AS(symbolic_loss(0.0, 0.5), PreconditionError);
}

TEST_CASE("cost is exact and additive") {
    const ModelRates rates{Money::parse("0.15"), Money::parse("0.60")};
    CHECK(cost_of({1'000'000, 1'000'000}, rates) == Money::parse("0.75"));
    CHECK(cost_of({1, 1}, rates) == Money::parse("0.00000075"));
    CHECK(cost_of({0, 0}, rates) == Money());

    PriceSheet sheet;
    sheet.set("a", rates);
    sheet.set("b", {Money::parse("2.5"), Money::parse("10")});
    CHECK(cost_of({{"a", {1000, 2000}}, {"b", {3000, 4000}}}, sheet) ==
          cost_of({1000, 2000}, rates) + cost_of({3000, 4000}, sheet.at("b")));
    CHECK_THROWS_AS(cost_of({{"c", {1, 1}}}, sheet), ConfigError);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        TokenUsage x{static_cast<std::int64_t>(rng() % 10'000'000), static_cast<std::int64_t>(rng() % 10'000'000)};
        TokenUsage y{static_cast<std::int64_t>(rng() % 10'000'000), static_cast<std::int64_t>(rng() % 10'000'000)};
        CHECK(cost_of(x + y, rates) == cost_of(x, rates) + cost_of(y, rates));
    }
    CHECK_THROWS_AS(cost_of({std::numeric_limits<std::int64_t>::max() / 2, 0}, rates), DataError);
}

TEST_CASE("nemenyi critical differences") {
    CHECK(nemenyi_q(2) == 1.960);
    CHECK(nemenyi_q(5) == 2.728);
    CHECK(nemenyi_q(10) == 3.164);
    CHECK(nemenyi_q(5, 0.10) == 2.459);
    CHECK(nemenyi_cd(5, 48) == Approx(0.880).epsilon(0.01));
    CHECK(nemenyi_cd(8, 5) == Approx(4.695).epsilon(0.001));
    CHECK_THROWS_AS(nemenyi_q(1), PreconditionError);
    CHECK_THROWS_AS(nemenyi_q(21), PreconditionError);
    CHECK_THROWS_AS(nemenyi_q(5, 0.01), PreconditionError);
    CHECK_THROWS_AS(nemenyi_cd(5, 0), PreconditionError);
    for (std::size_t k = 3; k <= 20; ++k) CHECK(nemenyi_q(k) > nemenyi_q(k - 1));
}

TEST_CASE("friedman on a small hand-checked matrix") {
    // Ranks per block: (1, 2, 3), (1, 3, 2), (1, 2, 3), (2, 1, 3); sums 5, 8, 11.
    const AccuracyMatrix m({"a", "b", "c", "d"}, {"x", "y", "z"},
                           {0.9, 0.5, 0.1, 0.8, 0.2, 0.4, 0.7, 0.6, 0.3, 0.5, 0.6, 0.2});
    const auto f = friedman(m);
    CHECK(f.statistic == Approx(4.5));
    CHECK(f.statistic_tie_corrected == Approx(4.5));
    CHECK(f.p_value == Approx(0.105399).epsilon(1e-5));
}

TEST_CASE("friedman on the published p2 table") {
    const auto f = friedman(fixtures::p2_matrix());
    CHECK(f.treatments == 8);
    CHECK(f.blocks == 5);
    CHECK(f.statistic == Approx(30.75).epsilon(1e-4));
    CHECK(f.statistic_tie_corrected == Approx(30.897).epsilon(1e-3));
    CHECK(f.p_value < 1e-3);
}

TEST_CASE("friedman degenerate inputs") {
    const AccuracyMatrix tied({"a", "b"}, {"x", "y", "z"}, {0.5, 0.5, 0.5, 0.2, 0.2, 0.2});
    const auto f = friedman(tied);
    CHECK(f.statistic == 0.0);
    CHECK(f.p_value == 1.0);
    CHECK(f.statistic_tie_corrected == 0.0);
    CHECK(f.p_value_tie_corrected == 1.0);
    CHECK_THROWS_AS(friedman(AccuracyMatrix({"a", "b"}, {"x"}, {0.1, 0.2})), PreconditionError);
    CHECK_THROWS_AS(friedman(AccuracyMatrix({"a"}, {"x", "y"}, {0.1, 0.2})), PreconditionError);
}

TEST_CASE("tied blocks can be dropped") {
    const auto full = fixtures::strategy_matrix();
    const auto dropped = full.without_tied_blocks();
    CHECK(full.blocks() == 48);
    CHECK(dropped.blocks() == 46);  // two all-zero AIME rows
    CHECK(friedman(dropped).p_value_tie_corrected < 1e-20);
}

TEST_CASE("mean ranks order and tie-breaking") {
    const AccuracyMatrix m({"a", "b"}, {"z", "y", "x"}, {0.5, 0.5, 0.1, 0.5, 0.5, 0.1});
    const auto r = mean_ranks(m);
    CHECK(r[0].label == "y");
    CHECK(r[0].mean_rank == 1.5);
    CHECK(r[1].label == "z");
    CHECK(r[2].label == "x");
    CHECK(r[2].mean_rank == 3.0);
}

TEST_CASE("rank summary flags significant pairs and cliques") {
    const auto s = rank_summary(fixtures::p2_matrix());
    CHECK(s.critical_difference == Approx(4.695).epsilon(0.001));
    CHECK(s.ranking.front().label == "gpt-4o");
    CHECK(s.ranking.back().label == "llama-3.1-8b");
    // gpt-4o (1.2) vs llama-8b (8.0) differ by more than the CD.
    CHECK(s.significant[0][7]);
    CHECK_FALSE(s.significant[0][1]);
    CHECK_FALSE(s.cliques.empty());
    for (const auto& clique : s.cliques) CHECK(clique.size() >= 2);
    CHECK(s.cliques.front().front() == "gpt-4o");
}

TEST_CASE("parallel rank kernels match the serial reference bit for bit") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_matrix(rng, 1 + rng() % 200, 2 + rng() % 12, trial % 2 ? 10.0 : 1000.0);
        const auto serial = rank_blocks_serial(m);
        const auto parallel = rank_blocks(m);
        CHECK(serial.ranks == parallel.ranks);
        CHECK(serial.tie_terms == parallel.tie_terms);
        CHECK(rank_sums_serial(serial) == rank_sums(parallel));
    }
}

TEST_CASE("ranks within a block sum to k(k+1)/2 and ties share the average") {
    std::mt19937_64 rng(4);
    const auto m = random_matrix(rng, 40, 7, 4.0);
    const auto r = rank_blocks(m);
    for (std::size_t b = 0; b < r.blocks; ++b) {
        double sum = 0.0;
        for (std::size_t t = 0; t < r.treatments; ++t) sum += r.ranks[b * r.treatments + t];
        CHECK(sum == 28.0);
        for (std::size_t t = 0; t < r.treatments; ++t)
            for (std::size_t u = 0; u < r.treatments; ++u)
                if (m.at(b, t) == m.at(b, u)) CHECK(r.ranks[b * r.treatments + t] == r.ranks[b * r.treatments + u]);
    }
}

TEST_CASE("matrix csv round trip and validation") {
    const auto m = fixtures::p2_matrix();
    const auto back = AccuracyMatrix::parse_csv(m.to_csv());
    CHECK(back.block_labels() == m.block_labels());
    CHECK(back.treatment_labels() == m.treatment_labels());
    CHECK(back.values() == m.values());
    CHECK(AccuracyMatrix::parse_csv("block,\"a,b\",c\nr1,0.1,0.2\n").treatment_labels()[0] == "a,b");
    CHECK_THROWS_AS(AccuracyMatrix::parse_csv(""), DataError);
    CHECK_THROWS_AS(AccuracyMatrix::parse_csv("block,a,b\nr1,0.1\n"), DataError);
    CHECK_THROWS_AS(AccuracyMatrix::parse_csv("block,a,b\nr1,0.1,x\n"), DataError);
    CHECK_THROWS_AS(AccuracyMatrix::parse_csv("block,a,b\nr1,0.1,1.5\n"), DataError);
    CHECK(m.transposed().blocks() == 8);
    CHECK(m.transposed().at(7, 4) == m.at(4, 7));
}
