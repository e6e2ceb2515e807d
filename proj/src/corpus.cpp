// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "maps/answer_codec.hpp"

namespace maps {

namespace {

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    return {};
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 20) {
    std::string out;
    for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    if (items.size() > limit) out += ", ... (" + std::to_string(items.size()) + " total)";
    return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

Corpus parse_corpus(std::string_view jsonl, const std::string& dataset, Variant variant, const std::string& source_path) {
    Corpus corpus;
    corpus.manifest = {dataset, variant, source_path, 0, sha256_hex(jsonl)};

    std::vector<std::string> missing_gold;
    std::vector<std::string> duplicates;
    std::set<std::string> seen;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(source_path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.is_object()) throw DataError(source_path + " line " + std::to_string(lineno) + ": not an object");

        Question q;
        q.dataset = dataset;
        q.variant = variant;
        for (const char* key : {"question", "problem"}) {
            if (rec.contains(key) && rec[key].is_string()) {
                q.body = rec[key].get<std::string>();
                break;
            }
        }
        if (q.body.empty()) throw DataError(source_path + " line " + std::to_string(lineno) + ": no problem text");

        if (rec.contains("id")) {
            q.id = scalar_text(rec["id"]);
            if (rec.contains("instance")) q.id += "-" + scalar_text(rec["instance"]);
        } else if (rec.contains("unique_id")) {
            q.id = scalar_text(rec["unique_id"]);
        }
        if (q.id.empty()) q.id = "q-" + sha256_hex(q.body).substr(0, 16);

        std::optional<GoldAnswer> gold;
        if (rec.contains("answer")) {
            const std::string answer = scalar_text(rec["answer"]);
            const auto raw = is_gsm_family(variant) ? codec::extract_hash_marker(answer) : std::optional(answer);
            if (raw) gold = codec::normalize(*raw);
        }
        if (!gold) {
            missing_gold.push_back(q.id);
            continue;
        }
        q.gold = *gold;
        if (!seen.insert(q.id).second) {
            duplicates.push_back(q.id);
            continue;
        }
        corpus.questions.push_back(std::move(q));
    }
    if (!missing_gold.empty())
        throw DataError(source_path + ": missing or unparseable gold answer for " + join(missing_gold));
    if (!duplicates.empty()) throw DataError(source_path + ": duplicate question ids " + join(duplicates));
    corpus.manifest.record_count = corpus.questions.size();
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const std::string& dataset, Variant variant) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read corpus '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str(), dataset, variant, path.string());
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t child_seed(std::uint64_t seed, int run) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(run + 1));
}

std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng) {
    if (bound == 0) throw PreconditionError("uniform_below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

std::vector<std::vector<std::string>> draw_samples(const std::vector<Question>& corpus, const SamplePlan& plan) {
    if (plan.runs < 1) throw ConfigError("sample plan needs at least one run");
    if (plan.sample_size > corpus.size())
        throw ConfigError("sample size " + std::to_string(plan.sample_size) + " exceeds corpus size " +
                          std::to_string(corpus.size()));
    std::vector<std::string> sorted;
    sorted.reserve(corpus.size());
    for (const Question& q : corpus) sorted.push_back(q.id);
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::vector<std::string>> runs;
    runs.reserve(static_cast<std::size_t>(plan.runs));
    for (int r = 0; r < plan.runs; ++r) {
        std::vector<std::string> ids = sorted;
        std::mt19937_64 rng(child_seed(plan.seed, r));
        for (std::size_t i = 0; i < plan.sample_size; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_below(ids.size() - i, rng));
            std::swap(ids[i], ids[j]);
        }
        ids.resize(plan.sample_size);
        runs.push_back(std::move(ids));
    }
    return runs;
}

FullSetPlan full_set_plan(const Corpus& corpus, std::uint64_t seed) {
    FullSetPlan out;
    out.plan = {1, corpus.questions.size(), seed};
    if (is_gsm_family(corpus.manifest.variant))
        out.warning = std::string(to_string(corpus.manifest.variant)) +
                      " is normally evaluated on five random samples of 100 questions; a full-set run deviates "
                      "from that protocol";
    return out;
}

}  // namespace maps
