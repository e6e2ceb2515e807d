// Copyright (C) 2026 MAPS harness contributors
// SPDX-License-Identifier: Apache-2.0

#include "maps/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "maps/analytics.hpp"
#include "maps/prompt_forge.hpp"
#include "maps/strategy_engine.hpp"

namespace maps {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Assumed per-call usage for the live-run cost projection when the log has no history yet.
constexpr TokenUsage kDefaultCallUsage{1500, 400};

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

StrategyEntry parse_strategy_entry(const json& j) {
    StrategyEntry e;
    const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    auto k = parse_strategy_kind(kind);
    if (!k) throw ConfigError("unknown strategy kind '" + kind + "' (expected Baseline, CoT, SR or MAPS)");
    e.kind = *k;
    if (j.is_object()) {
        require_keys(j, {"kind", "max_layers"}, "strategy");
        e.max_layers = j.value("max_layers", -1);
    }
    return e;
}

TemplateSet templates_for(const ExperimentConfig& c) {
    return c.templates_dir ? TemplateSet::load(*c.templates_dir, c.template_version) : TemplateSet::builtin();
}

std::vector<Exemplar> exemplars_for(const ExperimentConfig& c) {
    return c.exemplars ? load_exemplars(*c.exemplars) : builtin_exemplars();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        const json j = json::parse(json_text);
        require_keys(j,
                     {"name", "output_dir", "price_sheet", "sampling", "parallel", "template_version", "templates_dir",
                      "exemplars", "decoding", "layer_cap", "datasets", "models", "strategies"},
                     "config");
        c.name = j.value("name", c.name);
        c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        c.price_sheet = resolve(base_dir, j.at("price_sheet").get<std::string>());
        if (j.contains("sampling")) {
            const auto& s = j["sampling"];
            require_keys(s, {"runs", "sample_size", "seed"}, "sampling");
            c.sampling.runs = s.value("runs", c.sampling.runs);
            c.sampling.sample_size = s.value("sample_size", c.sampling.sample_size);
            c.sampling.seed = s.value("seed", c.sampling.seed);
        }
        c.parallel = j.value("parallel", c.parallel);
        c.template_version = j.value("template_version", c.template_version);
        if (j.contains("templates_dir")) c.templates_dir = resolve(base_dir, j["templates_dir"].get<std::string>());
        if (j.contains("exemplars")) c.exemplars = resolve(base_dir, j["exemplars"].get<std::string>());
        if (j.contains("decoding")) {
            const auto& d = j["decoding"];
            require_keys(d, {"temperature", "top_p"}, "decoding");
            c.decoding.temperature = d.value("temperature", c.decoding.temperature);
            c.decoding.top_p = d.value("top_p", c.decoding.top_p);
        }
        c.layer_cap = j.value("layer_cap", c.layer_cap);

        for (const auto& d : j.at("datasets")) {
            require_keys(d, {"id", "variant", "path", "full_set"}, "dataset");
            DatasetEntry e;
            e.id = d.at("id").get<std::string>();
            const auto variant = d.at("variant").get<std::string>();
            auto v = parse_variant(variant);
            if (!v) throw ConfigError("dataset '" + e.id + "': unknown variant '" + variant + "'");
            e.variant = *v;
            e.path = resolve(base_dir, d.at("path").get<std::string>());
            e.full_set = d.value("full_set", !is_gsm_family(e.variant));
            c.datasets.push_back(std::move(e));
        }
        for (const auto& m : j.at("models")) {
            require_keys(m,
                         {"id", "provider", "script", "base_url", "api_key_env", "timeout_s", "max_retries",
                          "backoff_base_ms", "jitter", "max_in_flight"},
                         "model");
            ModelEntry e;
            e.id = m.at("id").get<std::string>();
            e.provider = m.value("provider", e.provider);
            if (m.contains("script")) e.script = resolve(base_dir, m["script"].get<std::string>());
            e.http.model_id = e.id;
            e.http.base_url = m.value("base_url", std::string{});
            e.http.api_key_env = m.value("api_key_env", e.http.api_key_env);
            e.http.timeout_s = m.value("timeout_s", e.http.timeout_s);
            e.http.retry.max_retries = m.value("max_retries", e.http.retry.max_retries);
            e.http.retry.backoff_base = std::chrono::milliseconds(m.value("backoff_base_ms", std::int64_t{500}));
            e.http.retry.jitter = m.value("jitter", e.http.retry.jitter);
            e.http.max_in_flight = m.value("max_in_flight", e.http.max_in_flight);
            c.models.push_back(std::move(e));
        }
        for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy_entry(s));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    return parse(read_text(file), std::filesystem::absolute(file).parent_path());
}

std::vector<std::string> ExperimentConfig::problems(const PriceSheet& prices) const {
    std::vector<std::string> out;
    if (datasets.empty()) out.emplace_back("no datasets configured");
    if (models.empty()) out.emplace_back("no models configured");
    if (strategies.empty()) out.emplace_back("no strategies configured");
    if (parallel < 1) out.emplace_back("parallel must be >= 1");
    if (sampling.runs < 1) out.emplace_back("sampling.runs must be >= 1");
    if (!(decoding.temperature >= 0.0)) out.emplace_back("temperature must be >= 0");
    if (!(decoding.top_p > 0.0 && decoding.top_p <= 1.0)) out.emplace_back("top_p must be in (0, 1]");
    if (!templates_dir && template_version != "v1")
        out.push_back("template version '" + template_version + "' needs templates_dir (only v1 is built in)");

    std::set<std::string> ids;
    for (const auto& d : datasets)
        if (!ids.insert(d.id).second) out.push_back("duplicate dataset id '" + d.id + "'");
    ids.clear();
    for (const auto& m : models) {
        if (!ids.insert(m.id).second) out.push_back("duplicate model id '" + m.id + "'");
        if (!prices.contains(m.id)) out.push_back("model '" + m.id + "' has no price entry");
        if (m.provider == "scripted") {
            if (m.script.empty()) out.push_back("model '" + m.id + "' uses the scripted provider but has no script");
        } else if (m.provider == "http") {
            for (const auto& p : m.http.problems()) out.push_back("model '" + m.id + "': " + p);
        } else {
            out.push_back("model '" + m.id + "': unknown provider '" + m.provider + "'");
        }
    }
    std::set<std::string> labels;
    for (const auto& s : strategies) {
        if (s.kind == StrategyKind::MAPS) {
            const int layers = s.max_layers < 0 ? kDefaultLayerCap : s.max_layers;
            if (layers < 1 || layers > layer_cap)
                out.push_back("MAPS max_layers " + std::to_string(layers) + " outside 1.." + std::to_string(layer_cap));
        } else if (s.max_layers >= 0) {
            const int expected = s.kind == StrategyKind::SR ? 1 : 0;
            if (s.max_layers != expected)
                out.push_back(std::string(to_string(s.kind)) + " has a fixed layer count of " + std::to_string(expected));
        }
        const std::string label = StrategySpec{s.kind, s.max_layers < 0 && s.kind == StrategyKind::MAPS ? kDefaultLayerCap
                                                                                                         : std::max(0, s.max_layers),
                                               {}, false}
                                      .label();
        if (!labels.insert(label).second) out.push_back("duplicate strategy '" + label + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Planning

LoadedExperiment plan_experiment(const ExperimentConfig& config) {
    LoadedExperiment ex;
    const std::vector<Exemplar> exemplars = exemplars_for(config);
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        const DatasetEntry& entry = config.datasets[d];
        ex.corpora.push_back(load_corpus(entry.path, entry.id, entry.variant));
        const Corpus& corpus = ex.corpora.back();
        SamplePlan plan = config.sampling;
        if (entry.full_set) plan = full_set_plan(corpus, config.sampling.seed).plan;
        ex.samples.push_back(draw_samples(corpus.questions, plan));

        std::vector<StrategySpec> specs;
        for (const StrategyEntry& s : config.strategies) {
            StrategySpec spec = make_strategy(s.kind, entry.variant, exemplars, s.max_layers);
            if (auto p = check_strategy(spec, entry.variant, config.layer_cap); !p.empty())
                throw ConfigError("strategy " + spec.label() + " on dataset '" + entry.id + "': " + p.front());
            specs.push_back(std::move(spec));
        }
        ex.strategies.push_back(std::move(specs));

        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < corpus.questions.size(); ++i) index.emplace(corpus.questions[i].id, i);
        for (std::size_t m = 0; m < config.models.size(); ++m)
            for (std::size_t s = 0; s < config.strategies.size(); ++s)
                for (std::size_t r = 0; r < ex.samples[d].size(); ++r)
                    for (const std::string& qid : ex.samples[d][r]) {
                        PlannedAttempt a;
                        a.key = {entry.id, entry.variant, config.models[m].id, ex.strategies[d][s].label(),
                                 static_cast<int>(r), qid};
                        a.dataset_index = d;
                        a.model_index = m;
                        a.strategy_index = s;
                        a.question_index = index.at(qid);
                        ex.grid.push_back(std::move(a));
                    }
    }
    return ex;
}

std::string sample_listing(const ExperimentConfig& config) {
    const LoadedExperiment ex = plan_experiment(config);
    ojson out;
    out["seed"] = config.sampling.seed;
    auto datasets = ojson::array();
    for (std::size_t d = 0; d < ex.corpora.size(); ++d) {
        ojson entry;
        entry["dataset"] = config.datasets[d].id;
        entry["variant"] = std::string(to_string(config.datasets[d].variant));
        entry["sha256"] = ex.corpora[d].manifest.sha256;
        entry["runs"] = ex.samples[d];
        datasets.push_back(std::move(entry));
    }
    out["datasets"] = std::move(datasets);
    return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Execution

namespace {

ojson build_manifest(const ExperimentConfig& config, const LoadedExperiment& ex) {
    const TemplateSet templates = templates_for(config);
    ojson m;
    m["schema_version"] = std::string(kRunLogSchemaVersion);
    m["name"] = config.name;
    m["sampling"] = {{"runs", config.sampling.runs}, {"sample_size", config.sampling.sample_size},
                     {"seed", config.sampling.seed}};
    m["decoding"] = {{"temperature", config.decoding.temperature}, {"top_p", config.decoding.top_p}};
    m["templates"] = {{"version", templates.version},
                      {"meta_prompt_sha256", sha256_hex(templates.meta_prompt)},
                      {"static_reflection_sha256", sha256_hex(templates.static_reflection)},
                      {"reflection_sha256", sha256_hex(templates.reflection)}};
    std::string exemplar_bytes;
    for (const Exemplar& e : exemplars_for(config)) exemplar_bytes += e.problem + '\x1f' + e.solution + '\x1e';
    m["exemplars_sha256"] = sha256_hex(exemplar_bytes);
    auto corpora = ojson::array();
    for (std::size_t d = 0; d < ex.corpora.size(); ++d) {
        const CorpusManifest& cm = ex.corpora[d].manifest;
        std::string sample_bytes;
        for (const auto& run : ex.samples[d])
            for (const auto& id : run) sample_bytes += id + '\n';
        corpora.push_back({{"dataset", cm.dataset},
                           {"variant", std::string(to_string(cm.variant))},
                           {"full_set", config.datasets[d].full_set},
                           {"record_count", cm.record_count},
                           {"sha256", cm.sha256},
                           {"runs", ex.samples[d].size()},
                           {"samples_sha256", sha256_hex(sample_bytes)}});
    }
    m["corpora"] = std::move(corpora);
    auto models = ojson::array();
    for (const auto& model : config.models) models.push_back({{"id", model.id}, {"provider", model.provider}});
    m["models"] = std::move(models);
    auto strategies = ojson::array();
    for (const auto& s : ex.strategies.front()) strategies.push_back(s.label());
    m["strategies"] = std::move(strategies);
    return m;
}

std::shared_ptr<Provider> default_provider(const ModelEntry& entry, bool live) {
    if (entry.provider == "scripted")
        return std::shared_ptr<Provider>(ScriptedProvider::load(entry.id, entry.script.string()));
    if (!live)
        throw ConfigError("model '" + entry.id + "' uses a live HTTP provider; pass --live to allow paid API calls");
    return std::shared_ptr<Provider>(HttpProvider::from_environment(entry.http));
}

// Worst-case calls per attempt times the average usage per call seen so far.
Money project_cost(const ExperimentConfig& config, const LoadedExperiment& ex,
                   const std::vector<const PlannedAttempt*>& pending, const std::vector<AttemptTrace>& history,
                   const PriceSheet& prices) {
    std::map<std::string, std::pair<TokenUsage, std::int64_t>> seen;  // model -> (usage, calls)
    for (const AttemptTrace& t : history) {
        auto& [usage, calls] = seen[t.model_id];
        usage += t.total_usage;
        calls += provider_call_count(t.strategy, static_cast<int>(t.layers.size()) - 1);
    }
    Money total;
    for (const PlannedAttempt* a : pending) {
        const ModelEntry& model = config.models[a->model_index];
        if (model.provider != "http") continue;
        TokenUsage per_call = kDefaultCallUsage;
        if (auto it = seen.find(model.id); it != seen.end() && it->second.second > 0)
            per_call = {it->second.first.prompt_tokens / it->second.second,
                        it->second.first.completion_tokens / it->second.second};
        const StrategySpec& spec = ex.strategies[a->dataset_index][a->strategy_index];
        const std::int64_t calls = provider_call_count(spec, spec.max_layers);
        total += stats::cost_of({per_call.prompt_tokens * calls, per_call.completion_tokens * calls}, prices.at(model.id));
    }
    return total;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const PriceSheet prices = PriceSheet::load_csv(config.price_sheet.string());
    if (auto p = config.problems(prices); !p.empty()) throw ConfigError(join(p, "; "));

    const LoadedExperiment ex = plan_experiment(config);
    const PromptForge forge(templates_for(config));
    const StrategyEngine engine(forge);

    RunSummary summary;
    summary.log_dir = config.output_dir;
    summary.planned = ex.grid.size();
    std::filesystem::create_directories(config.output_dir);

    const auto manifest_path = config.output_dir / "manifest.json";
    const ojson manifest = build_manifest(config, ex);
    if (std::filesystem::exists(manifest_path)) {
        const ojson existing = ojson::parse(read_text(manifest_path));
        if (existing != manifest)
            throw ConfigError("output directory '" + config.output_dir.string() +
                              "' holds a run with different data, seeds, templates or grid; use a fresh directory");
    } else {
        std::ofstream(manifest_path, std::ios::binary) << manifest.dump(2) << "\n";
    }

    const auto log_path = config.output_dir / "traces.jsonl";
    repair_torn_tail(log_path);
    const RunLogContents existing = read_run_log(log_path);
    std::set<RunKey> done;
    for (const AttemptTrace& t : existing.traces) done.insert(key_of(t));

    std::vector<const PlannedAttempt*> pending;
    for (const PlannedAttempt& a : ex.grid) {
        if (done.count(a.key)) ++summary.skipped;
        else pending.push_back(&a);
    }

    summary.projected_cost = project_cost(config, ex, pending, existing.traces, prices);
    if (options.live && options.progress)
        *options.progress << "projected cost of " << pending.size() << " attempts: $"
                          << summary.projected_cost.to_string(6) << " (upper bound)\n";
    if (options.live && options.budget && summary.projected_cost > *options.budget)
        throw ConfigError("projected cost $" + summary.projected_cost.to_string(6) + " exceeds the budget of $" +
                          options.budget->to_string(6));

    std::vector<std::shared_ptr<Provider>> providers;
    for (const ModelEntry& m : config.models)
        providers.push_back(options.provider_factory ? options.provider_factory(m) : default_provider(m, options.live));

    EngineConfig base;
    base.decoding = config.decoding;
    base.layer_cap = config.layer_cap;

    RunLogWriter writer(log_path);
    const int threads = std::max(1, options.parallel > 0 ? options.parallel : config.parallel);
    const bool parallel = options.execution == Execution::parallel && threads > 1;
    const std::size_t chunk = parallel ? static_cast<std::size_t>(threads) * 8 : 64;

    for (std::size_t begin = 0; begin < pending.size(); begin += chunk) {
        const std::size_t end = std::min(pending.size(), begin + chunk);
        const auto n = static_cast<std::int64_t>(end - begin);
        std::vector<std::optional<AttemptTrace>> results(end - begin);
        std::vector<std::string> errors(end - begin);
        std::vector<bool> fatal(end - begin, false);

        auto run_one = [&](std::int64_t i) {
            const PlannedAttempt& a = *pending[begin + static_cast<std::size_t>(i)];
            const ModelEntry& model = config.models[a.model_index];
            EngineConfig cfg = base;
            cfg.spec = ex.strategies[a.dataset_index][a.strategy_index];
            const Question& q = ex.corpora[a.dataset_index].questions[a.question_index];
            try {
                AttemptTrace t = engine.run_attempt(q, cfg, *providers[a.model_index], a.key.run_index, a.key.to_string());
                t.model_id = model.id;
                t.dataset = a.key.dataset;
                t.total_cost_usd = stats::cost_of(t.total_usage, prices.at(model.id));
                results[static_cast<std::size_t>(i)] = std::move(t);
            } catch (const ProviderFailure& e) {
                errors[static_cast<std::size_t>(i)] = a.key.to_string() + ": " + e.what();
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = a.key.to_string() + ": " + e.what();
                fatal[static_cast<std::size_t>(i)] = true;
            }
        };

        if (parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
            for (std::int64_t i = 0; i < n; ++i) run_one(i);
        } else {
            for (std::int64_t i = 0; i < n; ++i) run_one(i);
        }

        // Appends in grid order regardless of completion order.
        std::string first_fatal;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i]) {
                writer.append(*results[i]);
                ++summary.completed;
            } else {
                ++summary.failed;
                summary.failures.push_back(errors[i]);
                if (fatal[i] && first_fatal.empty()) first_fatal = errors[i];
            }
        }
        if (!first_fatal.empty()) throw Error(first_fatal);
        if (options.progress)
            *options.progress << "[" << config.name << "] " << (summary.skipped + summary.completed + summary.failed)
                              << "/" << summary.planned << " attempts processed, " << summary.failed << " failed\n";
    }
    return summary;
}

}  // namespace maps
