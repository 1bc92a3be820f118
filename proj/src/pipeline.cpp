// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/features.hpp>
#include <txlens/pipeline.hpp>
#include <txlens/prompt.hpp>
#include <txlens/threat_db.hpp>
#include <txlens/ui_features.hpp>

namespace txlens {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::kConfig:
            return "config";
        case Stage::kIngest:
            return "ingest";
        case Stage::kEnrich:
            return "enrich";
        case Stage::kFeatures:
            return "features";
        case Stage::kDatabase:
            return "database";
        case Stage::kLlm:
            return "llm";
        case Stage::kConsensus:
            return "consensus";
        case Stage::kReport:
            return "report";
    }
    return "config";
}

int exit_code_for(Stage stage) noexcept { return 10 + static_cast<int>(stage); }

int exit_code_for(RiskLabel label) noexcept {
    switch (label) {
        case RiskLabel::kSafe:
            return 0;
        case RiskLabel::kSuspicious:
            return 1;
        case RiskLabel::kMalicious:
            return 2;
    }
    return 2;
}

namespace {

    struct StageFailure {
        Stage stage;
        std::string message;
    };

    //! Runs fn, rethrowing any exception as a StageFailure tagged with `stage`
    template <typename Fn>
    auto in_stage(Stage stage, Fn&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const StageFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw StageFailure{stage, e.what()};
        }
    }

    std::string file_label(const std::string& reference) {
        std::string out;
        for (char c : reference) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_';
        return out.empty() ? "report" : out;
    }

    TracedTx ingest(const RunConfig& cfg, const AnalysisTarget& target) {
        if (target.call) return simulate_call(cfg.trace_source, *target.call);
        return fetch_trace(cfg.trace_source, target.tx_reference);
    }

    std::vector<ModelOutput> initial_round(const RunConfig& cfg, const Prompt& prompt, std::vector<std::size_t>& indices,
                                           std::vector<std::string>& warnings) {
        std::vector<std::future<ModelOutput>> pending;
        for (const auto& backend : cfg.backends)
            pending.push_back(std::async(std::launch::async, [&backend, &prompt, &cfg] {
                return ask(backend, prompt, 0, cfg.model_timeout);
            }));
        std::vector<ModelOutput> outputs;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            try {
                outputs.push_back(pending[i].get());
                indices.push_back(i);
            } catch (const std::exception& e) {
                warnings.push_back("model " + cfg.backends[i].id + " failed in round 0: " + e.what());
            }
        }
        if (outputs.size() < 2)
            throw ConsensusError("only " + std::to_string(outputs.size()) + " of " + std::to_string(cfg.backends.size()) +
                                 " model(s) produced a valid analysis");
        return outputs;
    }

}  // namespace

AnalysisOutcome run_analysis(const RunConfig& cfg, const AnalysisTarget& target) {
    AnalysisOutcome outcome;
    try {
        in_stage(Stage::kConfig, [&] {
            if (cfg.backends.size() < 2) throw ConfigError("at least two model backends are required");
            if (cfg.consensus.n != 0 && cfg.consensus.n != cfg.backends.size())
                throw ConfigError("consensus expects " + std::to_string(cfg.consensus.n) + " models, " +
                                  std::to_string(cfg.backends.size()) + " configured");
            if (!cfg.consensus.primary_model.empty()) {
                bool known = false;
                for (const auto& b : cfg.backends) known = known || b.id == cfg.consensus.primary_model;
                if (!known) throw ConfigError("primary model '" + cfg.consensus.primary_model + "' is not configured");
            }
            if (cfg.mode == RunMode::kHistorical && target.tx_reference.empty())
                throw ConfigError("historical mode requires a transaction reference");
            if (cfg.mode == RunMode::kSimulate && !target.call) throw ConfigError("simulate mode requires a call");
            return 0;
        });

        TracedTx traced = in_stage(Stage::kIngest, [&] { return ingest(cfg, target); });

        in_stage(Stage::kEnrich, [&] {
            std::unique_ptr<ExplorerClient> explorer;
            std::unique_ptr<DecompilerClient> decompiler;
            if (cfg.explorer_url) explorer = make_etherscan_client(*cfg.explorer_url, cfg.explorer_key);
            if (cfg.decompiler_command) decompiler = make_command_decompiler(*cfg.decompiler_command);
            if (!explorer && !decompiler) return 0;
            auto enriched = enrich_code_snippets(traced.trace, explorer.get(), decompiler.get());
            traced.trace = std::move(enriched.trace);
            for (auto& w : enriched.warnings) outcome.warnings.push_back(std::move(w));
            return 0;
        });

        struct Extracted {
            BehaviorFindings behavior;
            GasContextFindings context;
            UIFindings ui;
        };
        Extracted ex = in_stage(Stage::kFeatures, [&] {
            SlotHints hints;
            if (cfg.slot_hints) hints = load_slot_hints(*cfg.slot_hints);
            return Extracted{extract_behavior(traced.trace, hints), extract_gas_context(traced.tx, traced.trace),
                             extract_ui_features(traced.tx)};
        });

        auto hits = in_stage(Stage::kDatabase, [&] {
            const ThreatDB db = load_db(cfg.db_paths);
            return query_all(db, traced.tx, traced.trace, ex.ui);
        });

        const FeatureVector fv = in_stage(Stage::kFeatures, [&] {
            std::optional<DimensionWeights> weights;
            if (cfg.weight_config) weights = load_weight_config(*cfg.weight_config);
            return assemble_feature_vector(std::move(ex.behavior), std::move(ex.context), std::move(ex.ui), hits, weights);
        });

        const Prompt base = build_prompt(fv, fv.database, cfg.section_budget);

        std::vector<std::size_t> indices;
        auto initial = in_stage(Stage::kLlm, [&] { return initial_round(cfg, base, indices, outcome.warnings); });

        ConsensusConfig ccfg = cfg.consensus;
        if (ccfg.primary_model.empty()) ccfg.primary_model = cfg.backends.front().id;
        const ModelBackend* primary = nullptr;
        for (const auto& b : cfg.backends)
            if (b.id == ccfg.primary_model) primary = &b;
        std::atomic<std::size_t> summary_round{0};

        const Reflector reflector = [&](std::size_t model_index, const ModelOutput& own, std::span<const ModelOutput> counters,
                                        std::size_t round) {
            summary_round.store(round);
            const auto prompt = build_reflection_prompt(own, counters, base);
            return ask(cfg.backends[indices[model_index]], prompt, round, cfg.model_timeout);
        };
        const Summarizer summarizer = [&](std::span<const ModelOutput> outputs) {
            return ask(*primary, build_summary_prompt(outputs, base), summary_round.load(), cfg.model_timeout);
        };
        const ConsensusResult result =
            in_stage(Stage::kConsensus, [&] { return run_consensus(std::move(initial), reflector, summarizer, ccfg); });

        in_stage(Stage::kReport, [&] {
            ReportMeta meta;
            meta.tx_reference = target.tx_reference;
            meta.tool_version = cfg.tool_version;
            meta.timestamp = cfg.fixed_timestamp.value_or(
                std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now()));
            outcome.report = build_report(result, fv, meta);
            const auto doc = report_to_json(*outcome.report);
            if (auto problems = validate_report(json::parse(doc.dump())); !problems.empty())
                throw SchemaError(problems.front(), "emitted report violates the schema");
            outcome.summary_text = render_summary(*outcome.report);
            if (cfg.write_report) {
                fs::create_directories(cfg.output_dir);
                const auto path = cfg.output_dir / (file_label(target.tx_reference) + ".report.json");
                std::ofstream out(path, std::ios::binary);
                out << doc.dump(2) << "\n";
                if (!out) throw std::runtime_error("cannot write " + path.string());
                outcome.report_path = path;
            }
            return 0;
        });
        outcome.exit_code = exit_code_for(result.decided_label);
    } catch (const StageFailure& f) {
        outcome.failed_stage = f.stage;
        outcome.error = f.message;
        outcome.exit_code = exit_code_for(f.stage);
        outcome.report.reset();
    }
    return outcome;
}

// --- configuration ---

std::size_t load_dotenv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return 0;
    std::size_t set = 0;
    for (std::string line; std::getline(in, line);) {
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        line = line.substr(first);
        if (line.starts_with("export ")) line = line.substr(7);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        const auto v0 = value.find_first_not_of(" \t");
        value = v0 == std::string::npos ? std::string{} : value.substr(v0);
        if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
            const char q = value.front();
            const auto close = value.find(q, 1);
            value = value.substr(1, close == std::string::npos ? std::string::npos : close - 1);
        } else {
            if (auto hash = value.find(" #"); hash != std::string::npos) value.resize(hash);
            while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r')) value.pop_back();
        }
        if (key.empty() || std::getenv(key.c_str())) continue;
        ::setenv(key.c_str(), value.c_str(), 0);
        ++set;
    }
    return set;
}

namespace {

    std::optional<std::string> env(const std::string& key) {
        const char* v = std::getenv(key.c_str());
        if (!v || !*v) return std::nullopt;
        return std::string{v};
    }

    std::string default_id(std::string_view descriptor) {
        if (descriptor.starts_with("remote:")) {
            const auto at = descriptor.find('@');
            return std::string{descriptor.substr(7, at == std::string_view::npos ? std::string_view::npos : at - 7)};
        }
        if (descriptor.starts_with("scripted:")) return fs::path{std::string{descriptor.substr(9)}}.stem().string();
        return std::string{descriptor};
    }

    std::vector<ModelBackend> build_backends(const std::vector<std::string>& descriptors) {
        std::vector<ModelBackend> out;
        std::set<std::string> ids;
        for (std::size_t i = 0; i < descriptors.size(); ++i) {
            std::string id = default_id(descriptors[i]);
            if (!ids.insert(id).second) {
                id += "#" + std::to_string(i + 1);
                ids.insert(id);
            }
            const auto key = env("MODEL_API_KEY_" + std::to_string(i + 1)).value_or(env("MODEL_API_KEY").value_or(""));
            out.push_back(parse_backend_descriptor(descriptors[i], id, key));
        }
        return out;
    }

}  // namespace

std::vector<ModelBackend> backends_from_env() {
    std::vector<std::string> descriptors;
    if (auto n = env("MODEL_N")) {
        std::size_t count = 0;
        try {
            count = std::stoul(*n);
        } catch (const std::exception&) {
            throw ConfigError("MODEL_N must be a positive integer");
        }
        for (std::size_t i = 1; i <= count; ++i) {
            auto d = env("MODEL_" + std::to_string(i));
            if (!d) throw ConfigError("MODEL_" + std::to_string(i) + " is not set");
            descriptors.push_back(*d);
        }
    } else {
        for (std::size_t i = 1;; ++i) {
            auto d = env("MODEL_" + std::to_string(i));
            if (!d) break;
            descriptors.push_back(*d);
        }
    }
    return build_backends(descriptors);
}

std::vector<ModelBackend> backends_from_spec(const std::string& spec) {
    std::vector<std::string> descriptors;
    std::stringstream in(spec);
    for (std::string item; std::getline(in, item, ',');)
        if (!item.empty()) descriptors.push_back(item);
    return build_backends(descriptors);
}

// --- evaluation ---

std::vector<EvalCase> load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open case manifest " + path.string());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw ConfigError("case manifest must be a JSON array");
    std::vector<EvalCase> cases;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("fixture") || !item["fixture"].is_string() || !item.contains("ground_truth"))
            throw ConfigError("manifest entries need fixture and ground_truth");
        EvalCase c;
        c.fixture = item["fixture"].get<std::string>();
        if (c.fixture.is_relative()) c.fixture = path.parent_path() / c.fixture;
        const auto truth = item["ground_truth"].get<std::string>();
        if (truth == "PHISHING") {
            c.ground_truth = GroundTruth::kPhishing;
        } else if (truth == "BENIGN") {
            c.ground_truth = GroundTruth::kBenign;
        } else {
            throw ConfigError("unknown ground_truth '" + truth + "'");
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

ConfusionCounts count_outcomes(const std::vector<EvalCase>& cases, const std::vector<CaseResult>& results) {
    if (cases.size() != results.size()) throw PreconditionError("count_outcomes: one result per case is required");
    ConfusionCounts c;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const bool phishing = cases[i].ground_truth == GroundTruth::kPhishing;
        if (!results[i]) {
            if (phishing) {
                ++c.fn;
            } else {
                ++c.excluded;
            }
            continue;
        }
        const bool flagged = *results[i] != RiskLabel::kSafe;
        if (phishing) {
            ++(flagged ? c.tp : c.fn);
        } else {
            ++(flagged ? c.fp : c.tn);
        }
    }
    return c;
}

RunMetrics metrics_from_counts(const ConfusionCounts& counts) {
    RunMetrics m;
    m.counts = counts;
    const auto tp = static_cast<double>(counts.tp);
    m.precision = counts.tp + counts.fp == 0 ? 0.0 : tp / static_cast<double>(counts.tp + counts.fp);
    m.recall = counts.tp + counts.fn == 0 ? 0.0 : tp / static_cast<double>(counts.tp + counts.fn);
    m.f1 = m.precision + m.recall == 0 ? 0.0 : 2 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    // deviations from the first value, so identical runs give exactly that value and a spread of 0
    const double shift = values.front();
    const double n = static_cast<double>(values.size());
    double sum = 0;
    for (double v : values) sum += v - shift;
    const double mean_dev = sum / n;
    out.mean = shift + mean_dev;
    double sq = 0;
    for (double v : values) sq += (v - shift - mean_dev) * (v - shift - mean_dev);
    out.std = std::sqrt(sq / n);
    return out;
}

EvalMetrics run_eval(const std::vector<EvalCase>& cases, std::size_t runs, const RunConfig& cfg) {
    if (runs == 0) throw PreconditionError("run_eval: runs must be at least 1");
    EvalMetrics metrics;
    const std::size_t workers = std::max<std::size_t>(1, cfg.workers);

    for (std::size_t run = 0; run < runs; ++run) {
        std::vector<CaseResult> results(cases.size());
        std::vector<std::string> errors(cases.size());
        auto analyze_case = [&](std::size_t i) {
            RunConfig case_cfg = cfg;
            case_cfg.mode = RunMode::kHistorical;
            case_cfg.trace_source = {TraceSource::Kind::kFixtureFile, cases[i].fixture.string(), std::nullopt};
            case_cfg.write_report = false;
            const auto outcome = run_analysis(case_cfg, {cases[i].fixture.stem().string(), std::nullopt});
            if (outcome.report) {
                results[i] = outcome.report->decided_label;
            } else {
                errors[i] = "stage " + std::string{to_string(*outcome.failed_stage)} + ": " + outcome.error;
            }
        };
        for (std::size_t start = 0; start < cases.size(); start += workers) {
            std::vector<std::future<void>> batch;
            for (std::size_t i = start; i < std::min(cases.size(), start + workers); ++i)
                batch.push_back(std::async(std::launch::async, analyze_case, i));
            for (auto& f : batch) f.get();
        }
        for (std::size_t i = 0; i < cases.size(); ++i) {
            if (results[i]) continue;
            const bool phishing = cases[i].ground_truth == GroundTruth::kPhishing;
            metrics.warnings.push_back("run " + std::to_string(run + 1) + ": " + cases[i].fixture.string() + " failed (" +
                                       errors[i] + "); " + (phishing ? "counted as a miss" : "excluded from scoring"));
        }
        metrics.runs.push_back(metrics_from_counts(count_outcomes(cases, results)));
    }

    std::vector<double> p;
    std::vector<double> r;
    std::vector<double> f;
    for (const auto& m : metrics.runs) {
        p.push_back(m.precision);
        r.push_back(m.recall);
        f.push_back(m.f1);
    }
    metrics.precision = mean_std(p);
    metrics.recall = mean_std(r);
    metrics.f1 = mean_std(f);
    return metrics;
}

std::string render_eval(const EvalMetrics& metrics) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < metrics.runs.size(); ++i) {
        const auto& m = metrics.runs[i];
        out << "run " << i + 1 << ": TP=" << m.counts.tp << " FP=" << m.counts.fp << " FN=" << m.counts.fn
            << " TN=" << m.counts.tn << " excluded=" << m.counts.excluded << "  precision=" << m.precision
            << " recall=" << m.recall << " f1=" << m.f1 << "\n";
    }
    out << "precision " << metrics.precision.mean << " +/- " << metrics.precision.std << "\n";
    out << "recall    " << metrics.recall.mean << " +/- " << metrics.recall.std << "\n";
    out << "f1        " << metrics.f1.mean << " +/- " << metrics.f1.std << "\n";
    for (const auto& w : metrics.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string eval_to_json(const EvalMetrics& metrics) {
    ordered_json j;
    j["runs"] = ordered_json::array();
    for (const auto& m : metrics.runs) {
        j["runs"].push_back({{"tp", m.counts.tp},
                             {"fp", m.counts.fp},
                             {"fn", m.counts.fn},
                             {"tn", m.counts.tn},
                             {"excluded", m.counts.excluded},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1}});
    }
    auto ms = [](const MeanStd& v) { return ordered_json{{"mean", v.mean}, {"std", v.std}}; };
    j["precision"] = ms(metrics.precision);
    j["recall"] = ms(metrics.recall);
    j["f1"] = ms(metrics.f1);
    j["warnings"] = metrics.warnings;
    return j.dump(2) + "\n";
}

}  // namespace txlens
