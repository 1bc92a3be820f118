// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <txlens/backend.hpp>
#include <txlens/consensus.hpp>
#include <txlens/report.hpp>
#include <txlens/trace_ingest.hpp>

namespace txlens {

enum class RunMode : std::uint8_t { kHistorical, kSimulate, kBatchEval };

enum class Stage : std::uint8_t { kConfig, kIngest, kEnrich, kFeatures, kDatabase, kLlm, kConsensus, kReport };

std::string_view to_string(Stage stage) noexcept;
//! 10 + stage ordinal
int exit_code_for(Stage stage) noexcept;
//! 0 SAFE, 1 SUSPICIOUS, 2 MALICIOUS
int exit_code_for(RiskLabel label) noexcept;

struct RunConfig {
    RunMode mode{RunMode::kHistorical};
    TraceSource trace_source;
    std::vector<std::filesystem::path> db_paths;  // indicator files, in load order
    std::optional<std::filesystem::path> weight_config;
    std::optional<std::filesystem::path> slot_hints;
    ConsensusConfig consensus;
    std::vector<ModelBackend> backends;
    std::filesystem::path output_dir{"."};
    std::size_t section_budget{kDefaultSectionBudget};
    std::chrono::milliseconds model_timeout{kDefaultModelTimeout};
    std::optional<std::string> explorer_url;
    std::optional<std::string> explorer_key;
    std::optional<std::string> decompiler_command;
    std::size_t workers{1};
    std::string tool_version;
    std::optional<std::chrono::sys_seconds> fixed_timestamp;  // report timestamp override
    bool write_report{true};
};

//! Historical: tx_reference names the transaction. Simulate: `call` is set and tx_reference is a label.
struct AnalysisTarget {
    std::string tx_reference;
    std::optional<CallSpec> call;
};

struct AnalysisOutcome {
    int exit_code{0};
    std::optional<AnalysisReport> report;
    std::string summary_text;
    std::optional<std::filesystem::path> report_path;
    std::optional<Stage> failed_stage;
    std::string error;
    std::vector<std::string> warnings;
};

//! ingest -> enrich -> features -> threat DB -> prompt -> consensus -> report. Never throws; failures
//! come back with failed_stage set and an exit code of 10 or more.
AnalysisOutcome run_analysis(const RunConfig& cfg, const AnalysisTarget& target);

// --- configuration ---

//! KEY=VALUE lines (optional `export`, quotes, # comments). Variables already set in the environment win.
//! Returns the number of variables set; a missing file is not an error.
std::size_t load_dotenv(const std::filesystem::path& path);

//! Backends from MODEL_N and MODEL_1..MODEL_N (or MODEL_1.. until the first gap); keys from MODEL_API_KEY_<i> or MODEL_API_KEY
std::vector<ModelBackend> backends_from_env();
//! Comma-separated descriptors, ids made unique
std::vector<ModelBackend> backends_from_spec(const std::string& spec);

// --- evaluation ---

enum class GroundTruth : std::uint8_t { kPhishing, kBenign };

struct EvalCase {
    std::filesystem::path fixture;
    GroundTruth ground_truth{GroundTruth::kPhishing};
};

//! `[{"fixture": path, "ground_truth": "PHISHING"|"BENIGN"}]`; relative paths resolve against the manifest directory
std::vector<EvalCase> load_manifest(const std::filesystem::path& path);

struct ConfusionCounts {
    std::size_t tp{0};
    std::size_t fp{0};
    std::size_t fn{0};
    std::size_t tn{0};
    std::size_t excluded{0};  // benign cases that failed operationally

    bool operator==(const ConfusionCounts&) const = default;
};

struct RunMetrics {
    ConfusionCounts counts;
    double precision{0};
    double recall{0};
    double f1{0};
};

struct MeanStd {
    double mean{0};
    double std{0};  // population
};

struct EvalMetrics {
    std::vector<RunMetrics> runs;
    MeanStd precision;
    MeanStd recall;
    MeanStd f1;
    std::vector<std::string> warnings;
};

//! Outcome of one case: decided label, or nullopt for an operational error
using CaseResult = std::optional<RiskLabel>;

//! Detected = SUSPICIOUS or MALICIOUS. Operational errors count as FN for phishing and are excluded for benign.
ConfusionCounts count_outcomes(const std::vector<EvalCase>& cases, const std::vector<CaseResult>& results);
//! Precision is 0 when TP+FP = 0, recall 0 when TP+FN = 0, F1 0 when P+R = 0
RunMetrics metrics_from_counts(const ConfusionCounts& counts);
MeanStd mean_std(const std::vector<double>& values);

//! Runs every case `runs` times with the configured backends, up to cfg.workers cases in parallel
EvalMetrics run_eval(const std::vector<EvalCase>& cases, std::size_t runs, const RunConfig& cfg);

std::string render_eval(const EvalMetrics& metrics);
std::string eval_to_json(const EvalMetrics& metrics);

}  // namespace txlens
