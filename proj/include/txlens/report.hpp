// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include <txlens/consensus.hpp>
#include <txlens/features.hpp>

namespace txlens {

inline constexpr int kReportSchemaVersion = 1;

struct ComponentScore {
    double score{0};   // mean final-round importance, in [0, 1]
    double weight{0};  // FeatureVector weight
    std::string reasoning;

    bool operator==(const ComponentScore&) const = default;
};

struct ModelVerdict {
    std::string id;
    RiskLabel risk{RiskLabel::kSafe};
    Confidence confidence;

    bool operator==(const ModelVerdict&) const = default;
};

struct ConsensusMeta {
    ConsensusMode mode{ConsensusMode::kUnanimous};
    std::size_t rounds_used{0};
    std::string primary_model;
    std::vector<ModelVerdict> models;  // final round
    std::optional<std::map<RiskLabel, Confidence>> tally;
    std::vector<std::string> notes;

    bool operator==(const ConsensusMeta&) const = default;
};

struct AnalysisReport {
    std::string tx_reference;
    RiskLabel decided_label{RiskLabel::kSafe};
    Confidence confidence;
    std::string summary;
    std::string justification;
    std::vector<std::string> recommendations;
    std::array<ComponentScore, 4> components;  // indexed by Dimension
    ConsensusMeta consensus;
    std::string tool_version;
    std::chrono::sys_seconds timestamp{};

    bool operator==(const AnalysisReport&) const = default;
};

struct ReportMeta {
    std::string tx_reference;
    std::string tool_version;
    std::chrono::sys_seconds timestamp{};
};

AnalysisReport build_report(const ConsensusResult& result, const FeatureVector& fv, const ReportMeta& meta);

//! Banner with label and percentage, summary, numbered recommendations, and a one-line provenance
std::string render_summary(const AnalysisReport& report);

//! "unanimous", "consensus after k reflection round(s)" or "weighted vote"
std::string provenance_text(ConsensusMode mode, std::size_t rounds_used);

//! Confidence as a percentage with one decimal, e.g. "92.0%"
std::string format_percent(Confidence c);

nlohmann::ordered_json report_to_json(const AnalysisReport& report);
//! Stable key order, two-space indent, trailing newline
std::string emit_report_json(const AnalysisReport& report);
std::string emit_report_json(const ConsensusResult& result, const FeatureVector& fv, const ReportMeta& meta);

//! Throws SchemaError when the document is not JSON or violates the report schema
AnalysisReport parse_report_json(std::string_view text);

const nlohmann::json& report_schema();
std::vector<std::string> validate_report(const nlohmann::json& doc);

std::string format_timestamp(std::chrono::sys_seconds t);
std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text);

}  // namespace txlens
