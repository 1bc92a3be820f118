// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <txlens/errors.hpp>
#include <txlens/json_schema.hpp>
#include <txlens/report.hpp>

#include "report_schema.inc"

namespace txlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

    std::string fixed3(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }

    std::string behavior_reasoning(const BehaviorFindings& b) {
        std::size_t unlimited = 0;
        for (const auto& a : b.approvals) unlimited += a.unlimited ? 1 : 0;
        std::ostringstream out;
        out << b.call_chain.size() << " call frame(s), " << b.transfers.size() << " transfer(s), " << b.approvals.size()
            << " approval(s) (" << unlimited << " unlimited), " << b.state_changes.size() << " storage change(s)";
        for (const auto& s : b.state_changes)
            if (s.kind != StateChangeFinding::Kind::kUnclassifiedWrite && s.kind != StateChangeFinding::Kind::kBalanceWrite)
                out << ", " << to_string(s.kind);
        if (b.status == TraceStatus::kRevert) out << ", execution reverted";
        return out.str();
    }

    std::string context_reasoning(const GasContextFindings& c) {
        std::ostringstream out;
        out << "unused gas ratio " << fixed3(c.unused_gas_ratio);
        if (c.price_to_basefee_ratio) out << ", price/base fee " << fixed3(*c.price_to_basefee_ratio);
        if (c.excessive_unused_flag) out << ", excessive unused gas";
        if (c.acceleration_flag) out << ", accelerated gas price";
        if (c.rapid_sequence_flag) out << ", rapid transaction sequence";
        return out.str();
    }

    std::string ui_reasoning(const UIFindings& ui) {
        if (!ui.present) return "UI not available";
        std::ostringstream out;
        out << "main domain " << ui.main_domain.value_or("unknown") << ", " << ui.signing_initiation_sites.size()
            << " signing site(s), " << ui.calldata_construction_sites.size() << " calldata construction site(s)";
        return out.str();
    }

    std::string database_reasoning(const std::vector<ThreatHit>& hits) {
        if (hits.empty()) return "no threat-intelligence matches";
        std::ostringstream out;
        out << hits.size() << " threat-intelligence match(es):";
        for (const auto& h : hits) out << " " << to_string(h.kind) << " " << h.label << ";";
        auto text = out.str();
        text.pop_back();
        return text;
    }

    std::string label_text(RiskLabel r) { return std::string{to_string(r)}; }

    RiskLabel label_from(const json& v) {
        auto r = parse_risk_label(v.get<std::string>());
        if (!r) throw SchemaError("risk", "unknown label");
        return *r;
    }

}  // namespace

std::string format_timestamp(std::chrono::sys_seconds t) {
    const std::time_t secs = t.time_since_epoch().count();
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text) {
    // libstdc++ get_time accepts input that ends early, so pin the shape first
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
        text[19] != 'Z')
        return std::nullopt;
    std::tm tm{};
    std::istringstream in{std::string{text}};
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    if (in.fail()) return std::nullopt;
    return std::chrono::sys_seconds{std::chrono::seconds{timegm(&tm)}};
}

std::string format_percent(Confidence c) {
    // tenths of a percent, rounded half up: 1e9 nanos = 1000 tenths
    const std::int64_t tenths = (c.nanos + 500'000) / 1'000'000;
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

std::string provenance_text(ConsensusMode mode, std::size_t rounds_used) {
    switch (mode) {
        case ConsensusMode::kUnanimous:
            return "unanimous";
        case ConsensusMode::kReflectedConsensus:
            return "consensus after " + std::to_string(rounds_used) + " reflection round(s)";
        case ConsensusMode::kWeightedVote:
            return "weighted vote";
    }
    return "unanimous";
}

AnalysisReport build_report(const ConsensusResult& result, const FeatureVector& fv, const ReportMeta& meta) {
    AnalysisReport r;
    r.tx_reference = meta.tx_reference;
    r.decided_label = result.decided_label;
    r.confidence = result.final.confidence;
    r.summary = result.final.summary;
    r.justification = result.final.justification;
    r.recommendations = result.final.recommendations;
    r.tool_version = meta.tool_version;
    r.timestamp = meta.timestamp;

    const std::vector<ModelOutput> empty;
    const auto& last = result.transcripts.empty() ? empty : result.transcripts.back();
    const std::array<std::string, 4> reasons{behavior_reasoning(fv.behavior), context_reasoning(fv.context),
                                             ui_reasoning(fv.ui), database_reasoning(fv.database)};
    for (auto d : kDimensions) {
        auto& c = r.components[static_cast<std::size_t>(d)];
        double sum = 0;
        for (const auto& o : last) sum += o.importance[d];
        c.score = last.empty() ? 0.0 : std::clamp(sum / static_cast<double>(last.size()), 0.0, 1.0);
        c.weight = fv.weights[d];
        c.reasoning = reasons[static_cast<std::size_t>(d)];
    }

    r.consensus.mode = result.mode;
    r.consensus.rounds_used = result.rounds_used;
    r.consensus.primary_model = result.primary_model;
    for (const auto& o : last) r.consensus.models.push_back({o.model_id, o.risk, o.confidence});
    if (result.tally) r.consensus.tally = result.tally->scores;
    r.consensus.notes = result.notes;
    return r;
}

std::string render_summary(const AnalysisReport& report) {
    std::ostringstream out;
    std::string label = label_text(report.decided_label);
    for (auto& ch : label) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    out << "[" << label << "] confidence " << format_percent(report.confidence) << "\n";
    if (!report.tx_reference.empty()) out << "Transaction: " << report.tx_reference << "\n";
    out << "\n" << report.summary << "\n\n";
    if (report.recommendations.empty()) {
        out << "Recommendations: none\n";
    } else {
        out << "Recommendations:\n";
        for (std::size_t i = 0; i < report.recommendations.size(); ++i)
            out << i + 1 << ". " << report.recommendations[i] << "\n";
    }
    out << "\nDecision: " << provenance_text(report.consensus.mode, report.consensus.rounds_used) << " (primary model "
        << report.consensus.primary_model << ")\n";
    return out.str();
}

ordered_json report_to_json(const AnalysisReport& r) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tx_reference"] = r.tx_reference;
    j["risk"] = label_text(r.decided_label);
    j["confidence"] = r.confidence.value();
    j["summary"] = r.summary;
    j["justification"] = r.justification;
    j["recommendations"] = r.recommendations;
    ordered_json components = ordered_json::object();
    for (auto d : kDimensions) {
        const auto& c = r.components[static_cast<std::size_t>(d)];
        components[std::string{to_string(d)}] = {{"score", c.score}, {"weight", c.weight}, {"reasoning", c.reasoning}};
    }
    j["components"] = std::move(components);
    ordered_json consensus;
    consensus["mode"] = std::string{to_string(r.consensus.mode)};
    consensus["rounds_used"] = r.consensus.rounds_used;
    consensus["primary_model"] = r.consensus.primary_model;
    consensus["models"] = ordered_json::array();
    for (const auto& m : r.consensus.models)
        consensus["models"].push_back({{"id", m.id}, {"risk", label_text(m.risk)}, {"confidence", m.confidence.value()}});
    if (r.consensus.tally) {
        ordered_json tally = ordered_json::object();
        for (const auto& [label, score] : *r.consensus.tally) tally[label_text(label)] = score.value();
        consensus["tally"] = std::move(tally);
    }
    if (!r.consensus.notes.empty()) consensus["notes"] = r.consensus.notes;
    j["consensus"] = std::move(consensus);
    j["tool_version"] = r.tool_version;
    j["timestamp"] = format_timestamp(r.timestamp);
    return j;
}

std::string emit_report_json(const AnalysisReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string emit_report_json(const ConsensusResult& result, const FeatureVector& fv, const ReportMeta& meta) {
    return emit_report_json(build_report(result, fv, meta));
}

const json& report_schema() {
    static const json schema = json::parse(kReportSchemaText);
    return schema;
}

std::vector<std::string> validate_report(const json& doc) { return validate_json_schema(doc, report_schema()); }

AnalysisReport parse_report_json(std::string_view text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("$", "not valid JSON");
    if (auto problems = validate_report(doc); !problems.empty()) throw SchemaError(problems.front());

    AnalysisReport r;
    r.tx_reference = doc["tx_reference"].get<std::string>();
    r.decided_label = label_from(doc["risk"]);
    r.confidence = Confidence::from_double(doc["confidence"].get<double>());
    r.summary = doc["summary"].get<std::string>();
    r.justification = doc["justification"].get<std::string>();
    r.recommendations = doc["recommendations"].get<std::vector<std::string>>();
    for (auto d : kDimensions) {
        const auto& c = doc["components"][std::string{to_string(d)}];
        r.components[static_cast<std::size_t>(d)] = {c["score"].get<double>(), c["weight"].get<double>(),
                                                      c["reasoning"].get<std::string>()};
    }
    const auto& cons = doc["consensus"];
    r.consensus.mode = *parse_consensus_mode(cons["mode"].get<std::string>());
    r.consensus.rounds_used = cons["rounds_used"].get<std::size_t>();
    r.consensus.primary_model = cons["primary_model"].get<std::string>();
    for (const auto& m : cons["models"])
        r.consensus.models.push_back({m["id"].get<std::string>(), label_from(m["risk"]),
                                      Confidence::from_double(m["confidence"].get<double>())});
    if (cons.contains("tally")) {
        std::map<RiskLabel, Confidence> tally;
        for (const auto& [label, score] : cons["tally"].items())
            tally[*parse_risk_label(label)] = Confidence::from_double(score.get<double>());
        r.consensus.tally = std::move(tally);
    }
    if (cons.contains("notes")) r.consensus.notes = cons["notes"].get<std::vector<std::string>>();
    r.tool_version = doc["tool_version"].get<std::string>();
    auto ts = parse_timestamp(doc["timestamp"].get<std::string>());
    if (!ts) throw SchemaError("timestamp", "not an ISO-8601 UTC instant");
    r.timestamp = *ts;
    return r;
}

}  // namespace txlens
