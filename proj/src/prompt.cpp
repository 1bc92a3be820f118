// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <txlens/errors.hpp>
#include <txlens/prompt.hpp>

namespace txlens {

namespace {

    constexpr std::string_view kRolePreamble =
        "You are a blockchain security analyst reviewing an Ethereum transaction before the user signs it. "
        "The transaction was executed against a fork of chain state; nothing was broadcast. "
        "Judge whether it is safe, suspicious, or malicious by weighing four evidence classes: "
        "behavior (call chain, asset movements, approvals, storage changes, contract code), "
        "context (gas usage and pricing, sender activity), UI (the page and scripts that built the transaction), "
        "and database (threat-intelligence matches).";

    constexpr std::string_view kSchemaInstructions =
        "Respond with exactly one JSON object and nothing else, using this shape:\n"
        "{\"risk\":\"safe\"|\"suspicious\"|\"malicious\",\"confidence\":number between 0 and 1,"
        "\"justification\":string,\"summary\":string,"
        "\"importance\":{\"behavior\":n,\"context\":n,\"ui\":n,\"database\":n},"
        "\"recommendations\":[string]}\n"
        "The four importance values must be non-negative and sum to 1.";

    std::string fmt_ratio(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return buf;
    }

    std::string cap(std::string text, std::size_t budget) {
        if (text.size() <= budget) return text;
        const std::string tail = "\n" + std::string{kTruncatedMarker};
        const std::size_t keep = budget > tail.size() ? budget - tail.size() : 0;
        text.resize(keep);
        return text + tail;
    }

    std::string selector_text(const std::optional<Selector>& sel) { return sel ? "0x" + to_hex(sel->bytes) : "-"; }

    std::string render_behavior(const BehaviorFindings& b) {
        std::ostringstream out;
        out << "Execution status: " << (b.status == TraceStatus::kSuccess ? "SUCCESS" : "REVERT") << "\n";
        out << "Call chain (" << b.call_chain.size() << " frames):\n";
        for (const auto& row : b.call_chain) {
            out << "  " << std::string(row.depth * 2, ' ') << "[" << row.depth << "] " << to_string(row.call_kind) << " "
                << row.caller.hex() << " -> " << row.callee.hex() << " selector " << selector_text(row.selector)
                << (row.reverted ? " (reverted)" : "") << "\n";
        }
        out << "Asset transfers:";
        if (b.transfers.empty()) out << " none";
        out << "\n";
        for (const auto& t : b.transfers) {
            out << "  - " << (t.is_native() ? std::string{"ETH"} : "ERC20 " + t.token->hex()) << " amount "
                << to_decimal(t.amount) << " from " << t.from.hex() << " to " << t.to.hex() << " [" << to_string(t.evidence)
                << "]\n";
        }
        out << "Approvals:";
        if (b.approvals.empty()) out << " none";
        out << "\n";
        for (const auto& a : b.approvals) {
            out << "  - " << (a.kind == ApprovalFinding::Kind::kApprove ? "approve" : "setApprovalForAll") << " on "
                << a.token.hex() << " owner " << a.owner.hex() << " spender " << a.spender.hex() << " amount "
                << (a.unlimited && a.kind == ApprovalFinding::Kind::kApprove ? std::string{"UNLIMITED"} : to_decimal(a.amount))
                << " selector 0x" << to_hex(a.selector.bytes) << "\n";
        }
        out << "Storage changes:";
        if (b.state_changes.empty()) out << " none";
        out << "\n";
        for (const auto& s : b.state_changes) out << "  - " << to_string(s.kind) << ": " << s.description << "\n";
        for (const auto& w : b.warnings) out << "Note: " << w << "\n";
        if (!b.code_excerpts.empty()) {
            out << "Contract code:\n";
            for (const auto& [addr, snippet] : b.code_excerpts) {
                if (snippet.verified_source) {
                    out << "--- " << addr.hex() << " (verified source)\n" << *snippet.verified_source << "\n";
                } else if (snippet.decompiled) {
                    out << "--- " << addr.hex() << " (decompiled)\n" << *snippet.decompiled << "\n";
                }
            }
        }
        return out.str();
    }

    std::string render_context(const GasContextFindings& c) {
        std::ostringstream out;
        out << "Gas limit " << c.gas_limit << ", gas used " << c.gas_used << ", unused ratio " << fmt_ratio(c.unused_gas_ratio)
            << (c.excessive_unused_flag ? " (EXCESSIVE UNUSED GAS)" : "") << "\n";
        if (c.price_to_basefee_ratio) {
            out << "Effective gas price / base fee = " << fmt_ratio(*c.price_to_basefee_ratio)
                << (c.acceleration_flag ? " (POSSIBLE ACCELERATION OR FRONT-RUNNING)" : "") << "\n";
        } else {
            out << "Effective gas price / base fee: unavailable\n";
        }
        out << "Rapid transaction sequence from sender: " << (c.rapid_sequence_flag ? "yes" : "no") << "\n";
        for (const auto& n : c.notes) out << "Note: " << n << "\n";
        return out.str();
    }

    std::string render_ui(const UIFindings& ui) {
        if (!ui.present) return "UI: not available\n";
        std::ostringstream out;
        out << "Main domain: " << ui.main_domain.value_or("unknown") << "\n";
        out << "Signing initiation sites:";
        if (ui.signing_initiation_sites.empty()) out << " none";
        out << "\n";
        for (const auto& s : ui.signing_initiation_sites)
            out << "  - script " << s.script_index << " line " << s.line << ": " << s.api_name << "\n";
        out << "Calldata construction sites:";
        if (ui.calldata_construction_sites.empty()) out << " none";
        out << "\n";
        for (const auto& s : ui.calldata_construction_sites)
            out << "  - script " << s.script_index << " line " << s.line << ": " << s.snippet << "\n";
        for (const auto& n : ui.notes) out << "Note: " << n << "\n";
        return out.str();
    }

    std::string render_database(std::span<const ThreatHit> hits) {
        if (hits.empty()) return "No threat-intelligence matches.\n";
        std::ostringstream out;
        for (const auto& h : hits) {
            out << "- " << to_string(h.kind) << " " << h.subject << ": " << h.label;
            if (h.severity) out << " [" << to_string(*h.severity) << "]";
            out << " (source: " << h.source << ")\n";
        }
        return out.str();
    }

    std::string section_title(Dimension d) {
        switch (d) {
            case Dimension::kBehavior:
                return "BEHAVIOR";
            case Dimension::kContext:
                return "CONTEXT";
            case Dimension::kUi:
                return "UI";
            case Dimension::kDatabase:
                return "DATABASE";
        }
        return "";
    }

}  // namespace

std::string_view to_string(Prompt::Kind kind) noexcept {
    switch (kind) {
        case Prompt::Kind::kAnalysis:
            return "analysis";
        case Prompt::Kind::kReflection:
            return "reflection";
        case Prompt::Kind::kSummary:
            return "summary";
    }
    return "analysis";
}

std::string Prompt::system_text() const { return role_preamble + "\n\n" + output_schema_instructions + "\n"; }

std::string Prompt::user_text() const {
    std::ostringstream out;
    for (const auto& [dimension, text] : evidence_sections) out << "## " << section_title(dimension) << "\n" << text << "\n";
    out << "## WEIGHTS\n" << weights_note << "\n";
    if (!counterexamples.empty()) {
        out << "\n## PEER ASSESSMENTS\n";
        for (const auto& c : counterexamples) out << c << "\n";
    }
    if (!task.empty()) out << "\n## TASK\n" << task << "\n";
    return out.str();
}

std::string render_verdict(const ModelOutput& output) {
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.3f", output.confidence.value());
    return "- model " + output.model_id + ": risk=" + std::string{to_string(output.risk)} + " confidence=" + conf +
           " justification: " + output.justification;
}

Prompt build_prompt(const FeatureVector& fv, std::span<const ThreatHit> hits, std::size_t section_budget) {
    Prompt p;
    p.kind = Prompt::Kind::kAnalysis;
    p.role_preamble = std::string{kRolePreamble};
    p.output_schema_instructions = std::string{kSchemaInstructions};
    p.evidence_sections = {
        {Dimension::kBehavior, cap(render_behavior(fv.behavior), section_budget)},
        {Dimension::kContext, cap(render_context(fv.context), section_budget)},
        {Dimension::kUi, cap(render_ui(fv.ui), section_budget)},
        {Dimension::kDatabase, cap(render_database(hits), section_budget)},
    };
    std::ostringstream weights;
    weights << "Evidence weights:";
    for (auto d : kDimensions) weights << " " << to_string(d) << "=" << fmt_ratio(fv.weights[d]);
    weights << ". Weigh each class accordingly and report your own importance values.";
    p.weights_note = weights.str();
    p.task = "Assess the transaction and answer with the JSON object described above.";
    return p;
}

Prompt build_reflection_prompt(const ModelOutput& own, std::span<const ModelOutput> counters, const Prompt& base) {
    if (counters.empty()) throw PreconditionError("build_reflection_prompt: no counter-verdicts");
    std::vector<const ModelOutput*> sorted;
    for (const auto& c : counters) sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->model_id < b->model_id; });

    Prompt p = base;
    p.kind = Prompt::Kind::kReflection;
    p.counterexamples.clear();
    for (const auto* c : sorted) p.counterexamples.push_back(render_verdict(*c));
    p.task = "Your previous assessment was:\n" + render_verdict(own) +
             "\nOther analysts reached the assessments listed under PEER ASSESSMENTS. Treat them as counterexamples: "
             "reassess the evidence, decide whether your label still holds, and answer again with the same JSON schema.";
    return p;
}

Prompt build_summary_prompt(std::span<const ModelOutput> outputs, const Prompt& base) {
    Prompt p = base;
    p.kind = Prompt::Kind::kSummary;
    p.counterexamples.clear();
    for (const auto& o : outputs) p.counterexamples.push_back(render_verdict(o));
    const std::string label = outputs.empty() ? "unknown" : std::string{to_string(outputs.front().risk)};
    p.task = "All analysts agreed the transaction is " + label +
             ". Merge their assessments into one final report for the user: keep the label " + label +
             ", combine the justifications, and deduplicate the recommendations. Answer with the same JSON schema.";
    return p;
}

}  // namespace txlens
