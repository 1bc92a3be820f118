// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <txlens/features.hpp>
#include <txlens/model_output.hpp>
#include <txlens/threat_db.hpp>

namespace txlens {

inline constexpr std::size_t kDefaultSectionBudget = 8000;
inline constexpr std::string_view kTruncatedMarker = "[truncated]";

struct Prompt {
    enum class Kind : std::uint8_t { kAnalysis, kReflection, kSummary };

    Kind kind{Kind::kAnalysis};
    std::string role_preamble;
    std::vector<std::pair<Dimension, std::string>> evidence_sections;  // behavior, context, ui, database
    std::string weights_note;
    std::string output_schema_instructions;
    std::vector<std::string> counterexamples;  // rendered peer verdicts (reflection and summary prompts)
    std::string task;                          // phase-specific instruction appended last

    //! Role and output contract, suitable for a chat "system" message
    [[nodiscard]] std::string system_text() const;
    //! Evidence, peers and task, suitable for a chat "user" message
    [[nodiscard]] std::string user_text() const;
    [[nodiscard]] std::string render() const { return system_text() + "\n" + user_text(); }

    bool operator==(const Prompt&) const = default;
};

std::string_view to_string(Prompt::Kind kind) noexcept;

//! Analyst prompt over all four evidence classes; each section is capped at `section_budget` characters
Prompt build_prompt(const FeatureVector& fv, std::span<const ThreatHit> hits,
                    std::size_t section_budget = kDefaultSectionBudget);

//! Base prompt plus the model's own verdict and its peers' (sorted by model id); throws PreconditionError if no peers
Prompt build_reflection_prompt(const ModelOutput& own, std::span<const ModelOutput> counters, const Prompt& base);

//! Asks the primary model to merge agreeing verdicts into one report with the shared label
Prompt build_summary_prompt(std::span<const ModelOutput> outputs, const Prompt& base);

//! One line per verdict: model id, label, confidence, justification
std::string render_verdict(const ModelOutput& output);

}  // namespace txlens
