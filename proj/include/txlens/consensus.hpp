// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <txlens/model_output.hpp>

namespace txlens {

enum class TieBreak : std::uint8_t { kHigherSeverity, kLowestModelIndex };

struct ConsensusConfig {
    std::size_t n{3};
    std::size_t max_rounds{3};
    std::string primary_model;  // empty => first configured model
    TieBreak tie_break{TieBreak::kHigherSeverity};
};

enum class ConsensusMode : std::uint8_t { kUnanimous, kReflectedConsensus, kWeightedVote };

std::string_view to_string(ConsensusMode mode) noexcept;
std::optional<ConsensusMode> parse_consensus_mode(std::string_view text) noexcept;
std::string_view to_string(TieBreak rule) noexcept;
std::optional<TieBreak> parse_tie_break(std::string_view text) noexcept;

//! Confidence-weighted score per observed label
struct VoteTally {
    std::map<RiskLabel, Confidence> scores;

    bool operator==(const VoteTally&) const = default;
};

struct Vote {
    RiskLabel decided{RiskLabel::kSafe};
    ModelOutput output;  // highest confidence among the winning label, lowest index on ties
    VoteTally tally;
};

struct ConsensusResult {
    ModelOutput final;
    RiskLabel decided_label{RiskLabel::kSafe};
    ConsensusMode mode{ConsensusMode::kUnanimous};
    std::size_t rounds_used{0};
    std::vector<std::vector<ModelOutput>> transcripts;  // transcripts[r] = surviving outputs of round r
    std::string primary_model;
    std::optional<VoteTally> tally;  // present for WEIGHTED_VOTE
    std::vector<std::string> notes;

    bool operator==(const ConsensusResult&) const = default;
};

VoteTally tally_votes(std::span<const ModelOutput> outputs);

//! Throws PreconditionError on an empty list
Vote weighted_vote(std::span<const ModelOutput> outputs, TieBreak tie_break = TieBreak::kHigherSeverity);

//! Re-asks one model with its peers' outputs as counterexamples. `round` starts at 1.
//! Throwing marks the model as failed; it is dropped from later rounds.
using Reflector = std::function<ModelOutput(std::size_t model_index, const ModelOutput& own,
                                            std::span<const ModelOutput> counters, std::size_t round)>;

//! Asks the primary model to merge agreeing outputs
using Summarizer = std::function<ModelOutput(std::span<const ModelOutput> outputs)>;

//! Summarizer output with the label forced to the shared label; on summarizer failure, the primary's own output.
//! `notes` receives divergence and fallback messages.
ModelOutput summarize(std::span<const ModelOutput> outputs, const std::string& primary, const Summarizer& summarizer,
                      std::vector<std::string>* notes = nullptr);

//! Reflection until the labels agree or `max_rounds` reflections have run, then a weighted vote.
//! Throws PreconditionError for fewer than 2 initial outputs and ConsensusError when fewer than 2 models survive.
ConsensusResult run_consensus(std::vector<ModelOutput> initial, const Reflector& reflector, const Summarizer& summarizer,
                              const ConsensusConfig& cfg);

}  // namespace txlens
