// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <future>

#include <txlens/consensus.hpp>
#include <txlens/errors.hpp>

namespace txlens {

std::string_view to_string(ConsensusMode mode) noexcept {
    switch (mode) {
        case ConsensusMode::kUnanimous:
            return "UNANIMOUS";
        case ConsensusMode::kReflectedConsensus:
            return "REFLECTED_CONSENSUS";
        case ConsensusMode::kWeightedVote:
            return "WEIGHTED_VOTE";
    }
    return "UNANIMOUS";
}

std::optional<ConsensusMode> parse_consensus_mode(std::string_view text) noexcept {
    for (auto m : {ConsensusMode::kUnanimous, ConsensusMode::kReflectedConsensus, ConsensusMode::kWeightedVote})
        if (to_string(m) == text) return m;
    return std::nullopt;
}

std::string_view to_string(TieBreak rule) noexcept {
    return rule == TieBreak::kHigherSeverity ? "HIGHER_SEVERITY" : "LOWEST_MODEL_INDEX";
}

std::optional<TieBreak> parse_tie_break(std::string_view text) noexcept {
    if (text == "HIGHER_SEVERITY") return TieBreak::kHigherSeverity;
    if (text == "LOWEST_MODEL_INDEX") return TieBreak::kLowestModelIndex;
    return std::nullopt;
}

VoteTally tally_votes(std::span<const ModelOutput> outputs) {
    VoteTally tally;
    for (const auto& o : outputs) tally.scores[o.risk] += o.confidence;
    return tally;
}

Vote weighted_vote(std::span<const ModelOutput> outputs, TieBreak tie_break) {
    if (outputs.empty()) throw PreconditionError("weighted_vote: no outputs");
    Vote vote;
    vote.tally = tally_votes(outputs);

    Confidence best{-1};
    for (const auto& [label, score] : vote.tally.scores) best = std::max(best, score);

    // candidates in first-appearance order
    std::vector<RiskLabel> tied;
    for (const auto& o : outputs)
        if (vote.tally.scores.at(o.risk) == best && std::find(tied.begin(), tied.end(), o.risk) == tied.end())
            tied.push_back(o.risk);
    vote.decided = tie_break == TieBreak::kHigherSeverity ? max_severity(tied) : tied.front();

    const ModelOutput* chosen = nullptr;
    for (const auto& o : outputs)
        if (o.risk == vote.decided && (!chosen || o.confidence > chosen->confidence)) chosen = &o;
    vote.output = *chosen;
    return vote;
}

ModelOutput summarize(std::span<const ModelOutput> outputs, const std::string& primary, const Summarizer& summarizer,
                      std::vector<std::string>* notes) {
    if (outputs.empty()) throw PreconditionError("summarize: no outputs");
    const RiskLabel label = outputs.front().risk;
    for (const auto& o : outputs)
        if (o.risk != label) throw PreconditionError("summarize: outputs do not share one label");

    auto note = [&](std::string text) {
        if (notes) notes->push_back(std::move(text));
    };
    try {
        ModelOutput merged = summarizer(outputs);
        if (merged.risk != label) {
            note("summarizer returned " + std::string{to_string(merged.risk)} + " against consensus label " +
                 std::string{to_string(label)} + "; label overwritten");
            merged.risk = label;
        }
        return merged;
    } catch (const std::exception& e) {
        auto own = std::find_if(outputs.begin(), outputs.end(), [&](const ModelOutput& o) { return o.model_id == primary; });
        if (own == outputs.end()) {
            note(std::string{"summarizer failed ("} + e.what() + ") and primary model " + primary +
                 " has no final output; using " + outputs.front().model_id);
            return outputs.front();
        }
        note(std::string{"summarizer failed ("} + e.what() + "); using primary model output");
        return *own;
    }
}

ConsensusResult run_consensus(std::vector<ModelOutput> initial, const Reflector& reflector, const Summarizer& summarizer,
                              const ConsensusConfig& cfg) {
    if (initial.size() < 2) throw PreconditionError("run_consensus: at least two model outputs are required");

    ConsensusResult result;
    result.primary_model = cfg.primary_model.empty() ? initial.front().model_id : cfg.primary_model;

    // surviving models: original index plus latest output
    std::vector<std::size_t> alive(initial.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<ModelOutput> current = std::move(initial);
    result.transcripts.push_back(current);

    auto unanimous = [&] {
        return std::all_of(current.begin(), current.end(), [&](const ModelOutput& o) { return o.risk == current.front().risk; });
    };

    for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
        if (unanimous()) {
            result.final = summarize(current, result.primary_model, summarizer, &result.notes);
            result.decided_label = current.front().risk;
            result.mode = round == 0 ? ConsensusMode::kUnanimous : ConsensusMode::kReflectedConsensus;
            result.rounds_used = round;
            return result;
        }

        std::vector<std::future<ModelOutput>> pending;
        pending.reserve(current.size());
        for (std::size_t i = 0; i < current.size(); ++i) {
            std::vector<ModelOutput> counters;
            for (std::size_t j = 0; j < current.size(); ++j)
                if (j != i) counters.push_back(current[j]);
            pending.push_back(std::async(std::launch::async, [&reflector, &current, i, idx = alive[i], round,
                                                              counters = std::move(counters)] {
                return reflector(idx, current[i], counters, round + 1);
            }));
        }

        std::vector<ModelOutput> next;
        std::vector<std::size_t> next_alive;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            try {
                next.push_back(pending[i].get());
                next_alive.push_back(alive[i]);
            } catch (const std::exception& e) {
                result.notes.push_back("model " + current[i].model_id + " dropped in round " + std::to_string(round + 1) +
                                       ": " + e.what());
            }
        }
        if (next.size() < 2)
            throw ConsensusError("only " + std::to_string(next.size()) + " model(s) survived reflection round " +
                                 std::to_string(round + 1));
        current = std::move(next);
        alive = std::move(next_alive);
        result.transcripts.push_back(current);
    }

    if (cfg.max_rounds == 0 && unanimous()) {
        result.final = summarize(current, result.primary_model, summarizer, &result.notes);
        result.decided_label = current.front().risk;
        result.mode = ConsensusMode::kUnanimous;
        result.rounds_used = 0;
        return result;
    }

    auto vote = weighted_vote(current, cfg.tie_break);
    result.final = std::move(vote.output);
    result.decided_label = vote.decided;
    result.tally = std::move(vote.tally);
    result.mode = ConsensusMode::kWeightedVote;
    result.rounds_used = cfg.max_rounds;
    return result;
}

}  // namespace txlens
