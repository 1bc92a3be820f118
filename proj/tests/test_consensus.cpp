// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <random>

#include <catch_amalgamated.hpp>

#include <txlens/consensus.hpp>
#include <txlens/errors.hpp>

#include "helpers.hpp"

using namespace txlens;
using L = RiskLabel;

namespace {

constexpr std::int64_t kNano = 1'000'000'000;

std::int64_t nanos(double v) { return static_cast<std::int64_t>(v * 1000 + 0.5) * (kNano / 1000); }

ModelOutput out(const std::string& id, L risk, double confidence) { return support::output(id, risk, nanos(confidence)); }

Summarizer echo_summarizer(std::atomic<int>* calls = nullptr) {
    return [calls](std::span<const ModelOutput> outs) {
        if (calls) ++*calls;
        auto merged = outs.front();
        merged.summary = "merged";
        return merged;
    };
}

}  // namespace

TEST_CASE("unanimous outputs skip reflection", "[run_consensus]") {
    std::atomic<int> summaries{0};
    bool reflected = false;
    const Reflector never = [&](std::size_t, const ModelOutput& own, std::span<const ModelOutput>, std::size_t) {
        reflected = true;
        return own;
    };
    const auto r = run_consensus({out("a", L::kMalicious, 0.9), out("b", L::kMalicious, 0.8), out("c", L::kMalicious, 0.7)},
                                 never, echo_summarizer(&summaries), {});
    CHECK(r.mode == ConsensusMode::kUnanimous);
    CHECK(r.rounds_used == 0);
    CHECK(r.decided_label == L::kMalicious);
    CHECK(r.final.summary == "merged");
    CHECK(r.transcripts.size() == 1);
    CHECK(summaries == 1);
    CHECK_FALSE(reflected);
    CHECK(r.primary_model == "a");
    CHECK_FALSE(r.tally.has_value());
}

TEST_CASE("reflection converging at round one", "[run_consensus]") {
    const std::vector initial{out("a", L::kSafe, 0.6), out("b", L::kMalicious, 0.8), out("c", L::kMalicious, 0.7)};
    std::vector<std::size_t> seen_counters(3);
    const Reflector reflector = [&](std::size_t i, const ModelOutput& own, std::span<const ModelOutput> counters, std::size_t round) {
        CHECK(round == 1);
        seen_counters[i] = counters.size();
        auto next = own;
        next.risk = L::kMalicious;
        return next;
    };
    const auto r = run_consensus(initial, reflector, echo_summarizer(), {});
    CHECK(r.mode == ConsensusMode::kReflectedConsensus);
    CHECK(r.rounds_used == 1);
    REQUIRE(r.transcripts.size() == 2);
    CHECK(r.transcripts[0] == initial);
    CHECK(r.transcripts[1][0].risk == L::kMalicious);
    CHECK(seen_counters == std::vector<std::size_t>{2, 2, 2});
}

TEST_CASE("never converging falls back to the weighted vote", "[run_consensus]") {
    const std::vector initial{out("a", L::kSafe, 0.9), out("b", L::kMalicious, 0.8), out("c", L::kMalicious, 0.7)};
    int reflections = 0;
    const Reflector same = [&](std::size_t, const ModelOutput& own, std::span<const ModelOutput>, std::size_t) {
        ++reflections;
        return own;
    };
    const auto r = run_consensus(initial, same, echo_summarizer(), {});
    CHECK(r.mode == ConsensusMode::kWeightedVote);
    CHECK(r.rounds_used == 3);
    CHECK(r.decided_label == L::kMalicious);
    CHECK(r.transcripts.size() == 4);
    CHECK(reflections == 9);
    REQUIRE(r.tally.has_value());
    CHECK(r.tally->scores.at(L::kMalicious) == Confidence{nanos(0.8) + nanos(0.7)});
    CHECK(r.tally->scores.at(L::kSafe) == Confidence{nanos(0.9)});
    CHECK(r.final.model_id == "b");
}

TEST_CASE("max_rounds of zero votes immediately unless unanimous", "[run_consensus]") {
    ConsensusConfig cfg;
    cfg.max_rounds = 0;
    const Reflector fail = [](std::size_t, const ModelOutput&, std::span<const ModelOutput>, std::size_t) -> ModelOutput {
        throw std::logic_error("not expected");
    };
    const auto vote = run_consensus({out("a", L::kSafe, 0.9), out("b", L::kMalicious, 0.8)}, fail, echo_summarizer(), cfg);
    CHECK(vote.mode == ConsensusMode::kWeightedVote);
    CHECK(vote.rounds_used == 0);
    CHECK(vote.decided_label == L::kSafe);
    const auto same = run_consensus({out("a", L::kSafe, 0.9), out("b", L::kSafe, 0.8)}, fail, echo_summarizer(), cfg);
    CHECK(same.mode == ConsensusMode::kUnanimous);
}

TEST_CASE("failed reflections drop the model", "[run_consensus]") {
    const std::vector initial{out("a", L::kSafe, 0.9), out("b", L::kMalicious, 0.8), out("c", L::kMalicious, 0.7)};
    const Reflector drop_first = [](std::size_t i, const ModelOutput& own, std::span<const ModelOutput>, std::size_t) {
        if (i == 0) throw TransportError("down");
        return own;
    };
    const auto r = run_consensus(initial, drop_first, echo_summarizer(), {});
    CHECK(r.mode == ConsensusMode::kReflectedConsensus);
    CHECK(r.transcripts[1].size() == 2);
    REQUIRE_FALSE(r.notes.empty());
    CHECK(r.notes[0].find("model a dropped in round 1") != std::string::npos);

    const Reflector drop_two = [](std::size_t i, const ModelOutput& own, std::span<const ModelOutput>, std::size_t) {
        if (i != 2) throw TransportError("down");
        return own;
    };
    CHECK_THROWS_AS(run_consensus(initial, drop_two, echo_summarizer(), {}), ConsensusError);
    CHECK_THROWS_AS(run_consensus({out("a", L::kSafe, 0.9)}, drop_two, echo_summarizer(), {}), PreconditionError);
}

TEST_CASE("reflector sees original indices after a drop", "[run_consensus]") {
    std::vector<std::vector<ModelOutput>> script{
        {out("a", L::kSafe, 0.9)},
        {out("b", L::kMalicious, 0.8), out("b", L::kSuspicious, 0.5)},
        {out("c", L::kSuspicious, 0.7)},
    };
    std::atomic<int> third_seen{0};
    const Reflector r = [&](std::size_t i, const ModelOutput&, std::span<const ModelOutput>, std::size_t round) {
        if (i == 0) throw TransportError("gone");
        if (i == 2) ++third_seen;
        return script[i].at(std::min(round, script[i].size()) - 1);
    };
    const auto result = run_consensus({out("a", L::kSafe, 0.9), out("b", L::kMalicious, 0.8), out("c", L::kSuspicious, 0.7)}, r,
                                      echo_summarizer(), {});
    CHECK(result.mode == ConsensusMode::kReflectedConsensus);
    CHECK(result.rounds_used == 2);
    CHECK(result.decided_label == L::kSuspicious);
    CHECK(third_seen == 2);
}

TEST_CASE("weighted vote examples", "[weighted_vote]") {
    auto v = weighted_vote(std::vector{out("a", L::kMalicious, 0.8), out("b", L::kSafe, 0.9), out("c", L::kMalicious, 0.7)});
    CHECK(v.decided == L::kMalicious);
    CHECK(v.tally.scores.at(L::kMalicious) == Confidence{1'500'000'000});
    CHECK(v.tally.scores.at(L::kSafe) == Confidence{900'000'000});
    CHECK(v.output.model_id == "a");

    v = weighted_vote(std::vector{out("a", L::kSafe, 0.5), out("b", L::kSafe, 0.5), out("c", L::kSafe, 0.5)});
    CHECK(v.decided == L::kSafe);
    CHECK(v.tally.scores.size() == 1);
    CHECK(v.tally.scores.at(L::kSafe) == Confidence{1'500'000'000});
    CHECK(v.output.model_id == "a");

    const std::vector tie{out("a", L::kSafe, 0.6), out("b", L::kMalicious, 0.6)};
    CHECK(weighted_vote(tie, TieBreak::kHigherSeverity).decided == L::kMalicious);
    CHECK(weighted_vote(tie, TieBreak::kLowestModelIndex).decided == L::kSafe);

    CHECK_THROWS_AS(weighted_vote(std::vector<ModelOutput>{}), PreconditionError);
}

TEST_CASE("weighted vote agrees with an exhaustive tally", "[weighted_vote][property]") {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 2000; ++iter) {
        std::vector<ModelOutput> outs;
        for (std::size_t i = 0, n = 1 + rng() % 5; i < n; ++i)
            outs.push_back(support::output("m" + std::to_string(i), static_cast<L>(rng() % 3), static_cast<std::int64_t>(rng() % 11) * 100'000'000));
        // exhaustive: score every label, take the max, break ties toward the most severe
        std::array<std::int64_t, 3> score{};
        std::array<bool, 3> present{};
        for (const auto& o : outs) {
            score[static_cast<std::size_t>(o.risk)] += o.confidence.nanos;
            present[static_cast<std::size_t>(o.risk)] = true;
        }
        int expected = -1;
        for (int l = 0; l < 3; ++l)
            if (present[l] && (expected < 0 || score[l] >= score[expected])) expected = l;
        const auto v = weighted_vote(outs);
        CHECK(static_cast<int>(v.decided) == expected);
        CHECK(v.output.risk == v.decided);
        for (const auto& o : outs)
            if (o.risk == v.decided) CHECK(o.confidence <= v.output.confidence);
    }
}

TEST_CASE("summarize", "[summarize]") {
    const std::vector agree{out("a", L::kMalicious, 0.9), out("b", L::kMalicious, 0.8), out("c", L::kMalicious, 0.7)};
    std::vector<std::string> notes;
    CHECK(summarize(agree, "b", echo_summarizer(), &notes).risk == L::kMalicious);
    CHECK(notes.empty());

    const Summarizer says_safe = [](std::span<const ModelOutput> outs) {
        auto o = outs.front();
        o.risk = L::kSafe;
        return o;
    };
    const auto overwritten = summarize(agree, "b", says_safe, &notes);
    CHECK(overwritten.risk == L::kMalicious);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("label overwritten") != std::string::npos);

    const Summarizer broken = [](std::span<const ModelOutput>) -> ModelOutput { throw TransportError("summary timeout"); };
    notes.clear();
    CHECK(summarize(agree, "b", broken, &notes) == agree[1]);
    CHECK(notes.size() == 1);
    CHECK(summarize(agree, "nobody", broken, &notes) == agree[0]);

    CHECK_THROWS_AS(summarize(std::vector{out("a", L::kSafe, 1), out("b", L::kMalicious, 1)}, "a", broken), PreconditionError);
}

TEST_CASE("mode and tie-break names", "[names]") {
    for (auto m : {ConsensusMode::kUnanimous, ConsensusMode::kReflectedConsensus, ConsensusMode::kWeightedVote})
        CHECK(parse_consensus_mode(to_string(m)) == m);
    CHECK(to_string(ConsensusMode::kWeightedVote) == "WEIGHTED_VOTE");
    CHECK(parse_tie_break("LOWEST_MODEL_INDEX") == TieBreak::kLowestModelIndex);
    CHECK_FALSE(parse_tie_break("coin-flip").has_value());
}
