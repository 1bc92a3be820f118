// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <random>
#include <set>

#include <catch_amalgamated.hpp>

#include <txlens/errors.hpp>
#include <txlens/threat_db.hpp>

#include "helpers.hpp"
#include "keccak_oracle.hpp"

using namespace txlens;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    std::ofstream(dir / name) << content;
    return dir / name;
}

ThreatDB corpus_db() { return load_db(db_files_in(support::data_dir() / "db")); }

std::set<std::string> hit_keys(const std::vector<ThreatHit>& hits) {
    std::set<std::string> out;
    for (const auto& h : hits) out.insert(std::string{to_string(h.kind)} + "|" + h.subject + "|" + h.label + "|" + h.source);
    return out;
}

}  // namespace

TEST_CASE("loading", "[load]") {
    CHECK(load_db({}).empty());

    const auto dir = support::scratch_dir("db");
    const std::string a = "0x00000000000000000000000000000000000000a1";
    const auto f1 = write_file(dir, "one_addresses.txt", a + "\tfeed-1\n");
    const auto f2 = write_file(dir, "two_addresses.txt", "# comment\n\n" + a + "\tfeed-2\n");
    const auto db = load_db({f1, f2});
    REQUIRE(db.blacklisted_addresses.size() == 1);
    CHECK(db.blacklisted_addresses.begin()->second == "feed-2");

    const auto bad = write_file(dir, "bad_addresses.txt", a + "\n0xzz\n");
    try {
        load_db({bad});
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(e.file() == bad.string());
        CHECK(e.line() == 2);
    }

    CHECK_THROWS_AS(load_db({write_file(dir, "p_patterns.json", "[{\"selector\": \"0x095ea7b3\", \"label\": \"x\", \"severity\": \"SAFE\"}]")}),
                    LoadError);
    CHECK_THROWS_AS(load_db({write_file(dir, "q_patterns.json", "[{\"selector\": \"0x095ea7b3\", \"calldata_regex\": \"(\", \"label\": \"x\", \"severity\": \"MALICIOUS\"}]")}),
                    LoadError);
    CHECK_THROWS_AS(load_db({write_file(dir, "t_tags.json", "{\"0x12\": [\"x\"]}")}), LoadError);
    CHECK_THROWS_AS(load_db({write_file(dir, "broken_tags.json", "{\n\"a\": \n")}), LoadError);
    CHECK_THROWS_AS(load_db({dir / "missing_addresses.txt"}), LoadError);
    CHECK_THROWS_AS(load_db({write_file(dir, "unknown.csv", "")}), LoadError);
}

TEST_CASE("corpus indicators", "[load]") {
    const auto files = db_files_in(support::data_dir() / "db");
    CHECK(files.size() == 4);
    CHECK(std::is_sorted(files.begin(), files.end()));
    const auto db = corpus_db();
    CHECK(db.blacklisted_addresses.size() == 2);
    CHECK(db.blacklisted_domains.contains("claim-rewards.xyz"));
    CHECK(db.selector_patterns.size() == 3);
}

TEST_CASE("address matching is case-insensitive", "[query]") {
    const auto db = corpus_db();
    // the feed lists this address in upper case; the trace uses lower case
    const auto scammer = support::corpus_address("scammer:eoa");
    REQUIRE(support::read_text(support::data_dir() / "db" / "addresses.txt").find("0x373B39FAFBAD") != std::string::npos);
    TxEnvelope tx;
    tx.sender = support::address(support::corpus_address("victim"));
    tx.recipient = support::address(scammer);
    ExecutionTrace trace;
    trace.root.caller = tx.sender;
    trace.root.callee = *tx.recipient;
    const auto hits = query_all(db, tx, trace, {});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].kind == ThreatHit::Kind::kAddress);
    CHECK(hits[0].subject == scammer);
    CHECK(hits[0].source == "chainabuse");
}

TEST_CASE("domain and tag hits", "[query]") {
    const auto db = corpus_db();
    UIFindings ui;
    ui.present = true;
    ui.main_domain = "free-apes.io";
    ExecutionTrace trace;
    trace.root.callee = support::address(support::corpus_address("drainer-2"));
    const auto hits = query_all(db, {}, trace, ui);
    std::vector<ThreatHit::Kind> kinds;
    for (const auto& h : hits) kinds.push_back(h.kind);
    CHECK(kinds == std::vector{ThreatHit::Kind::kTag, ThreatHit::Kind::kTag, ThreatHit::Kind::kDomain});
    CHECK(hits[0].label == "inferno-drainer");
    CHECK(hits[2].subject == "free-apes.io");
}

TEST_CASE("drainer-spender pattern hits the approval fixture", "[query][fixture]") {
    const auto traced = support::load_fixture("approval_phish");
    const auto& approve = traced.trace.root.children.at(0);
    const std::string input_hex = to_hex(approve.input);
    // by hand: selector, then the spender word left-padded with 24 zero digits
    const std::string drainer = support::corpus_address("drainer").substr(2);
    REQUIRE(input_hex.substr(0, 8) == oracle::selector_hex("approve(address,uint256)"));
    REQUIRE(input_hex.substr(8, 64) == std::string(24, '0') + drainer);

    ThreatDB db;
    db.selector_patterns.push_back({*Selector::parse_exact("095ea7b3"), "^095ea7b3000000000000000000000000" + drainer,
                                    "approve to drainer spender", RiskLabel::kMalicious, "test"});
    const auto hits = query_all(db, traced.tx, traced.trace, {});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].kind == ThreatHit::Kind::kPattern);
    CHECK(hits[0].severity == RiskLabel::kMalicious);
    CHECK(hits[0].subject == support::corpus_address("token:usdc") + ":095ea7b3");

    // a spender that is not the drainer does not match
    db.selector_patterns[0].calldata_regex = "^095ea7b3000000000000000000000000" + std::string(40, '1');
    CHECK(query_all(db, traced.tx, traced.trace, {}).empty());

    const auto corpus_hits = query_all(corpus_db(), traced.tx, traced.trace, extract_ui_features(traced.tx));
    CHECK(std::count_if(corpus_hits.begin(), corpus_hits.end(), [](const ThreatHit& h) { return h.kind == ThreatHit::Kind::kPattern; }) == 1);
    CHECK(std::count_if(corpus_hits.begin(), corpus_hits.end(), [](const ThreatHit& h) { return h.kind == ThreatHit::Kind::kDomain; }) == 1);
}

TEST_CASE("adding entries never removes hits", "[query][property]") {
    std::mt19937_64 rng(1234);
    std::vector<Address> pool;
    for (int i = 0; i < 8; ++i) pool.push_back(support::address(support::corpus_address("pool-" + std::to_string(i))));
    const std::vector<std::string> domains{"a.io", "b.xyz", "c.net", "d.org"};
    const std::vector<Selector> sels{selectors::kApprove, selectors::kTransfer, selectors::kSetApprovalForAll};

    auto grow = [&](ThreatDB db) {
        const auto r = rng() % 4;
        if (r == 0) db.blacklisted_addresses.emplace(pool[rng() % pool.size()], "feed");
        if (r == 1) db.blacklisted_domains.emplace(domains[rng() % domains.size()], "feed");
        if (r == 2) db.contract_tags[pool[rng() % pool.size()]].push_back("tag" + std::to_string(rng() % 3));
        if (r == 3) {
            std::optional<std::string> regex;
            if (rng() % 2) regex = "^" + to_hex(sels[rng() % sels.size()].bytes) + std::string(24, '0') + pool[rng() % pool.size()].hex().substr(2);
            db.selector_patterns.push_back({sels[rng() % sels.size()], regex, "p", RiskLabel::kSuspicious, "feed"});
        }
        return db;
    };

    for (int iter = 0; iter < 300; ++iter) {
        ThreatDB small;
        for (int k = 0, n = static_cast<int>(rng() % 6); k < n; ++k) small = grow(std::move(small));
        ThreatDB big = small;
        for (int k = 0, n = 1 + static_cast<int>(rng() % 6); k < n; ++k) big = grow(std::move(big));

        TxEnvelope tx;
        tx.sender = pool[rng() % pool.size()];
        tx.recipient = pool[rng() % pool.size()];
        ExecutionTrace trace;
        trace.root.caller = tx.sender;
        trace.root.callee = *tx.recipient;
        for (int c = 0, n = static_cast<int>(rng() % 3); c < n; ++c) {
            CallNode child;
            child.depth = 1;
            child.caller = *tx.recipient;
            child.callee = pool[rng() % pool.size()];
            const auto sel = sels[rng() % sels.size()];
            child.input.assign(sel.bytes.begin(), sel.bytes.end());
            child.input.resize(4 + 12, 0);
            const auto& target = pool[rng() % pool.size()];
            child.input.insert(child.input.end(), target.bytes.begin(), target.bytes.end());
            trace.root.children.push_back(child);
        }
        UIFindings ui;
        if (rng() % 2) {
            ui.present = true;
            ui.main_domain = domains[rng() % domains.size()];
        }

        const auto before = hit_keys(query_all(small, tx, trace, ui));
        const auto after = hit_keys(query_all(big, tx, trace, ui));
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}
