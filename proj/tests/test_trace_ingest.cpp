// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/trace_ingest.hpp>

#include "helpers.hpp"
#include "replay.hpp"

using namespace txlens;
using nlohmann::json;

namespace {

const std::string kSender = "0x00000000000000000000000000000000000000aa";
const std::string kRecipient = "0x00000000000000000000000000000000000000bb";

json minimal_document() {
    return json::parse(R"({
      "schema_version": 1,
      "tx": {"chain_id": 1, "from": "0x00000000000000000000000000000000000000aa",
             "to": "0x00000000000000000000000000000000000000bb", "value": "1000000000000000000",
             "calldata": "0x", "gas_limit": 21000, "effective_gas_price": "1", "base_fee": "1", "nonce": 0,
             "origin_url": null, "page_scripts": null},
      "trace": {"status": "SUCCESS", "gas_used": 21000,
                "root": {"call_kind": "CALL", "caller": "0x00000000000000000000000000000000000000aa",
                         "callee": "0x00000000000000000000000000000000000000bb", "value": "1000000000000000000",
                         "input": "0x", "output": "0x", "gas_used": 21000, "reverted": false, "children": []},
                "storage_writes": [], "logs": []}
    })");
}

Address random_address(std::mt19937_64& rng, const std::vector<Address>& pool) { return pool[rng() % pool.size()]; }

Bytes random_bytes(std::mt19937_64& rng, std::size_t max) {
    Bytes b(rng() % (max + 1));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
}

CallNode random_node(std::mt19937_64& rng, const std::vector<Address>& pool, std::uint32_t depth, bool parent_reverted) {
    CallNode n;
    n.call_kind = static_cast<CallKind>(rng() % 4);
    n.caller = random_address(rng, pool);
    n.callee = random_address(rng, pool);
    if (n.call_kind != CallKind::kStaticCall) n.value = rng() % 3 == 0 ? uint256{rng()} << (rng() % 128) : 0;
    n.input = random_bytes(rng, 40);
    n.output = random_bytes(rng, 10);
    n.gas_used = rng() % 100000;
    n.depth = depth;
    n.reverted = parent_reverted || rng() % 7 == 0;
    if (depth < 3)
        for (std::size_t i = 0, k = rng() % 3; i < k; ++i) n.children.push_back(random_node(rng, pool, depth + 1, n.reverted));
    return n;
}

TracedTx random_traced(std::mt19937_64& rng) {
    std::vector<Address> pool;
    for (int i = 0; i < 5; ++i) {
        Address a;
        for (auto& b : a.bytes) b = static_cast<std::uint8_t>(rng());
        pool.push_back(a);
    }
    TracedTx t;
    t.tx.chain_id = 1 + rng() % 10;
    t.tx.sender = pool[0];
    if (rng() % 5 != 0) t.tx.recipient = pool[1];
    t.tx.value = rng() % 2 ? uint256{rng()} : 0;
    t.tx.calldata = random_bytes(rng, 68);
    t.tx.gas_limit = 21000 + rng() % 1'000'000;
    t.tx.effective_gas_price = rng() % 200'000'000'000ULL;
    t.tx.base_fee = rng() % 100'000'000'000ULL;
    t.tx.nonce = rng() % 1000;
    if (rng() % 2) t.tx.origin_url = "https://app.example.org/p" + std::to_string(rng() % 100);
    if (rng() % 2) {
        t.tx.page_scripts.emplace();
        t.tx.page_scripts->push_back({PageScript::Kind::kInline, "let a = \"q\\n\";\n", std::nullopt});
        t.tx.page_scripts->push_back({PageScript::Kind::kExternal, "x()", "https://cdn.example.org/x.js"});
    }
    t.trace.root = random_node(rng, pool, 0, false);
    t.trace.gas_used = rng() % (t.tx.gas_limit + 1);
    t.trace.status = rng() % 4 == 0 ? TraceStatus::kRevert : TraceStatus::kSuccess;
    std::vector<Address> callees;
    walk_preorder(t.trace.root, [&](const CallNode& n, const std::string&) { callees.push_back(n.callee); });
    for (std::size_t i = 0, k = rng() % 4; i < k; ++i) {
        StorageWrite w;
        w.contract = callees[rng() % callees.size()];
        w.slot.bytes[31] = static_cast<std::uint8_t>(rng());
        w.old_value.bytes[0] = static_cast<std::uint8_t>(rng());
        w.new_value.bytes[5] = static_cast<std::uint8_t>(rng());
        t.trace.storage_writes.push_back(w);
    }
    for (std::size_t i = 0, k = rng() % 4; i < k; ++i) {
        LogEntry l;
        l.emitter = callees[rng() % callees.size()];
        l.topics.resize(rng() % 5);
        for (auto& topic : l.topics) topic.bytes[rng() % 32] = static_cast<std::uint8_t>(rng());
        l.data = random_bytes(rng, 64);
        t.trace.logs.push_back(l);
    }
    if (rng() % 2) t.trace.code_snippets[callees[0]] = CodeSnippet{"contract X {}", std::nullopt};
    return t;
}

struct StubExplorer final : ExplorerClient {
    std::map<Address, std::optional<std::string>> answers;
    bool fail{false};
    std::optional<std::string> verified_source(const Address& a) override {
        if (fail) throw TransportError("explorer down");
        auto it = answers.find(a);
        return it == answers.end() ? std::nullopt : it->second;
    }
};

struct StubDecompiler final : DecompilerClient {
    std::optional<std::string> text;
    bool fail{false};
    std::optional<std::string> decompile(const Address&) override {
        if (fail) throw TransportError("decompiler crashed");
        return text;
    }
};

}  // namespace

TEST_CASE("parse_normalized_trace echoes a minimal document", "[trace_json]") {
    const auto t = parse_normalized_trace(minimal_document());
    CHECK(t.tx.value == uint256{1'000'000'000'000'000'000ULL});
    CHECK(t.trace.root.children.empty());
    CHECK(t.trace.logs.empty());
    CHECK(t.tx.sender == support::address(kSender));
    CHECK(t.tx.recipient == support::address(kRecipient));
}

TEST_CASE("storage writes are echoed", "[trace_json]") {
    auto doc = minimal_document();
    doc["trace"]["storage_writes"] = json::array({{{"contract", kRecipient},
                                                   {"slot", "0x" + std::string(64, '0')},
                                                   {"old", "0xaa"},
                                                   {"new", "0xbb"}}});
    const auto t = parse_normalized_trace(doc);
    REQUIRE(t.trace.storage_writes.size() == 1);
    CHECK(t.trace.storage_writes[0].slot.is_zero());
    CHECK(t.trace.storage_writes[0].old_value == support::word("0xaa"));
    CHECK(t.trace.storage_writes[0].new_value == support::word("0xbb"));
}

TEST_CASE("schema errors name the JSON path", "[trace_json]") {
    auto where = [](const json& doc) {
        try {
            parse_normalized_trace(doc);
        } catch (const SchemaError& e) {
            return e.where();
        }
        return std::string{"<no error>"};
    };
    auto doc = minimal_document();
    doc["tx"].erase("gas_limit");
    CHECK(where(doc) == "$.tx.gas_limit");

    doc = minimal_document();
    doc["trace"]["root"]["call_kind"] = "JUMP";
    CHECK(where(doc) == "$.trace.root.call_kind");

    doc = minimal_document();
    doc["tx"]["value"] = "-5";
    CHECK(where(doc) == "$.tx.value");

    doc = minimal_document();
    doc["schema_version"] = 2;
    CHECK(where(doc) == "$.schema_version");

    CHECK_THROWS_AS(parse_normalized_trace(std::string_view{"{not json"}), SchemaError);
}

TEST_CASE("documents breaking trace invariants are rejected with every violation", "[trace_json]") {
    auto doc = minimal_document();
    doc["trace"]["gas_used"] = 21001;
    try {
        parse_normalized_trace(doc);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations() == std::vector<std::string>{"gas-exceeds-limit"});
    }
}

TEST_CASE("parse after serialize is the identity", "[trace_json][property]") {
    std::mt19937_64 rng(2026);
    for (int i = 0; i < 300; ++i) {
        const auto t = random_traced(rng);
        REQUIRE(validate_trace(t.trace, t.tx).empty());
        const auto text = serialize_normalized_trace(t);
        CHECK(parse_normalized_trace(std::string_view{text}) == t);
        CHECK(serialize_normalized_trace(parse_normalized_trace(std::string_view{text})) == text);
    }
}

TEST_CASE("FIXTURE_FILE source is a passthrough", "[trace_source]") {
    const auto path = support::data_dir() / "fixtures" / "approval_phish.json";
    const auto direct = parse_normalized_trace(std::string_view{support::read_text(path)});
    CHECK(fetch_trace({TraceSource::Kind::kFixtureFile, path.string(), std::nullopt}, "anything") == direct);
    // directory locator resolves <reference> inside it
    CHECK(fetch_trace({TraceSource::Kind::kFixtureFile, (support::data_dir() / "fixtures").string(), std::nullopt},
                      "approval_phish.json") == direct);
    CHECK_THROWS_AS(fetch_trace({TraceSource::Kind::kFixtureFile, "/nonexistent/x.json", std::nullopt}, "x"), TransportError);
}

TEST_CASE("source kinds validate references and locators", "[trace_source]") {
    CHECK_THROWS_AS(fetch_trace({TraceSource::Kind::kChainExplorer, "https://api.etherscan.io/api", std::nullopt}, "0x123"),
                    PreconditionError);
    CHECK_THROWS_AS(fetch_trace({TraceSource::Kind::kChainExplorer, "https://api.etherscan.io/api", std::nullopt},
                                "0x" + std::string(64, 'a')),
                    AdapterError);
    CHECK_THROWS_AS(fetch_trace({TraceSource::Kind::kLocalSimulator, "not a url", std::nullopt}, "0x" + std::string(64, 'a')),
                    ConfigError);
    CHECK_THROWS_AS(fetch_trace({TraceSource::Kind::kLocalSimulator, "http://127.0.0.1:1/", std::nullopt}, "0xabc"),
                    PreconditionError);
    CHECK(is_tx_hash("0x" + std::string(64, 'F')));
    CHECK_FALSE(is_tx_hash(std::string(64, 'f')));
}

TEST_CASE("geth adapter matches the hand-normalized golden file", "[trace_source][adapter]") {
    const auto recording = support::Recording::load(support::data_dir() / "geth" / "historical_rpc.json");
    const auto golden = parse_normalized_trace(std::string_view{support::read_text(support::data_dir() / "geth" / "historical_golden.json")});
    const std::string hash = recording.exchanges.front().params[0].get<std::string>();

    support::ReplayRpc rpc(recording);
    const auto adapted = fetch_trace({TraceSource::Kind::kLocalSimulator, "http://127.0.0.1:8545", std::nullopt}, hash, rpc);
    CHECK(rpc.calls() == 5);
    CHECK(adapted.tx == golden.tx);
    CHECK(adapted.trace.root == golden.trace.root);
    CHECK(adapted.trace.logs == golden.trace.logs);
    CHECK(adapted.trace.storage_writes == golden.trace.storage_writes);
    CHECK(adapted == golden);
    // depths assigned by nesting, reverted flag inherited by the probe's child
    CHECK(adapted.trace.root.children[0].children[0].depth == 2);
    CHECK(adapted.trace.root.children[2].children[0].reverted);
}

TEST_CASE("geth adapter over real HTTP against a loopback replay server", "[trace_source][adapter]") {
    const auto recording = support::Recording::load(support::data_dir() / "geth" / "historical_rpc.json");
    const auto golden = parse_normalized_trace(std::string_view{support::read_text(support::data_dir() / "geth" / "historical_golden.json")});
    const std::string hash = recording.exchanges.front().params[0].get<std::string>();
    support::ReplayServer server(recording);
    const auto adapted = fetch_trace({TraceSource::Kind::kRemoteSimulator, server.url(), std::string{"k-123"}}, hash);
    CHECK(adapted == golden);
    CHECK(server.requests() == 5);
    CHECK(server.last_access_key() == "k-123");
}

TEST_CASE("simulation collects a bundle at the latest block", "[trace_source][adapter]") {
    support::ReplayRpc rpc(support::Recording::load(support::data_dir() / "geth" / "simulation_rpc.json"));
    CallSpec call;
    call.from = support::address(support::corpus_address("victim"));
    call.to = support::address(support::corpus_address("token:usdc"));
    call.data = *from_hex("095ea7b3" + std::string(24, '0') + support::corpus_address("drainer").substr(2) + std::string(64, 'f'));
    const auto t = simulate_call({TraceSource::Kind::kLocalSimulator, "http://127.0.0.1:8545", std::nullopt}, call, rpc);
    CHECK(t.tx.sender == call.from);
    CHECK(t.tx.recipient == call.to);
    CHECK(t.tx.calldata == call.data);
    CHECK(t.tx.gas_limit == 30'000'000);
    CHECK(t.tx.nonce == 7);
    CHECK(t.tx.effective_gas_price == uint256{22'000'000'000ULL});
    CHECK(t.tx.base_fee == uint256{20'000'000'000ULL});
    CHECK(t.trace.gas_used == 46120);
    CHECK(t.trace.logs.size() == 1);
    CHECK(t.trace.storage_writes.size() == 1);

    CHECK_THROWS_AS(simulate_call({TraceSource::Kind::kFixtureFile, "x.json", std::nullopt}, call, rpc), PreconditionError);
}

TEST_CASE("geth adapter rejects unrecognised shapes", "[trace_source][adapter]") {
    CHECK_THROWS_AS(adapt_geth_bundle(json::array()), AdapterError);
    CHECK_THROWS_AS(adapt_geth_bundle(json{{"transaction", json::object()}}), AdapterError);
    auto bundle = json{{"transaction", {{"from", kSender}, {"to", kRecipient}, {"gas", "0x5208"}}},
                       {"call_trace", {{"type", "SELFDESTRUCT_ME"}, {"from", kSender}, {"to", kRecipient}}}};
    CHECK_THROWS_AS(adapt_geth_bundle(bundle), AdapterError);
    bundle["call_trace"]["type"] = "CALL";
    bundle["state_diff"] = json{{"pre", json::object()}};
    CHECK_THROWS_AS(adapt_geth_bundle(bundle), AdapterError);
    bundle.erase("state_diff");
    CHECK(adapt_geth_bundle(bundle).tx.gas_limit == 21000);
}

TEST_CASE("code enrichment prefers verified source, then decompilation", "[enrichment]") {
    const auto t = support::load_fixture("transfer");
    const Address callee = t.trace.root.callee;

    SECTION("verified source") {
        StubExplorer explorer;
        explorer.answers[callee] = "contract Token {}";
        const auto r = enrich_code_snippets(t.trace, &explorer, nullptr);
        CHECK(r.trace.code_snippets.at(callee).verified_source == "contract Token {}");
        CHECK_FALSE(r.trace.code_snippets.at(callee).decompiled.has_value());
    }
    SECTION("unverified falls back to the decompiler") {
        StubExplorer explorer;
        StubDecompiler decompiler;
        decompiler.text = "function f() {}";
        const auto r = enrich_code_snippets(t.trace, &explorer, &decompiler);
        CHECK(r.trace.code_snippets.at(callee).decompiled == "function f() {}");
        CHECK_FALSE(r.trace.code_snippets.at(callee).verified_source.has_value());
    }
    SECTION("both fail") {
        StubExplorer explorer;
        explorer.fail = true;
        StubDecompiler decompiler;
        decompiler.fail = true;
        const auto r = enrich_code_snippets(t.trace, &explorer, &decompiler);
        CHECK(r.trace.code_snippets == t.trace.code_snippets);
        CHECK_FALSE(r.warnings.empty());
    }
    SECTION("existing entries are kept") {
        auto trace = t.trace;
        trace.code_snippets[callee] = CodeSnippet{"kept", std::nullopt};
        StubExplorer explorer;
        explorer.answers[callee] = "replaced";
        CHECK(enrich_code_snippets(trace, &explorer, nullptr).trace.code_snippets.at(callee).verified_source == "kept");
    }
}

TEST_CASE("Etherscan client against recorded responses", "[enrichment][adapter]") {
    const Address contract = support::address(support::corpus_address("token:usdc"));
    {
        support::StaticServer server(200, support::read_text(support::data_dir() / "explorer" / "verified.json"));
        auto client = make_etherscan_client(server.url(), std::string{"key&1"});
        const auto source = client->verified_source(contract);
        REQUIRE(source.has_value());
        CHECK(source->starts_with("contract Vault"));
        CHECK(server.last_target() ==
              "/api?module=contract&action=getsourcecode&address=" + contract.hex() + "&apikey=key%261");
    }
    {
        support::StaticServer server(200, support::read_text(support::data_dir() / "explorer" / "unverified.json"));
        CHECK_FALSE(make_etherscan_client(server.url(), std::nullopt)->verified_source(contract).has_value());
    }
    {
        support::StaticServer server(200, support::read_text(support::data_dir() / "explorer" / "bad_key.json"));
        CHECK_THROWS_AS(make_etherscan_client(server.url(), std::nullopt)->verified_source(contract), TransportError);
    }
    {
        support::StaticServer server(503, "busy");
        CHECK_THROWS_AS(make_etherscan_client(server.url(), std::nullopt)->verified_source(contract), TransportError);
    }
}

TEST_CASE("command decompiler substitutes the address", "[enrichment][adapter]") {
    const Address contract = support::address(support::corpus_address("token:usdc"));
    CHECK(make_command_decompiler("echo decompiled {address}")->decompile(contract) == "decompiled " + contract.hex() + "\n");
    CHECK_FALSE(make_command_decompiler("true")->decompile(contract).has_value());
    CHECK_THROWS_AS(make_command_decompiler("exit 3")->decompile(contract), TransportError);
}
