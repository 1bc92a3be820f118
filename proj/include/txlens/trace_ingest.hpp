// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <txlens/types.hpp>

namespace txlens {

struct TracedTx {
    TxEnvelope tx;
    ExecutionTrace trace;

    bool operator==(const TracedTx&) const = default;
};

inline constexpr int kTraceSchemaVersion = 1;

//! Parses a normalized trace document and validates it.
//! Throws SchemaError naming the JSON path of the first bad field, or ValidationError with every violation.
TracedTx parse_normalized_trace(std::string_view document);

//! Same as above for an already-parsed document
TracedTx parse_normalized_trace(const nlohmann::json& document);

//! Canonical serialization; parse_normalized_trace(serialize_normalized_trace(x)) == x
std::string serialize_normalized_trace(const TracedTx& traced);

struct TraceSource {
    enum class Kind : std::uint8_t { kFixtureFile, kLocalSimulator, kRemoteSimulator, kChainExplorer };

    Kind kind{Kind::kFixtureFile};
    std::string locator;  // file/directory path or URL
    std::optional<std::string> credentials;

    //! Throws ConfigError when a network kind has a locator that is not an http(s) URL
    void check() const;
};

std::string_view to_string(TraceSource::Kind kind) noexcept;

//! Minimal JSON-RPC transport so adapters can be exercised without a node
class RpcClient {
  public:
    virtual ~RpcClient() = default;
    //! Returns the "result" member; throws TransportError on network failure or an RPC error object
    virtual nlohmann::json call(const std::string& method, const nlohmann::json& params) = 0;
};

//! JSON-RPC over HTTP(S); `api_key`, when present, is sent as X-Access-Key
std::unique_ptr<RpcClient> make_http_rpc_client(const std::string& url, std::optional<std::string> api_key);

//! A transaction to simulate instead of replay
struct CallSpec {
    Address from;
    Address to;
    uint256 value{0};
    Bytes data;
    std::uint64_t gas{30'000'000};
};

//! A recorded geth-compatible bundle (anvil fork, Tenderly node RPC, geth) has members
//! "transaction" (eth_getTransactionByHash result, synthesized in simulation mode), optional "receipt",
//! "block" (for baseFeePerGas), "call_trace" (callTracer frame with withLog: true) and optional
//! "state_diff" (prestateTracer diffMode result).
//! adapt_geth_bundle converts one into the normalized pair; throws AdapterError when the shape is not recognised.
TracedTx adapt_geth_bundle(const nlohmann::json& bundle);

//! Collects a bundle from a live node for a historical transaction hash
nlohmann::json collect_historical_bundle(RpcClient& rpc, const std::string& tx_hash);

//! Collects a bundle from a live node by tracing a call at the latest block
nlohmann::json collect_simulation_bundle(RpcClient& rpc, const CallSpec& call);

//! 0x-prefixed 32-byte hex
bool is_tx_hash(std::string_view text) noexcept;

//! Historical mode. FIXTURE_FILE: the locator file itself, or <locator>/<hash>.json (<locator>/<tx_reference>)
//! when the locator is a directory. Simulators: tx_reference must be a 32-byte hash (PreconditionError otherwise).
//! CHAIN_EXPLORER sources cannot produce execution traces (AdapterError).
TracedTx fetch_trace(const TraceSource& source, const std::string& tx_reference);

//! As above with an injected transport for simulator kinds
TracedTx fetch_trace(const TraceSource& source, const std::string& tx_reference, RpcClient& rpc);

//! Simulation mode against a simulator source
TracedTx simulate_call(const TraceSource& source, const CallSpec& call, RpcClient& rpc);
TracedTx simulate_call(const TraceSource& source, const CallSpec& call);

// --- code snippet enrichment ---

//! Returns verified source, nullopt when the contract is not verified; throws on failure
class ExplorerClient {
  public:
    virtual ~ExplorerClient() = default;
    virtual std::optional<std::string> verified_source(const Address& contract) = 0;
};

//! Returns an approximate decompilation, nullopt when none is available; throws on failure
class DecompilerClient {
  public:
    virtual ~DecompilerClient() = default;
    virtual std::optional<std::string> decompile(const Address& contract) = 0;
};

//! Etherscan-compatible getsourcecode endpoint
std::unique_ptr<ExplorerClient> make_etherscan_client(const std::string& api_url, std::optional<std::string> api_key);

//! Runs an external decompiler; "{address}" in the command template is substituted, stdout is the result
std::unique_ptr<DecompilerClient> make_command_decompiler(std::string command_template);

struct EnrichmentResult {
    ExecutionTrace trace;
    std::vector<std::string> warnings;
};

//! Fills code_snippets for every distinct callee lacking an entry: verified source first, decompiled
//! fallback, nothing if both fail. Per-address lookups run concurrently, so clients must tolerate concurrent
//! calls; existing entries are kept.
EnrichmentResult enrich_code_snippets(const ExecutionTrace& trace, ExplorerClient* explorer, DecompilerClient* decompiler);

}  // namespace txlens
