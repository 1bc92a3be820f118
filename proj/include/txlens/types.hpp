// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <txlens/hex.hpp>

namespace txlens {

using uint256 = boost::multiprecision::uint256_t;

//! Parses a base-10 string into a 256-bit value; rejects signs, blanks, and overflow
std::optional<uint256> parse_decimal_u256(std::string_view text);
std::string to_decimal(const uint256& value);

uint256 word_to_u256(const Word& word);
Word u256_to_word(const uint256& value);

enum class RiskLabel : std::uint8_t {
    kSafe = 0,
    kSuspicious = 1,
    kMalicious = 2,
};

//! "safe" / "suspicious" / "malicious"
std::string_view to_string(RiskLabel label) noexcept;
//! Case-insensitive
std::optional<RiskLabel> parse_risk_label(std::string_view text) noexcept;

//! Maximum under SAFE < SUSPICIOUS < MALICIOUS; throws PreconditionError on an empty list
RiskLabel max_severity(std::span<const RiskLabel> labels);

struct PageScript {
    enum class Kind : std::uint8_t { kInline, kExternal };
    Kind source_kind{Kind::kInline};
    std::string content;
    std::optional<std::string> url;

    bool operator==(const PageScript&) const = default;
};

struct TxEnvelope {
    std::uint64_t chain_id{1};
    Address sender;
    std::optional<Address> recipient;  // absent => contract creation
    uint256 value{0};
    Bytes calldata;
    std::uint64_t gas_limit{0};
    uint256 effective_gas_price{0};
    uint256 base_fee{0};
    std::uint64_t nonce{0};
    std::optional<std::string> origin_url;
    std::optional<std::vector<PageScript>> page_scripts;

    bool operator==(const TxEnvelope&) const = default;
};

enum class CallKind : std::uint8_t { kCall, kDelegateCall, kStaticCall, kCreate };

std::string_view to_string(CallKind kind) noexcept;
std::optional<CallKind> parse_call_kind(std::string_view text) noexcept;

struct CallNode {
    CallKind call_kind{CallKind::kCall};
    Address caller;
    Address callee;
    uint256 value{0};
    Bytes input;
    Bytes output;
    std::uint64_t gas_used{0};
    std::uint32_t depth{0};
    std::vector<CallNode> children;
    bool reverted{false};

    bool operator==(const CallNode&) const = default;
};

struct StorageWrite {
    Address contract;
    Word slot;
    Word old_value;
    Word new_value;

    bool operator==(const StorageWrite&) const = default;
};

struct LogEntry {
    Address emitter;
    std::vector<Word> topics;  // at most 4
    Bytes data;

    bool operator==(const LogEntry&) const = default;
};

struct CodeSnippet {
    std::optional<std::string> verified_source;
    std::optional<std::string> decompiled;

    bool operator==(const CodeSnippet&) const = default;
};

enum class TraceStatus : std::uint8_t { kSuccess, kRevert };

struct ExecutionTrace {
    CallNode root;
    std::vector<StorageWrite> storage_writes;
    std::vector<LogEntry> logs;
    std::uint64_t gas_used{0};
    TraceStatus status{TraceStatus::kSuccess};
    std::map<Address, CodeSnippet> code_snippets;

    bool operator==(const ExecutionTrace&) const = default;
};

//! First 4 bytes of calldata, or nullopt when shorter than 4
std::optional<Selector> selector_of(ByteView calldata);

//! Returns one descriptor per broken invariant, each naming the invariant and the node; empty means valid.
//! Descriptors have the form "<invariant>" or "<invariant>@<node-path>", e.g. "depth-monotonicity@root.0".
std::vector<std::string> validate_trace(const ExecutionTrace& trace, const TxEnvelope& tx);

//! Visits nodes in pre-order; fn(node, path) where path is "root", "root.0", "root.0.1", ...
template <typename Fn>
void walk_preorder(const CallNode& node, Fn&& fn, const std::string& path = "root") {
    fn(node, path);
    for (std::size_t i = 0; i < node.children.size(); ++i)
        walk_preorder(node.children[i], fn, path + "." + std::to_string(i));
}

}  // namespace txlens
