// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <txlens/types.hpp>

#include <algorithm>
#include <cctype>
#include <set>

#include <txlens/errors.hpp>

namespace txlens {

std::optional<uint256> parse_decimal_u256(std::string_view text) {
    if (text.empty() || text.size() > 78) return std::nullopt;
    boost::multiprecision::uint512_t acc = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        acc = acc * 10 + static_cast<unsigned>(c - '0');
    }
    if (acc > boost::multiprecision::uint512_t{std::numeric_limits<uint256>::max()}) return std::nullopt;
    return static_cast<uint256>(acc);
}

std::string to_decimal(const uint256& value) { return value.str(); }

uint256 word_to_u256(const Word& word) {
    uint256 out = 0;
    for (auto b : word.bytes) out = (out << 8) | b;
    return out;
}

Word u256_to_word(const uint256& value) {
    Word out;
    uint256 v = value;
    for (std::size_t i = 0; i < 32; ++i) {
        out.bytes[31 - i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string_view to_string(RiskLabel label) noexcept {
    switch (label) {
        case RiskLabel::kSafe:
            return "safe";
        case RiskLabel::kSuspicious:
            return "suspicious";
        case RiskLabel::kMalicious:
            return "malicious";
    }
    return "safe";
}

std::optional<RiskLabel> parse_risk_label(std::string_view text) noexcept {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "safe") return RiskLabel::kSafe;
    if (lower == "suspicious") return RiskLabel::kSuspicious;
    if (lower == "malicious") return RiskLabel::kMalicious;
    return std::nullopt;
}

RiskLabel max_severity(std::span<const RiskLabel> labels) {
    if (labels.empty()) throw PreconditionError("max_severity: empty label list");
    return *std::max_element(labels.begin(), labels.end());
}

std::string_view to_string(CallKind kind) noexcept {
    switch (kind) {
        case CallKind::kCall:
            return "CALL";
        case CallKind::kDelegateCall:
            return "DELEGATECALL";
        case CallKind::kStaticCall:
            return "STATICCALL";
        case CallKind::kCreate:
            return "CREATE";
    }
    return "CALL";
}

std::optional<CallKind> parse_call_kind(std::string_view text) noexcept {
    std::string upper;
    for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "CALL") return CallKind::kCall;
    if (upper == "DELEGATECALL") return CallKind::kDelegateCall;
    if (upper == "STATICCALL") return CallKind::kStaticCall;
    if (upper == "CREATE" || upper == "CREATE2") return CallKind::kCreate;
    return std::nullopt;
}

std::optional<Selector> selector_of(ByteView calldata) {
    if (calldata.size() < 4) return std::nullopt;
    return Selector::from_span(calldata.first(4));
}

std::vector<std::string> validate_trace(const ExecutionTrace& trace, const TxEnvelope& tx) {
    std::vector<std::string> violations;
    std::set<Address> callees;

    if (trace.root.depth != 0) violations.emplace_back("root-depth@root");

    walk_preorder(trace.root, [&](const CallNode& node, const std::string& path) {
        callees.insert(node.callee);
        if (node.call_kind == CallKind::kStaticCall && node.value != 0)
            violations.push_back("staticcall-value@" + path);
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            if (node.children[i].depth != node.depth + 1)
                violations.push_back("depth-monotonicity@" + path + "." + std::to_string(i));
        }
    });

    if (trace.gas_used > tx.gas_limit) violations.emplace_back("gas-exceeds-limit");
    if (tx.value > 0 && tx.gas_limit < 21000) violations.emplace_back("gas-limit-below-intrinsic");

    for (std::size_t i = 0; i < trace.storage_writes.size(); ++i) {
        if (!callees.contains(trace.storage_writes[i].contract))
            violations.push_back("storage-contract-not-in-call-tree@storage_writes." + std::to_string(i));
    }
    for (std::size_t i = 0; i < trace.logs.size(); ++i) {
        if (trace.logs[i].topics.size() > 4) violations.push_back("log-topic-count@logs." + std::to_string(i));
    }
    return violations;
}

}  // namespace txlens
