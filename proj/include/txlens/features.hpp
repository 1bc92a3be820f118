// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <txlens/threat_db.hpp>
#include <txlens/types.hpp>
#include <txlens/ui_features.hpp>

namespace txlens {

namespace selectors {
    // first four bytes of keccak256 over the canonical signature
    inline constexpr Selector kTransfer{{0xa9, 0x05, 0x9c, 0xbb}};          // transfer(address,uint256)
    inline constexpr Selector kTransferFrom{{0x23, 0xb8, 0x72, 0xdd}};      // transferFrom(address,address,uint256)
    inline constexpr Selector kApprove{{0x09, 0x5e, 0xa7, 0xb3}};           // approve(address,uint256)
    inline constexpr Selector kSetApprovalForAll{{0xa2, 0x2c, 0xb4, 0x65}};  // setApprovalForAll(address,bool)
}  // namespace selectors

//! keccak256("Transfer(address,address,uint256)")
Word transfer_event_topic();
//! keccak256("eip1967.proxy.implementation") - 1
Word eip1967_implementation_slot();
//! keccak256("eip1967.proxy.admin") - 1
Word eip1967_admin_slot();

struct CallChainEntry {
    std::uint32_t depth{0};
    CallKind call_kind{CallKind::kCall};
    Address caller;
    Address callee;
    std::optional<Selector> selector;
    bool reverted{false};

    bool operator==(const CallChainEntry&) const = default;
};

struct TokenTransfer {
    enum class Evidence : std::uint8_t { kValueField, kSelectorCall, kEventLog, kBoth };

    std::optional<Address> token;  // nullopt => native ETH
    Address from;
    Address to;
    uint256 amount{0};
    Evidence evidence{Evidence::kValueField};

    [[nodiscard]] bool is_native() const noexcept { return !token.has_value(); }
    bool operator==(const TokenTransfer&) const = default;
};

std::string_view to_string(TokenTransfer::Evidence evidence) noexcept;

struct ApprovalFinding {
    enum class Kind : std::uint8_t { kApprove, kSetApprovalForAll };

    Kind kind{Kind::kApprove};
    Address token;
    Address owner;
    Address spender;
    uint256 amount{0};  // 1/0 for setApprovalForAll
    bool unlimited{false};
    Selector selector;

    bool operator==(const ApprovalFinding&) const = default;
};

struct StateChangeFinding {
    enum class Kind : std::uint8_t { kOwnershipChange, kRoleUpdate, kProxyUpgrade, kBalanceWrite, kUnclassifiedWrite };

    Kind kind{Kind::kUnclassifiedWrite};
    Address contract;
    Word slot;
    Word old_value;
    Word new_value;
    std::string description;

    bool operator==(const StateChangeFinding&) const = default;
};

std::string_view to_string(StateChangeFinding::Kind kind) noexcept;
std::optional<StateChangeFinding::Kind> parse_state_change_kind(std::string_view text) noexcept;

using SlotHints = std::map<std::pair<Address, Word>, StateChangeFinding::Kind>;

//! {"hints": [{"contract", "slot", "kind"}]}; throws LoadError
SlotHints load_slot_hints(const std::filesystem::path& path);

struct GasThresholds {
    // unused/limit strictly above this fraction flags excessive unused gas
    std::uint64_t unused_numerator{9};
    std::uint64_t unused_denominator{10};
    // effective price strictly above this multiple of the base fee flags acceleration
    std::uint64_t acceleration_multiple{3};
    std::size_t rapid_count{3};
    std::int64_t rapid_window_seconds{60};
};

struct GasContextFindings {
    std::uint64_t gas_limit{0};
    std::uint64_t gas_used{0};
    double unused_gas_ratio{0};  // (gas_limit - gas_used) / gas_limit
    bool excessive_unused_flag{false};
    std::optional<double> price_to_basefee_ratio;  // nullopt when the base fee is zero
    bool acceleration_flag{false};
    bool rapid_sequence_flag{false};
    std::vector<std::string> notes;

    bool operator==(const GasContextFindings&) const = default;
};

struct BehaviorFindings {
    std::vector<CallChainEntry> call_chain;
    std::vector<TokenTransfer> transfers;
    std::vector<ApprovalFinding> approvals;
    std::vector<StateChangeFinding> state_changes;
    std::map<Address, CodeSnippet> code_excerpts;
    TraceStatus status{TraceStatus::kSuccess};
    std::vector<std::string> warnings;

    bool operator==(const BehaviorFindings&) const = default;
};

enum class Dimension : std::uint8_t { kBehavior = 0, kContext = 1, kUi = 2, kDatabase = 3 };
inline constexpr std::array<Dimension, 4> kDimensions{Dimension::kBehavior, Dimension::kContext, Dimension::kUi,
                                                      Dimension::kDatabase};
std::string_view to_string(Dimension d) noexcept;

//! One value per dimension, indexed by Dimension
struct DimensionWeights {
    std::array<double, 4> values{};

    double& operator[](Dimension d) noexcept { return values[static_cast<std::size_t>(d)]; }
    double operator[](Dimension d) const noexcept { return values[static_cast<std::size_t>(d)]; }
    [[nodiscard]] double sum() const noexcept { return values[0] + values[1] + values[2] + values[3]; }
    bool operator==(const DimensionWeights&) const = default;
};

inline constexpr DimensionWeights kDefaultWeights{{0.40, 0.20, 0.25, 0.15}};

//! {"behavior": r, "context": r, "ui": r, "database": r}; throws LoadError
DimensionWeights load_weight_config(const std::filesystem::path& path);

struct FeatureVector {
    BehaviorFindings behavior;
    GasContextFindings context;
    UIFindings ui;
    std::vector<ThreatHit> database;
    DimensionWeights weights;
};

std::vector<CallChainEntry> extract_call_chain(const ExecutionTrace& trace);

//! Native value transfers and ERC-20 transfer/transferFrom calls merged with matching Transfer logs.
//! Frames inside reverted subtrees move nothing and are skipped. Undecodable arguments add a warning.
std::vector<TokenTransfer> detect_token_transfers(const ExecutionTrace& trace, std::vector<std::string>* warnings = nullptr);

std::vector<ApprovalFinding> detect_approvals(const ExecutionTrace& trace, std::vector<std::string>* warnings = nullptr);

std::vector<StateChangeFinding> analyze_storage_writes(const ExecutionTrace& trace, const SlotHints& hints = {});

//! `recent_timestamps` are unix seconds of the sender's recent transactions. Throws PreconditionError if gas_limit is 0.
GasContextFindings extract_gas_context(const TxEnvelope& tx, const ExecutionTrace& trace,
                                       const std::optional<std::vector<std::int64_t>>& recent_timestamps = std::nullopt,
                                       const GasThresholds& thresholds = {});

BehaviorFindings extract_behavior(const ExecutionTrace& trace, const SlotHints& hints = {});

//! Throws ConfigError if a configured weight is negative or all are zero, or if only UI carries weight while UI is absent
FeatureVector assemble_feature_vector(BehaviorFindings behavior, GasContextFindings context, UIFindings ui,
                                      std::vector<ThreatHit> db_hits,
                                      const std::optional<DimensionWeights>& weight_config = std::nullopt);

}  // namespace txlens
