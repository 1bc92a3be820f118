// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <txlens/types.hpp>
#include <txlens/ui_features.hpp>

namespace txlens {

struct SelectorPattern {
    Selector selector;
    std::optional<std::string> calldata_regex;  // ECMAScript, searched in lowercase calldata hex without 0x
    std::string label;
    RiskLabel severity{RiskLabel::kSuspicious};
    std::string source;

    bool operator==(const SelectorPattern&) const = default;
};

//! In-memory indicator sets. Immutable once loaded; reload by building a new instance.
struct ThreatDB {
    std::map<Address, std::string> blacklisted_addresses;  // address -> source tag
    std::map<std::string, std::string> blacklisted_domains;  // lowercase registrable domain -> source tag
    std::map<Address, std::vector<std::string>> contract_tags;
    std::vector<SelectorPattern> selector_patterns;

    [[nodiscard]] bool empty() const noexcept {
        return blacklisted_addresses.empty() && blacklisted_domains.empty() && contract_tags.empty() &&
               selector_patterns.empty();
    }
};

struct ThreatHit {
    enum class Kind : std::uint8_t { kAddress, kDomain, kTag, kPattern };

    Kind kind{Kind::kAddress};
    std::string subject;
    std::string label;
    std::optional<RiskLabel> severity;
    std::string source;

    bool operator==(const ThreatHit&) const = default;
};

std::string_view to_string(ThreatHit::Kind kind) noexcept;

//! Loads and merges indicator files. The file kind comes from its name: "*address*.txt", "*domain*.txt",
//! "*tag*.json", "*pattern*.json". Later files win on conflicting sources and tag lists.
//! Throws LoadError naming the file and line on any malformed entry.
ThreatDB load_db(const std::vector<std::filesystem::path>& paths);

//! Every indicator file found directly inside `dir`, in name order
std::vector<std::filesystem::path> db_files_in(const std::filesystem::path& dir);

//! Hits in a fixed order: call-tree addresses (pre-order, first occurrence), then the page domain, then patterns
std::vector<ThreatHit> query_all(const ThreatDB& db, const TxEnvelope& tx, const ExecutionTrace& trace,
                                 const UIFindings& ui);

}  // namespace txlens
