// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/features.hpp>
#include <txlens/keccak.hpp>

namespace txlens {

namespace {

    Word minus_one(Word w) {
        for (std::size_t i = w.bytes.size(); i-- > 0;) {
            if (w.bytes[i]-- != 0) break;
        }
        return w;
    }

    const uint256 kMaxUint256 = std::numeric_limits<uint256>::max();

    //! ABI word at argument index `i` (after the selector), if present
    std::optional<Word> arg_word(ByteView input, std::size_t i) {
        const std::size_t offset = 4 + 32 * i;
        if (input.size() < offset + 32) return std::nullopt;
        return Word::from_span(input.subspan(offset, 32));
    }

    //! Address encoded in a word; nullopt unless the 12 high bytes are zero
    std::optional<Address> word_address(const Word& w) {
        for (std::size_t i = 0; i < 12; ++i)
            if (w.bytes[i] != 0) return std::nullopt;
        return Address::from_span(ByteView{w.bytes}.subspan(12));
    }

    bool moves_funds(const CallNode& node) {
        return !node.reverted && node.call_kind != CallKind::kDelegateCall && node.call_kind != CallKind::kStaticCall;
    }

    std::string short_hex(const Word& w) {
        if (auto a = word_address(w)) return a->hex();
        return w.hex();
    }

}  // namespace

Word transfer_event_topic() {
    static const Word topic = keccak256(std::string_view{"Transfer(address,address,uint256)"});
    return topic;
}

Word eip1967_implementation_slot() {
    static const Word slot = minus_one(keccak256(std::string_view{"eip1967.proxy.implementation"}));
    return slot;
}

Word eip1967_admin_slot() {
    static const Word slot = minus_one(keccak256(std::string_view{"eip1967.proxy.admin"}));
    return slot;
}

std::string_view to_string(TokenTransfer::Evidence evidence) noexcept {
    switch (evidence) {
        case TokenTransfer::Evidence::kValueField:
            return "VALUE_FIELD";
        case TokenTransfer::Evidence::kSelectorCall:
            return "SELECTOR_CALL";
        case TokenTransfer::Evidence::kEventLog:
            return "EVENT_LOG";
        case TokenTransfer::Evidence::kBoth:
            return "BOTH";
    }
    return "VALUE_FIELD";
}

std::string_view to_string(StateChangeFinding::Kind kind) noexcept {
    switch (kind) {
        case StateChangeFinding::Kind::kOwnershipChange:
            return "OWNERSHIP_CHANGE";
        case StateChangeFinding::Kind::kRoleUpdate:
            return "ROLE_UPDATE";
        case StateChangeFinding::Kind::kProxyUpgrade:
            return "PROXY_UPGRADE";
        case StateChangeFinding::Kind::kBalanceWrite:
            return "BALANCE_WRITE";
        case StateChangeFinding::Kind::kUnclassifiedWrite:
            return "UNCLASSIFIED_WRITE";
    }
    return "UNCLASSIFIED_WRITE";
}

std::optional<StateChangeFinding::Kind> parse_state_change_kind(std::string_view text) noexcept {
    using K = StateChangeFinding::Kind;
    for (K k : {K::kOwnershipChange, K::kRoleUpdate, K::kProxyUpgrade, K::kBalanceWrite, K::kUnclassifiedWrite})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::string_view to_string(Dimension d) noexcept {
    switch (d) {
        case Dimension::kBehavior:
            return "behavior";
        case Dimension::kContext:
            return "context";
        case Dimension::kUi:
            return "ui";
        case Dimension::kDatabase:
            return "database";
    }
    return "behavior";
}

std::vector<CallChainEntry> extract_call_chain(const ExecutionTrace& trace) {
    std::vector<CallChainEntry> rows;
    walk_preorder(trace.root, [&](const CallNode& node, const std::string&) {
        rows.push_back(CallChainEntry{node.depth, node.call_kind, node.caller, node.callee, selector_of(node.input),
                                      node.reverted});
    });
    return rows;
}

std::vector<TokenTransfer> detect_token_transfers(const ExecutionTrace& trace, std::vector<std::string>* warnings) {
    auto warn = [&](std::string w) {
        if (warnings) warnings->push_back(std::move(w));
    };

    std::vector<TokenTransfer> out;
    walk_preorder(trace.root, [&](const CallNode& node, const std::string& path) {
        if (!moves_funds(node)) return;
        if (node.value > 0) out.push_back(TokenTransfer{std::nullopt, node.caller, node.callee, node.value, TokenTransfer::Evidence::kValueField});

        const auto sel = selector_of(node.input);
        if (!sel || (*sel != selectors::kTransfer && *sel != selectors::kTransferFrom)) return;
        const bool is_from = *sel == selectors::kTransferFrom;

        TokenTransfer t;
        t.token = node.callee;
        t.evidence = TokenTransfer::Evidence::kSelectorCall;
        std::optional<Address> from = node.caller;
        std::optional<Address> to;
        std::optional<Word> amount;
        if (is_from) {
            auto w0 = arg_word(node.input, 0);
            from = w0 ? word_address(*w0) : std::nullopt;
            auto w1 = arg_word(node.input, 1);
            to = w1 ? word_address(*w1) : std::nullopt;
            amount = arg_word(node.input, 2);
        } else {
            auto w0 = arg_word(node.input, 0);
            to = w0 ? word_address(*w0) : std::nullopt;
            amount = arg_word(node.input, 1);
        }
        if (!from || !to || !amount) {
            warn("undecodable " + std::string{is_from ? "transferFrom" : "transfer"} + " arguments at " + path);
            return;
        }
        t.from = *from;
        t.to = *to;
        t.amount = word_to_u256(*amount);
        if (t.amount == 0) {
            warn("zero-amount token transfer call at " + path);
            return;
        }
        out.push_back(t);
    });

    const Word topic0 = transfer_event_topic();
    std::vector<TokenTransfer> from_logs;
    for (const auto& log : trace.logs) {
        // ERC-721 Transfer shares topic0 but indexes the token id as a fourth topic
        if (log.topics.size() != 3 || log.topics[0] != topic0 || log.data.size() != 32) continue;
        auto from = word_address(log.topics[1]);
        auto to = word_address(log.topics[2]);
        if (!from || !to) continue;
        const auto amount = word_to_u256(Word::from_span(log.data));
        if (amount == 0) continue;

        bool merged = false;
        for (auto& t : out) {
            if (t.evidence != TokenTransfer::Evidence::kSelectorCall) continue;
            if (*t.token == log.emitter && t.from == *from && t.to == *to && t.amount == amount) {
                t.evidence = TokenTransfer::Evidence::kBoth;
                merged = true;
                break;
            }
        }
        if (!merged) from_logs.push_back(TokenTransfer{log.emitter, *from, *to, amount, TokenTransfer::Evidence::kEventLog});
    }
    out.insert(out.end(), from_logs.begin(), from_logs.end());
    return out;
}

std::vector<ApprovalFinding> detect_approvals(const ExecutionTrace& trace, std::vector<std::string>* warnings) {
    std::vector<ApprovalFinding> out;
    walk_preorder(trace.root, [&](const CallNode& node, const std::string& path) {
        if (!moves_funds(node)) return;
        const auto sel = selector_of(node.input);
        if (!sel || (*sel != selectors::kApprove && *sel != selectors::kSetApprovalForAll)) return;
        auto w0 = arg_word(node.input, 0);
        auto w1 = arg_word(node.input, 1);
        auto spender = w0 ? word_address(*w0) : std::nullopt;
        if (!spender || !w1) {
            if (warnings) warnings->push_back("undecodable approval arguments at " + path);
            return;
        }
        ApprovalFinding f;
        f.token = node.callee;
        f.owner = node.caller;
        f.spender = *spender;
        f.selector = *sel;
        f.amount = word_to_u256(*w1);
        if (*sel == selectors::kApprove) {
            f.kind = ApprovalFinding::Kind::kApprove;
            f.unlimited = f.amount == kMaxUint256;
        } else {
            f.kind = ApprovalFinding::Kind::kSetApprovalForAll;
            f.unlimited = f.amount != 0;
        }
        out.push_back(f);
    });
    return out;
}

std::vector<StateChangeFinding> analyze_storage_writes(const ExecutionTrace& trace, const SlotHints& hints) {
    using K = StateChangeFinding::Kind;
    std::vector<StateChangeFinding> out;
    for (const auto& w : trace.storage_writes) {
        if (w.old_value == w.new_value) continue;
        StateChangeFinding f{K::kUnclassifiedWrite, w.contract, w.slot, w.old_value, w.new_value, {}};
        if (auto it = hints.find({w.contract, w.slot}); it != hints.end()) {
            f.kind = it->second;
        } else if (w.slot == eip1967_implementation_slot()) {
            f.kind = K::kProxyUpgrade;
        } else if (w.slot == eip1967_admin_slot()) {
            f.kind = K::kOwnershipChange;
        }

        const std::string change = short_hex(w.old_value) + " -> " + short_hex(w.new_value);
        switch (f.kind) {
            case K::kProxyUpgrade:
                f.description = "proxy implementation of " + w.contract.hex() + " changed " + change;
                break;
            case K::kOwnershipChange:
                f.description = "owner/admin of " + w.contract.hex() + " changed " + change;
                break;
            case K::kRoleUpdate:
                f.description = "role slot " + w.slot.hex() + " of " + w.contract.hex() + " changed " + change;
                break;
            case K::kBalanceWrite:
                f.description = "balance slot " + w.slot.hex() + " of " + w.contract.hex() + " changed " + change;
                break;
            case K::kUnclassifiedWrite:
                f.description = "slot " + w.slot.hex() + " of " + w.contract.hex() + " changed " + change;
                break;
        }
        out.push_back(std::move(f));
    }
    return out;
}

GasContextFindings extract_gas_context(const TxEnvelope& tx, const ExecutionTrace& trace,
                                       const std::optional<std::vector<std::int64_t>>& recent_timestamps,
                                       const GasThresholds& thresholds) {
    if (tx.gas_limit == 0) throw PreconditionError("extract_gas_context: gas_limit must be positive");

    GasContextFindings out;
    out.gas_limit = tx.gas_limit;
    out.gas_used = std::min(trace.gas_used, tx.gas_limit);
    const std::uint64_t unused = tx.gas_limit - out.gas_used;
    out.unused_gas_ratio = static_cast<double>(unused) / static_cast<double>(tx.gas_limit);
    out.excessive_unused_flag = static_cast<unsigned __int128>(unused) * thresholds.unused_denominator >
                                static_cast<unsigned __int128>(tx.gas_limit) * thresholds.unused_numerator;

    if (tx.base_fee == 0) {
        out.notes.emplace_back("base fee is zero; price ratio unavailable");
    } else {
        out.price_to_basefee_ratio = tx.effective_gas_price.convert_to<double>() / tx.base_fee.convert_to<double>();
        // exact comparison in 512 bits so the multiple cannot overflow
        using boost::multiprecision::uint512_t;
        out.acceleration_flag = uint512_t{tx.effective_gas_price} > uint512_t{tx.base_fee} * thresholds.acceleration_multiple;
    }

    if (recent_timestamps && thresholds.rapid_count > 0) {
        auto ts = *recent_timestamps;
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 0; i + thresholds.rapid_count <= ts.size(); ++i) {
            if (ts[i + thresholds.rapid_count - 1] - ts[i] <= thresholds.rapid_window_seconds) {
                out.rapid_sequence_flag = true;
                break;
            }
        }
    } else if (!recent_timestamps) {
        out.notes.emplace_back("no sender history supplied");
    }
    if (trace.status == TraceStatus::kRevert) out.notes.emplace_back("transaction reverts in simulation");
    return out;
}

BehaviorFindings extract_behavior(const ExecutionTrace& trace, const SlotHints& hints) {
    BehaviorFindings b;
    b.call_chain = extract_call_chain(trace);
    b.transfers = detect_token_transfers(trace, &b.warnings);
    b.approvals = detect_approvals(trace, &b.warnings);
    b.state_changes = analyze_storage_writes(trace, hints);
    b.code_excerpts = trace.code_snippets;
    b.status = trace.status;
    return b;
}

FeatureVector assemble_feature_vector(BehaviorFindings behavior, GasContextFindings context, UIFindings ui,
                                      std::vector<ThreatHit> db_hits, const std::optional<DimensionWeights>& weight_config) {
    DimensionWeights w = weight_config.value_or(kDefaultWeights);
    for (double v : w.values)
        if (!std::isfinite(v) || v < 0) throw ConfigError("feature weights must be finite and non-negative");
    if (w.sum() <= 0) throw ConfigError("feature weights sum to zero");

    if (!ui.present) w[Dimension::kUi] = 0;
    const double total = w.sum();
    if (total <= 0) throw ConfigError("no weight left after removing the absent UI dimension");
    // echo weights that already sum to one so configured values survive unchanged
    if (std::abs(total - 1.0) > 1e-12)
        for (double& v : w.values) v /= total;

    FeatureVector fv;
    fv.behavior = std::move(behavior);
    fv.context = std::move(context);
    fv.ui = std::move(ui);
    fv.database = std::move(db_hits);
    fv.weights = w;
    return fv;
}

namespace {

    std::string read_text(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError(path.string(), 0, "cannot open file");
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    nlohmann::json parse_json_file(const std::filesystem::path& path) {
        const auto text = read_text(path);
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            const auto upto = std::min<std::size_t>(e.byte, text.size());
            const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
            throw LoadError(path.string(), line, "invalid JSON");
        }
    }

}  // namespace

SlotHints load_slot_hints(const std::filesystem::path& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("hints") || !doc["hints"].is_array())
        throw LoadError(path.string(), 1, "expected {\"hints\": [...]}");
    SlotHints hints;
    for (const auto& h : doc["hints"]) {
        auto contract = h.contains("contract") && h["contract"].is_string() ? Address::parse_exact(h["contract"].get<std::string>()) : std::nullopt;
        auto slot = h.contains("slot") && h["slot"].is_string() ? Word::parse_padded(h["slot"].get<std::string>()) : std::nullopt;
        const auto kind_text = h.contains("kind") && h["kind"].is_string() ? h["kind"].get<std::string>() : std::string{};
        const auto kind = parse_state_change_kind(kind_text);
        if (!contract || !slot || !kind || *kind == StateChangeFinding::Kind::kProxyUpgrade ||
            *kind == StateChangeFinding::Kind::kUnclassifiedWrite)
            throw LoadError(path.string(), 0, "invalid hint " + h.dump());
        hints[{*contract, *slot}] = *kind;
    }
    return hints;
}

DimensionWeights load_weight_config(const std::filesystem::path& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_object()) throw LoadError(path.string(), 1, "expected an object of four weights");
    DimensionWeights w;
    for (auto d : kDimensions) {
        const std::string key{to_string(d)};
        if (!doc.contains(key) || !doc[key].is_number()) throw LoadError(path.string(), 0, "missing numeric weight '" + key + "'");
        w[d] = doc[key].get<double>();
        if (w[d] < 0) throw LoadError(path.string(), 0, "negative weight '" + key + "'");
    }
    return w;
}

}  // namespace txlens
