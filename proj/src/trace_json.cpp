// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/trace_ingest.hpp>

namespace txlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

    class Reader {
      public:
        static const json& member(const json& obj, const std::string& key, const std::string& path) {
            if (!obj.is_object()) throw SchemaError(path, "expected object");
            auto it = obj.find(key);
            if (it == obj.end()) throw SchemaError(path + "." + key, "missing field");
            return *it;
        }

        static std::uint64_t u64(const json& j, const std::string& path) {
            if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
                throw SchemaError(path, "expected non-negative integer");
            return j.get<std::uint64_t>();
        }

        static uint256 decimal(const json& j, const std::string& path) {
            if (!j.is_string()) throw SchemaError(path, "expected decimal string");
            auto v = parse_decimal_u256(j.get_ref<const std::string&>());
            if (!v) throw SchemaError(path, "invalid decimal string");
            return *v;
        }

        static std::string string(const json& j, const std::string& path) {
            if (!j.is_string()) throw SchemaError(path, "expected string");
            return j.get<std::string>();
        }

        static std::optional<std::string> nullable_string(const json& j, const std::string& path) {
            if (j.is_null()) return std::nullopt;
            return string(j, path);
        }

        static bool boolean(const json& j, const std::string& path) {
            if (!j.is_boolean()) throw SchemaError(path, "expected boolean");
            return j.get<bool>();
        }

        static Bytes bytes(const json& j, const std::string& path) {
            if (!j.is_string()) throw SchemaError(path, "expected hex string");
            auto b = from_hex(j.get_ref<const std::string&>());
            if (!b) throw SchemaError(path, "invalid hex");
            return *b;
        }

        static Address address(const json& j, const std::string& path) {
            if (!j.is_string()) throw SchemaError(path, "expected 20-byte hex address");
            auto a = Address::parse_exact(j.get_ref<const std::string&>());
            if (!a) throw SchemaError(path, "expected 20-byte hex address");
            return *a;
        }

        static Word word(const json& j, const std::string& path) {
            if (!j.is_string()) throw SchemaError(path, "expected 32-byte hex word");
            auto w = Word::parse_padded(j.get_ref<const std::string&>());
            if (!w) throw SchemaError(path, "expected hex word of at most 32 bytes");
            return *w;
        }

        static const json& array(const json& j, const std::string& path) {
            if (!j.is_array()) throw SchemaError(path, "expected array");
            return j;
        }
    };

    using R = Reader;

    std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

    CallNode parse_call(const json& j, const std::string& path, std::uint32_t depth) {
        CallNode node;
        const auto& kind_text = R::string(R::member(j, "call_kind", path), path + ".call_kind");
        auto kind = parse_call_kind(kind_text);
        if (!kind) throw SchemaError(path + ".call_kind", "unknown call kind '" + kind_text + "'");
        node.call_kind = *kind;
        node.caller = R::address(R::member(j, "caller", path), path + ".caller");
        node.callee = R::address(R::member(j, "callee", path), path + ".callee");
        node.value = R::decimal(R::member(j, "value", path), path + ".value");
        node.input = R::bytes(R::member(j, "input", path), path + ".input");
        node.output = R::bytes(R::member(j, "output", path), path + ".output");
        node.gas_used = R::u64(R::member(j, "gas_used", path), path + ".gas_used");
        node.reverted = R::boolean(R::member(j, "reverted", path), path + ".reverted");
        node.depth = depth;
        const auto& children = R::array(R::member(j, "children", path), path + ".children");
        for (std::size_t i = 0; i < children.size(); ++i)
            node.children.push_back(parse_call(children[i], idx(path + ".children", i), depth + 1));
        return node;
    }

    TxEnvelope parse_tx(const json& j, const std::string& path) {
        TxEnvelope tx;
        tx.chain_id = R::u64(R::member(j, "chain_id", path), path + ".chain_id");
        tx.sender = R::address(R::member(j, "from", path), path + ".from");
        const auto& to = R::member(j, "to", path);
        if (!to.is_null()) tx.recipient = R::address(to, path + ".to");
        tx.value = R::decimal(R::member(j, "value", path), path + ".value");
        tx.calldata = R::bytes(R::member(j, "calldata", path), path + ".calldata");
        tx.gas_limit = R::u64(R::member(j, "gas_limit", path), path + ".gas_limit");
        tx.effective_gas_price = R::decimal(R::member(j, "effective_gas_price", path), path + ".effective_gas_price");
        tx.base_fee = R::decimal(R::member(j, "base_fee", path), path + ".base_fee");
        tx.nonce = R::u64(R::member(j, "nonce", path), path + ".nonce");
        tx.origin_url = R::nullable_string(R::member(j, "origin_url", path), path + ".origin_url");

        const auto& scripts = R::member(j, "page_scripts", path);
        if (!scripts.is_null()) {
            const std::string spath = path + ".page_scripts";
            R::array(scripts, spath);
            std::vector<PageScript> out;
            for (std::size_t i = 0; i < scripts.size(); ++i) {
                const auto p = idx(spath, i);
                PageScript s;
                const auto kind = R::string(R::member(scripts[i], "source_kind", p), p + ".source_kind");
                if (kind == "inline") {
                    s.source_kind = PageScript::Kind::kInline;
                } else if (kind == "external") {
                    s.source_kind = PageScript::Kind::kExternal;
                } else {
                    throw SchemaError(p + ".source_kind", "expected \"inline\" or \"external\"");
                }
                s.content = R::string(R::member(scripts[i], "content", p), p + ".content");
                if (auto it = scripts[i].find("url"); it != scripts[i].end())
                    s.url = R::nullable_string(*it, p + ".url");
                out.push_back(std::move(s));
            }
            tx.page_scripts = std::move(out);
        }
        return tx;
    }

    ExecutionTrace parse_trace(const json& j, const std::string& path) {
        ExecutionTrace trace;
        const auto status = R::string(R::member(j, "status", path), path + ".status");
        if (status == "SUCCESS") {
            trace.status = TraceStatus::kSuccess;
        } else if (status == "REVERT") {
            trace.status = TraceStatus::kRevert;
        } else {
            throw SchemaError(path + ".status", "expected \"SUCCESS\" or \"REVERT\"");
        }
        trace.gas_used = R::u64(R::member(j, "gas_used", path), path + ".gas_used");
        trace.root = parse_call(R::member(j, "root", path), path + ".root", 0);

        const std::string wpath = path + ".storage_writes";
        const auto& writes = R::array(R::member(j, "storage_writes", path), wpath);
        for (std::size_t i = 0; i < writes.size(); ++i) {
            const auto p = idx(wpath, i);
            StorageWrite w;
            w.contract = R::address(R::member(writes[i], "contract", p), p + ".contract");
            w.slot = R::word(R::member(writes[i], "slot", p), p + ".slot");
            w.old_value = R::word(R::member(writes[i], "old", p), p + ".old");
            w.new_value = R::word(R::member(writes[i], "new", p), p + ".new");
            trace.storage_writes.push_back(w);
        }

        const std::string lpath = path + ".logs";
        const auto& logs = R::array(R::member(j, "logs", path), lpath);
        for (std::size_t i = 0; i < logs.size(); ++i) {
            const auto p = idx(lpath, i);
            LogEntry log;
            log.emitter = R::address(R::member(logs[i], "emitter", p), p + ".emitter");
            const auto& topics = R::array(R::member(logs[i], "topics", p), p + ".topics");
            for (std::size_t t = 0; t < topics.size(); ++t) log.topics.push_back(R::word(topics[t], idx(p + ".topics", t)));
            log.data = R::bytes(R::member(logs[i], "data", p), p + ".data");
            trace.logs.push_back(std::move(log));
        }
        return trace;
    }

    ordered_json call_to_json(const CallNode& node) {
        ordered_json j;
        j["call_kind"] = std::string{to_string(node.call_kind)};
        j["caller"] = node.caller.hex();
        j["callee"] = node.callee.hex();
        j["value"] = to_decimal(node.value);
        j["input"] = to_hex_prefixed(node.input);
        j["output"] = to_hex_prefixed(node.output);
        j["gas_used"] = node.gas_used;
        j["reverted"] = node.reverted;
        j["children"] = ordered_json::array();
        for (const auto& child : node.children) j["children"].push_back(call_to_json(child));
        return j;
    }

}  // namespace

TracedTx parse_normalized_trace(const json& doc) {
    const std::string root = "$";
    const auto version = R::u64(R::member(doc, "schema_version", root), "$.schema_version");
    if (version != kTraceSchemaVersion)
        throw SchemaError("$.schema_version", "unsupported version " + std::to_string(version));

    TracedTx out;
    out.tx = parse_tx(R::member(doc, "tx", root), "$.tx");
    out.trace = parse_trace(R::member(doc, "trace", root), "$.trace");

    if (auto it = doc.find("code_snippets"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("$.code_snippets", "expected object");
        for (const auto& [key, value] : it->items()) {
            const std::string p = "$.code_snippets." + key;
            auto addr = Address::parse_exact(key);
            if (!addr) throw SchemaError(p, "key is not a 20-byte hex address");
            CodeSnippet snippet;
            snippet.verified_source = R::nullable_string(R::member(value, "verified_source", p), p + ".verified_source");
            snippet.decompiled = R::nullable_string(R::member(value, "decompiled", p), p + ".decompiled");
            out.trace.code_snippets[*addr] = std::move(snippet);
        }
    }

    auto violations = validate_trace(out.trace, out.tx);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return out;
}

TracedTx parse_normalized_trace(std::string_view document) {
    json doc = json::parse(document.begin(), document.end(), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw SchemaError("$", "document is not valid JSON");
    return parse_normalized_trace(doc);
}

std::string serialize_normalized_trace(const TracedTx& traced) {
    const auto& tx = traced.tx;
    const auto& trace = traced.trace;
    ordered_json doc;
    doc["schema_version"] = kTraceSchemaVersion;

    ordered_json t;
    t["chain_id"] = tx.chain_id;
    t["from"] = tx.sender.hex();
    t["to"] = tx.recipient ? ordered_json(tx.recipient->hex()) : ordered_json(nullptr);
    t["value"] = to_decimal(tx.value);
    t["calldata"] = to_hex_prefixed(tx.calldata);
    t["gas_limit"] = tx.gas_limit;
    t["effective_gas_price"] = to_decimal(tx.effective_gas_price);
    t["base_fee"] = to_decimal(tx.base_fee);
    t["nonce"] = tx.nonce;
    t["origin_url"] = tx.origin_url ? ordered_json(*tx.origin_url) : ordered_json(nullptr);
    if (tx.page_scripts) {
        t["page_scripts"] = ordered_json::array();
        for (const auto& s : *tx.page_scripts) {
            ordered_json sj;
            sj["source_kind"] = s.source_kind == PageScript::Kind::kInline ? "inline" : "external";
            sj["content"] = s.content;
            sj["url"] = s.url ? ordered_json(*s.url) : ordered_json(nullptr);
            t["page_scripts"].push_back(std::move(sj));
        }
    } else {
        t["page_scripts"] = nullptr;
    }
    doc["tx"] = std::move(t);

    ordered_json tr;
    tr["status"] = trace.status == TraceStatus::kSuccess ? "SUCCESS" : "REVERT";
    tr["gas_used"] = trace.gas_used;
    tr["root"] = call_to_json(trace.root);
    tr["storage_writes"] = ordered_json::array();
    for (const auto& w : trace.storage_writes) {
        tr["storage_writes"].push_back(ordered_json{{"contract", w.contract.hex()},
                                                    {"slot", w.slot.hex()},
                                                    {"old", w.old_value.hex()},
                                                    {"new", w.new_value.hex()}});
    }
    tr["logs"] = ordered_json::array();
    for (const auto& log : trace.logs) {
        ordered_json lj;
        lj["emitter"] = log.emitter.hex();
        lj["topics"] = ordered_json::array();
        for (const auto& topic : log.topics) lj["topics"].push_back(topic.hex());
        lj["data"] = to_hex_prefixed(log.data);
        tr["logs"].push_back(std::move(lj));
    }
    doc["trace"] = std::move(tr);

    ordered_json snippets = ordered_json::object();
    for (const auto& [addr, snippet] : trace.code_snippets) {
        snippets[addr.hex()] = ordered_json{
            {"verified_source", snippet.verified_source ? ordered_json(*snippet.verified_source) : ordered_json(nullptr)},
            {"decompiled", snippet.decompiled ? ordered_json(*snippet.decompiled) : ordered_json(nullptr)}};
    }
    doc["code_snippets"] = std::move(snippets);
    return doc.dump(2) + "\n";
}

}  // namespace txlens
