// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/http.hpp>
#include <txlens/trace_ingest.hpp>

namespace txlens {

using nlohmann::json;

std::string_view to_string(TraceSource::Kind kind) noexcept {
    switch (kind) {
        case TraceSource::Kind::kFixtureFile:
            return "FIXTURE_FILE";
        case TraceSource::Kind::kLocalSimulator:
            return "LOCAL_SIMULATOR";
        case TraceSource::Kind::kRemoteSimulator:
            return "REMOTE_SIMULATOR";
        case TraceSource::Kind::kChainExplorer:
            return "CHAIN_EXPLORER";
    }
    return "FIXTURE_FILE";
}

void TraceSource::check() const {
    if (kind == Kind::kFixtureFile) {
        if (locator.empty()) throw ConfigError("fixture source requires a path");
        return;
    }
    if (!Url::parse(locator)) throw ConfigError(std::string{to_string(kind)} + " source requires a URL locator, got '" + locator + "'");
}

bool is_tx_hash(std::string_view text) noexcept {
    if (!text.starts_with("0x") && !text.starts_with("0X")) return false;
    return Word::parse_exact(text).has_value();
}

// --- JSON-RPC ---

namespace {

    class HttpRpcClient final : public RpcClient {
      public:
        HttpRpcClient(Url url, std::optional<std::string> api_key) : url_(std::move(url)), api_key_(std::move(api_key)) {}

        json call(const std::string& method, const json& params) override {
            const json request{{"jsonrpc", "2.0"}, {"id", ++id_}, {"method", method}, {"params", params}};
            HttpHeaders headers;
            if (api_key_) headers.emplace_back("X-Access-Key", *api_key_);
            const auto response = http_post(url_, request.dump(), headers, std::chrono::seconds{60});
            if (response.status < 200 || response.status >= 300)
                throw TransportError(method + ": HTTP status " + std::to_string(response.status));
            json body = json::parse(response.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) throw TransportError(method + ": response is not a JSON object");
            if (body.contains("error")) throw TransportError(method + ": " + body["error"].dump());
            if (!body.contains("result")) throw TransportError(method + ": response has no result");
            return body["result"];
        }

      private:
        Url url_;
        std::optional<std::string> api_key_;
        int id_{0};
    };

}  // namespace

std::unique_ptr<RpcClient> make_http_rpc_client(const std::string& url, std::optional<std::string> api_key) {
    auto parsed = Url::parse(url);
    if (!parsed) throw ConfigError("invalid RPC URL '" + url + "'");
    return std::make_unique<HttpRpcClient>(std::move(*parsed), std::move(api_key));
}

// --- geth bundle adapter ---

namespace {

    uint256 quantity(const json& j, const std::string& what) {
        if (j.is_number_unsigned()) return uint256{j.get<std::uint64_t>()};
        if (!j.is_string()) throw AdapterError(what + ": expected hex quantity");
        std::string_view text = j.get_ref<const std::string&>();
        if (!text.starts_with("0x")) {
            auto dec = parse_decimal_u256(text);
            if (!dec) throw AdapterError(what + ": invalid quantity");
            return *dec;
        }
        text.remove_prefix(2);
        if (text.empty() || text.size() > 64) throw AdapterError(what + ": invalid hex quantity");
        uint256 v = 0;
        for (char c : text) {
            int d = -1;
            if (c >= '0' && c <= '9') d = c - '0';
            if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            if (d < 0) throw AdapterError(what + ": invalid hex quantity");
            v = (v << 4) | d;
        }
        return v;
    }

    std::uint64_t quantity64(const json& j, const std::string& what) {
        const auto v = quantity(j, what);
        if (v > std::numeric_limits<std::uint64_t>::max()) throw AdapterError(what + ": out of range");
        return static_cast<std::uint64_t>(v);
    }

    const json& need(const json& obj, const char* key, const std::string& where) {
        if (!obj.is_object() || !obj.contains(key)) throw AdapterError(where + ": missing '" + key + "'");
        return obj.at(key);
    }

    Address address_of(const json& j, const std::string& what) {
        if (!j.is_string()) throw AdapterError(what + ": expected address");
        auto a = Address::parse_exact(j.get_ref<const std::string&>());
        if (!a) throw AdapterError(what + ": invalid address");
        return *a;
    }

    Bytes bytes_of(const json& obj, const char* key, const std::string& what) {
        if (!obj.contains(key) || obj.at(key).is_null()) return {};
        const auto& j = obj.at(key);
        if (!j.is_string()) throw AdapterError(what + "." + key + ": expected hex");
        auto b = from_hex(j.get_ref<const std::string&>());
        if (!b) throw AdapterError(what + "." + key + ": invalid hex");
        return *b;
    }

    std::optional<CallKind> frame_kind(const std::string& type) {
        if (type == "CALLCODE") return CallKind::kDelegateCall;
        if (type == "SELFDESTRUCT") return CallKind::kCall;
        return parse_call_kind(type);
    }

    CallNode adapt_frame(const json& frame, std::uint32_t depth, bool ancestor_reverted, std::vector<LogEntry>& logs,
                         const std::string& where) {
        CallNode node;
        const auto type = need(frame, "type", where).get<std::string>();
        auto kind = frame_kind(type);
        if (!kind) throw AdapterError(where + ": unknown frame type '" + type + "'");
        node.call_kind = *kind;
        node.caller = address_of(need(frame, "from", where), where + ".from");
        node.callee = frame.contains("to") && !frame["to"].is_null() ? address_of(frame["to"], where + ".to") : Address{};
        // delegate/static frames echo the parent's value in some tracers; no value moves in them
        if (node.call_kind == CallKind::kCall || node.call_kind == CallKind::kCreate)
            node.value = frame.contains("value") && !frame["value"].is_null() ? quantity(frame["value"], where + ".value") : 0;
        node.input = bytes_of(frame, "input", where);
        node.output = bytes_of(frame, "output", where);
        node.gas_used = frame.contains("gasUsed") ? quantity64(frame["gasUsed"], where + ".gasUsed") : 0;
        node.depth = depth;
        node.reverted = ancestor_reverted || (frame.contains("error") && !frame["error"].is_null());

        // logs carry the number of child calls made before they were emitted
        std::vector<std::pair<std::uint64_t, const json*>> frame_logs;
        if (frame.contains("logs") && frame["logs"].is_array() && !node.reverted) {
            for (const auto& l : frame["logs"]) {
                const auto pos = l.contains("position") ? quantity64(l["position"], where + ".logs.position") : 0;
                frame_logs.emplace_back(pos, &l);
            }
        }
        std::stable_sort(frame_logs.begin(), frame_logs.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        std::size_t next_log = 0;
        auto emit_logs_upto = [&](std::uint64_t position) {
            for (; next_log < frame_logs.size() && frame_logs[next_log].first <= position; ++next_log) {
                const json& l = *frame_logs[next_log].second;
                LogEntry entry;
                entry.emitter = address_of(need(l, "address", where + ".logs"), where + ".logs.address");
                for (const auto& topic : need(l, "topics", where + ".logs")) {
                    auto w = topic.is_string() ? Word::parse_padded(topic.get<std::string>()) : std::nullopt;
                    if (!w) throw AdapterError(where + ".logs: invalid topic");
                    entry.topics.push_back(*w);
                }
                entry.data = bytes_of(l, "data", where + ".logs");
                logs.push_back(std::move(entry));
            }
        };

        if (frame.contains("calls") && frame["calls"].is_array()) {
            const auto& calls = frame["calls"];
            for (std::size_t i = 0; i < calls.size(); ++i) {
                emit_logs_upto(i);
                node.children.push_back(
                    adapt_frame(calls[i], depth + 1, node.reverted, logs, where + ".calls[" + std::to_string(i) + "]"));
            }
        }
        emit_logs_upto(std::numeric_limits<std::uint64_t>::max());
        return node;
    }

    std::vector<StorageWrite> adapt_state_diff(const json& diff) {
        if (!diff.is_object() || !diff.contains("pre") || !diff.contains("post"))
            throw AdapterError("state_diff: expected prestateTracer diffMode object with pre/post");
        std::map<std::pair<Address, Word>, std::pair<Word, Word>> slots;
        std::set<Address> touched_post;
        for (const auto& [addr_text, account] : diff["post"].items()) {
            const auto addr = address_of(json(addr_text), "state_diff.post");
            touched_post.insert(addr);
            if (!account.contains("storage")) continue;
            for (const auto& [slot_text, value] : account["storage"].items()) {
                auto slot = Word::parse_padded(slot_text);
                auto v = Word::parse_padded(value.get<std::string>());
                if (!slot || !v) throw AdapterError("state_diff.post: invalid storage entry");
                slots[{addr, *slot}].second = *v;
            }
        }
        for (const auto& [addr_text, account] : diff["pre"].items()) {
            const auto addr = address_of(json(addr_text), "state_diff.pre");
            if (!account.contains("storage")) continue;
            for (const auto& [slot_text, value] : account["storage"].items()) {
                auto slot = Word::parse_padded(slot_text);
                auto v = Word::parse_padded(value.get<std::string>());
                if (!slot || !v) throw AdapterError("state_diff.pre: invalid storage entry");
                auto key = std::make_pair(addr, *slot);
                // a slot present in pre but missing from post was cleared, provided the account changed
                if (!slots.contains(key) && !touched_post.contains(addr)) continue;
                slots[key].first = *v;
            }
        }
        std::vector<StorageWrite> out;
        for (const auto& [key, values] : slots) out.push_back(StorageWrite{key.first, key.second, values.first, values.second});
        return out;
    }

}  // namespace

TracedTx adapt_geth_bundle(const json& bundle) {
    if (!bundle.is_object()) throw AdapterError("bundle: expected object");
    const auto& txj = need(bundle, "transaction", "bundle");
    const auto& frame = need(bundle, "call_trace", "bundle");
    const json empty = json::object();
    const json& receipt = bundle.contains("receipt") && !bundle["receipt"].is_null() ? bundle["receipt"] : empty;
    const json& block = bundle.contains("block") && !bundle["block"].is_null() ? bundle["block"] : empty;

    TracedTx out;
    auto& tx = out.tx;
    tx.chain_id = txj.contains("chainId") ? quantity64(txj["chainId"], "transaction.chainId") : 1;
    tx.sender = address_of(need(txj, "from", "transaction"), "transaction.from");
    if (txj.contains("to") && !txj["to"].is_null()) tx.recipient = address_of(txj["to"], "transaction.to");
    tx.value = txj.contains("value") ? quantity(txj["value"], "transaction.value") : 0;
    tx.calldata = bytes_of(txj, "input", "transaction");
    tx.gas_limit = quantity64(need(txj, "gas", "transaction"), "transaction.gas");
    tx.nonce = txj.contains("nonce") ? quantity64(txj["nonce"], "transaction.nonce") : 0;
    tx.base_fee = block.contains("baseFeePerGas") ? quantity(block["baseFeePerGas"], "block.baseFeePerGas") : 0;

    if (receipt.contains("effectiveGasPrice")) {
        tx.effective_gas_price = quantity(receipt["effectiveGasPrice"], "receipt.effectiveGasPrice");
    } else if (txj.contains("maxFeePerGas")) {
        const auto max_fee = quantity(txj["maxFeePerGas"], "transaction.maxFeePerGas");
        const auto tip = txj.contains("maxPriorityFeePerGas") ? quantity(txj["maxPriorityFeePerGas"], "transaction.maxPriorityFeePerGas") : 0;
        tx.effective_gas_price = std::min(max_fee, tx.base_fee + tip);
    } else if (txj.contains("gasPrice")) {
        tx.effective_gas_price = quantity(txj["gasPrice"], "transaction.gasPrice");
    }

    if (bundle.contains("page") && bundle["page"].is_object()) {
        const auto& page = bundle["page"];
        if (page.contains("url") && page["url"].is_string()) tx.origin_url = page["url"].get<std::string>();
        if (page.contains("scripts") && page["scripts"].is_array()) {
            std::vector<PageScript> scripts;
            for (const auto& s : page["scripts"]) {
                PageScript ps;
                ps.source_kind = s.value("source_kind", std::string{"inline"}) == "external" ? PageScript::Kind::kExternal
                                                                                          : PageScript::Kind::kInline;
                ps.content = s.value("content", std::string{});
                if (s.contains("url") && s["url"].is_string()) ps.url = s["url"].get<std::string>();
                scripts.push_back(std::move(ps));
            }
            tx.page_scripts = std::move(scripts);
        }
    }

    auto& trace = out.trace;
    trace.root = adapt_frame(frame, 0, false, trace.logs, "call_trace");
    if (receipt.contains("gasUsed")) {
        trace.gas_used = quantity64(receipt["gasUsed"], "receipt.gasUsed");
    } else {
        trace.gas_used = trace.root.gas_used;
    }
    if (receipt.contains("status")) {
        trace.status = quantity(receipt["status"], "receipt.status") == 1 ? TraceStatus::kSuccess : TraceStatus::kRevert;
    } else {
        trace.status = trace.root.reverted ? TraceStatus::kRevert : TraceStatus::kSuccess;
    }
    if (bundle.contains("state_diff") && !bundle["state_diff"].is_null()) trace.storage_writes = adapt_state_diff(bundle["state_diff"]);

    auto violations = validate_trace(trace, tx);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return out;
}

json collect_historical_bundle(RpcClient& rpc, const std::string& tx_hash) {
    json bundle;
    bundle["transaction"] = rpc.call("eth_getTransactionByHash", json::array({tx_hash}));
    if (bundle["transaction"].is_null()) throw TransportError("transaction " + tx_hash + " not found");
    bundle["receipt"] = rpc.call("eth_getTransactionReceipt", json::array({tx_hash}));
    json block_number = bundle["transaction"].value("blockNumber", json("latest"));
    bundle["block"] = rpc.call("eth_getBlockByNumber", json::array({block_number, false}));
    bundle["call_trace"] = rpc.call("debug_traceTransaction",
                                    json::array({tx_hash, {{"tracer", "callTracer"}, {"tracerConfig", {{"withLog", true}}}}}));
    bundle["state_diff"] = rpc.call("debug_traceTransaction",
                                    json::array({tx_hash, {{"tracer", "prestateTracer"}, {"tracerConfig", {{"diffMode", true}}}}}));
    return bundle;
}

namespace {

    std::string hex_quantity(const uint256& v) {
        if (v == 0) return "0x0";
        std::ostringstream out;
        out << std::hex << v;
        std::string s = out.str();
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return "0x" + s;
    }

}  // namespace

json collect_simulation_bundle(RpcClient& rpc, const CallSpec& call) {
    const json call_object{{"from", call.from.hex()},
                           {"to", call.to.hex()},
                           {"value", hex_quantity(call.value)},
                           {"data", to_hex_prefixed(call.data)},
                           {"gas", hex_quantity(call.gas)}};
    json bundle;
    bundle["block"] = rpc.call("eth_getBlockByNumber", json::array({"latest", false}));
    const json gas_price = rpc.call("eth_gasPrice", json::array());
    const json nonce = rpc.call("eth_getTransactionCount", json::array({call.from.hex(), "latest"}));
    const json chain_id = rpc.call("eth_chainId", json::array());
    bundle["transaction"] = {{"from", call_object["from"]}, {"to", call_object["to"]},   {"value", call_object["value"]},
                             {"input", call_object["data"]}, {"gas", call_object["gas"]}, {"gasPrice", gas_price},
                             {"nonce", nonce},               {"chainId", chain_id}};
    bundle["call_trace"] = rpc.call("debug_traceCall", json::array({call_object, "latest",
                                                                    {{"tracer", "callTracer"}, {"tracerConfig", {{"withLog", true}}}}}));
    bundle["state_diff"] = rpc.call("debug_traceCall", json::array({call_object, "latest",
                                                                    {{"tracer", "prestateTracer"}, {"tracerConfig", {{"diffMode", true}}}}}));
    return bundle;
}

namespace {

    std::string read_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw TransportError("cannot open trace fixture '" + path.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    std::unique_ptr<RpcClient> rpc_for(const TraceSource& source) {
        return make_http_rpc_client(source.locator, source.credentials);
    }

}  // namespace

TracedTx fetch_trace(const TraceSource& source, const std::string& tx_reference, RpcClient& rpc) {
    source.check();
    switch (source.kind) {
        case TraceSource::Kind::kFixtureFile: {
            std::filesystem::path path = source.locator;
            if (std::filesystem::is_directory(path)) path /= is_tx_hash(tx_reference) ? tx_reference + ".json" : tx_reference;
            return parse_normalized_trace(std::string_view{read_file(path)});
        }
        case TraceSource::Kind::kLocalSimulator:
        case TraceSource::Kind::kRemoteSimulator:
            if (!is_tx_hash(tx_reference)) throw PreconditionError("expected a 32-byte transaction hash, got '" + tx_reference + "'");
            return adapt_geth_bundle(collect_historical_bundle(rpc, tx_reference));
        case TraceSource::Kind::kChainExplorer:
            if (!is_tx_hash(tx_reference)) throw PreconditionError("expected a 32-byte transaction hash, got '" + tx_reference + "'");
            throw AdapterError("chain explorer sources provide contract code, not execution traces");
    }
    throw AdapterError("unknown trace source");
}

TracedTx fetch_trace(const TraceSource& source, const std::string& tx_reference) {
    source.check();
    if (source.kind == TraceSource::Kind::kFixtureFile || source.kind == TraceSource::Kind::kChainExplorer) {
        struct NoRpc final : RpcClient {
            json call(const std::string& method, const json&) override {
                throw TransportError("no RPC transport for " + method);
            }
        } none;
        return fetch_trace(source, tx_reference, none);
    }
    if (!is_tx_hash(tx_reference)) throw PreconditionError("expected a 32-byte transaction hash, got '" + tx_reference + "'");
    auto rpc = rpc_for(source);
    return fetch_trace(source, tx_reference, *rpc);
}

TracedTx simulate_call(const TraceSource& source, const CallSpec& call, RpcClient& rpc) {
    source.check();
    if (source.kind != TraceSource::Kind::kLocalSimulator && source.kind != TraceSource::Kind::kRemoteSimulator)
        throw PreconditionError("simulation requires a simulator source, got " + std::string{to_string(source.kind)});
    return adapt_geth_bundle(collect_simulation_bundle(rpc, call));
}

TracedTx simulate_call(const TraceSource& source, const CallSpec& call) {
    source.check();
    auto rpc = rpc_for(source);
    return simulate_call(source, call, *rpc);
}

}  // namespace txlens
