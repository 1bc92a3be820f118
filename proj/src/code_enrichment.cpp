// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cstdio>
#include <future>
#include <memory>
#include <set>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/http.hpp>
#include <txlens/trace_ingest.hpp>

namespace txlens {

using nlohmann::json;

namespace {

    class EtherscanClient final : public ExplorerClient {
      public:
        EtherscanClient(Url url, std::optional<std::string> api_key) : url_(std::move(url)), api_key_(std::move(api_key)) {}

        std::optional<std::string> verified_source(const Address& contract) override {
            Url request = url_;
            request.target += request.target.find('?') == std::string::npos ? "?" : "&";
            request.target += "module=contract&action=getsourcecode&address=" + contract.hex();
            if (api_key_) request.target += "&apikey=" + url_encode(*api_key_);

            const auto response = http_get(request, {}, std::chrono::seconds{30});
            if (response.status != 200) throw TransportError("explorer: HTTP status " + std::to_string(response.status));
            const json body = json::parse(response.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) throw TransportError("explorer: malformed response");
            if (body.value("status", std::string{"0"}) != "1")
                throw TransportError("explorer: " + body.value("result", body.value("message", std::string{"request failed"})));
            const auto& result = body["result"];
            if (!result.is_array() || result.empty()) return std::nullopt;
            auto source = result[0].value("SourceCode", std::string{});
            if (source.empty()) return std::nullopt;
            return source;
        }

      private:
        Url url_;
        std::optional<std::string> api_key_;
    };

    class CommandDecompiler final : public DecompilerClient {
      public:
        explicit CommandDecompiler(std::string command_template) : template_(std::move(command_template)) {}

        std::optional<std::string> decompile(const Address& contract) override {
            std::string command = template_;
            const std::string placeholder = "{address}";
            for (auto pos = command.find(placeholder); pos != std::string::npos; pos = command.find(placeholder))
                command.replace(pos, placeholder.size(), contract.hex());

            std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(command.c_str(), "r"), ::pclose);
            if (!pipe) throw TransportError("decompiler: cannot start '" + command + "'");
            std::string output;
            std::array<char, 4096> buf{};
            while (auto n = std::fread(buf.data(), 1, buf.size(), pipe.get())) output.append(buf.data(), n);
            const int status = ::pclose(pipe.release());
            if (status != 0) throw TransportError("decompiler exited with status " + std::to_string(status));
            if (output.find_first_not_of(" \t\r\n") == std::string::npos) return std::nullopt;
            return output;
        }

      private:
        std::string template_;
    };

    struct Lookup {
        CodeSnippet snippet;
        bool found{false};
        std::vector<std::string> warnings;
    };

    Lookup lookup(const Address& address, ExplorerClient* explorer, DecompilerClient* decompiler) {
        Lookup out;
        if (explorer) {
            try {
                if (auto source = explorer->verified_source(address)) {
                    out.snippet.verified_source = std::move(source);
                    out.found = true;
                    return out;
                }
            } catch (const std::exception& e) {
                out.warnings.push_back("source lookup failed for " + address.hex() + ": " + e.what());
            }
        }
        if (decompiler) {
            try {
                if (auto text = decompiler->decompile(address)) {
                    out.snippet.decompiled = std::move(text);
                    out.found = true;
                    return out;
                }
            } catch (const std::exception& e) {
                out.warnings.push_back("decompilation failed for " + address.hex() + ": " + e.what());
            }
        }
        out.warnings.push_back("no code available for " + address.hex());
        return out;
    }

}  // namespace

std::unique_ptr<ExplorerClient> make_etherscan_client(const std::string& api_url, std::optional<std::string> api_key) {
    auto url = Url::parse(api_url);
    if (!url) throw ConfigError("invalid explorer URL '" + api_url + "'");
    return std::make_unique<EtherscanClient>(std::move(*url), std::move(api_key));
}

std::unique_ptr<DecompilerClient> make_command_decompiler(std::string command_template) {
    return std::make_unique<CommandDecompiler>(std::move(command_template));
}

EnrichmentResult enrich_code_snippets(const ExecutionTrace& trace, ExplorerClient* explorer, DecompilerClient* decompiler) {
    EnrichmentResult result{trace, {}};

    std::vector<Address> pending;
    std::set<Address> seen;
    walk_preorder(trace.root, [&](const CallNode& node, const std::string&) {
        if (seen.insert(node.callee).second && !trace.code_snippets.contains(node.callee)) pending.push_back(node.callee);
    });

    std::vector<std::future<Lookup>> futures;
    futures.reserve(pending.size());
    for (const auto& address : pending)
        futures.push_back(std::async(std::launch::async, lookup, address, explorer, decompiler));

    // merge on this thread only, in call-tree order
    for (std::size_t i = 0; i < pending.size(); ++i) {
        Lookup found = futures[i].get();
        if (found.found) result.trace.code_snippets.emplace(pending[i], std::move(found.snippet));
        for (auto& w : found.warnings) result.warnings.push_back(std::move(w));
    }
    return result;
}

}  // namespace txlens
