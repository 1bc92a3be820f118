// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include <txlens/backend.hpp>
#include <txlens/errors.hpp>
#include <txlens/http.hpp>

namespace txlens {

using nlohmann::json;

namespace {

    std::optional<Prompt::Kind> parse_phase(const std::string& text) {
        if (text == "analysis") return Prompt::Kind::kAnalysis;
        if (text == "reflection") return Prompt::Kind::kReflection;
        if (text == "summary") return Prompt::Kind::kSummary;
        if (text == "any") return std::nullopt;
        throw ConfigError("scripted model: unknown phase '" + text + "'");
    }

    std::vector<std::string> parse_replies(const json& replies) {
        if (!replies.is_array()) throw ConfigError("scripted model: replies must be an array");
        std::vector<std::string> out;
        for (const auto& r : replies) out.push_back(r.is_string() ? r.get<std::string>() : r.dump());
        return out;
    }

    ScriptedModel::Rule parse_rule(const json& r) {
        if (!r.is_object()) throw ConfigError("scripted model: rule must be an object");
        ScriptedModel::Rule rule;
        if (r.contains("phase")) rule.phase = parse_phase(r["phase"].get<std::string>());
        if (r.contains("match")) rule.match = r["match"].get<std::string>();
        if (r.contains("replies")) rule.replies = parse_replies(r["replies"]);
        const auto fail = r.value("fail", std::string{});
        if (fail == "transport") {
            rule.fail = ScriptedModel::Rule::Failure::kTransport;
        } else if (fail == "timeout") {
            rule.fail = ScriptedModel::Rule::Failure::kTimeout;
        } else if (!fail.empty()) {
            throw ConfigError("scripted model: unknown failure '" + fail + "'");
        }
        if (rule.replies.empty() && rule.fail == ScriptedModel::Rule::Failure::kNone)
            throw ConfigError("scripted model: rule has neither replies nor fail");
        return rule;
    }

    std::string remote_reply(const ModelBackend& b, const Prompt& prompt, std::chrono::milliseconds timeout) {
        const auto url = Url::parse(b.endpoint);
        if (!url) throw ConfigError("model " + b.id + ": invalid endpoint '" + b.endpoint + "'");
        const json body = {
            {"model", b.model_name},
            {"temperature", 0},
            {"messages",
             json::array({{{"role", "system"}, {"content", prompt.system_text()}},
                          {{"role", "user"}, {"content", prompt.user_text()}}})},
        };
        HttpHeaders headers{{"Content-Type", "application/json"}};
        if (!b.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + b.api_key);
        const auto resp = http_post(*url, body.dump(), headers, timeout);
        if (resp.status < 200 || resp.status >= 300)
            throw TransportError("model " + b.id + ": HTTP " + std::to_string(resp.status));
        const json doc = json::parse(resp.body, nullptr, false);
        if (doc.is_discarded()) throw NoJsonError("model " + b.id + ": response body is not JSON");
        try {
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw NoJsonError("model " + b.id + ": response has no choices[0].message.content");
        }
    }

    std::string query_once(const ModelBackend& b, const Prompt& prompt, std::size_t round, std::chrono::milliseconds timeout) {
        ++*b.attempts;
        if (b.kind == ModelBackend::Kind::kScripted) {
            if (!b.script) throw ConfigError("model " + b.id + ": scripted backend has no script");
            return b.script->reply(prompt, round);
        }
        return remote_reply(b, prompt, timeout);
    }

}  // namespace

ScriptedModel ScriptedModel::from_json(const json& doc) {
    ScriptedModel model;
    try {
        if (!doc.is_object()) throw ConfigError("scripted model: expected an object");
        if (doc.contains("rules")) {
            for (const auto& r : doc["rules"]) model.rules.push_back(parse_rule(r));
        } else if (doc.contains("replies")) {
            Rule rule;
            rule.replies = parse_replies(doc["replies"]);
            model.rules.push_back(std::move(rule));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string{"scripted model: "} + e.what());
    }
    if (model.rules.empty()) throw ConfigError("scripted model: no rules");
    return model;
}

ScriptedModel ScriptedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scripted model: cannot open " + path.string());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("scripted model: invalid JSON in " + path.string());
    return from_json(doc);
}

ScriptedModel ScriptedModel::constant(const ModelOutput& reply) { return by_round({reply}); }

ScriptedModel ScriptedModel::by_round(const std::vector<ModelOutput>& replies) {
    Rule rule;
    for (const auto& r : replies) rule.replies.push_back(render_model_output(r));
    ScriptedModel model;
    model.rules.push_back(std::move(rule));
    return model;
}

std::string ScriptedModel::reply(const Prompt& prompt, std::size_t round) const {
    std::optional<std::string> text;
    for (const auto& rule : rules) {
        if (rule.phase && *rule.phase != prompt.kind) continue;
        if (!rule.match.empty()) {
            if (!text) text = prompt.render();
            if (text->find(rule.match) == std::string::npos) continue;
        }
        switch (rule.fail) {
            case Rule::Failure::kTransport:
                throw TransportError("scripted transport failure");
            case Rule::Failure::kTimeout:
                throw TimeoutError("scripted timeout");
            case Rule::Failure::kNone:
                break;
        }
        return rule.replies[std::min(round, rule.replies.size() - 1)];
    }
    throw AdapterError("scripted model: no rule matches this prompt");
}

ModelBackend parse_backend_descriptor(std::string_view descriptor, std::string id, std::string api_key) {
    ModelBackend b;
    b.id = std::move(id);
    if (descriptor.starts_with("remote:")) {
        const auto rest = descriptor.substr(7);
        const auto at = rest.find('@');
        if (at == std::string_view::npos || at == 0) throw ConfigError("model descriptor must be remote:<name>@<url>");
        b.kind = ModelBackend::Kind::kRemoteApi;
        b.model_name = std::string{rest.substr(0, at)};
        b.endpoint = std::string{rest.substr(at + 1)};
        if (!Url::parse(b.endpoint)) throw ConfigError("model descriptor has an invalid URL: " + b.endpoint);
        b.api_key = std::move(api_key);
        return b;
    }
    if (descriptor.starts_with("scripted:")) {
        b.kind = ModelBackend::Kind::kScripted;
        b.script = std::make_shared<const ScriptedModel>(ScriptedModel::load(std::string{descriptor.substr(9)}));
        return b;
    }
    throw ConfigError("unknown model descriptor '" + std::string{descriptor} + "'");
}

ModelBackend make_scripted_backend(std::string id, ScriptedModel script) {
    ModelBackend b;
    b.id = std::move(id);
    b.kind = ModelBackend::Kind::kScripted;
    b.script = std::make_shared<const ScriptedModel>(std::move(script));
    return b;
}

std::string query(const ModelBackend& backend, const Prompt& prompt, std::size_t round, std::chrono::milliseconds timeout) {
    try {
        return query_once(backend, prompt, round, timeout);
    } catch (const TransportError&) {
        return query_once(backend, prompt, round, timeout);
    }
}

ModelOutput ask(const ModelBackend& backend, const Prompt& prompt, std::size_t round, std::chrono::milliseconds timeout) {
    auto attempt = [&] { return parse_model_response(query_once(backend, prompt, round, timeout), backend.id); };
    try {
        return attempt();
    } catch (const TransportError&) {
    } catch (const NoJsonError&) {
    } catch (const SchemaError&) {
    }
    return attempt();
}

}  // namespace txlens
