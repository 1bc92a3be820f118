// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <txlens/model_output.hpp>
#include <txlens/prompt.hpp>

namespace txlens {

//! Offline model: a list of rules tried in order; the first whose phase and marker both match answers.
//! A rule's replies are indexed by round, clamped to the last entry.
struct ScriptedModel {
    struct Rule {
        std::optional<Prompt::Kind> phase;  // nullopt matches every phase
        std::string match;                  // substring of the rendered prompt; empty matches all
        std::vector<std::string> replies;   // raw reply text
        enum class Failure : std::uint8_t { kNone, kTransport, kTimeout } fail{Failure::kNone};
    };
    std::vector<Rule> rules;

    //! {"rules": [{"phase", "match", "replies", "fail"}]} or {"replies": [...]}; reply entries are objects or strings
    static ScriptedModel from_json(const nlohmann::json& doc);
    static ScriptedModel load(const std::filesystem::path& path);
    //! One rule, every phase, every round answered by `reply`
    static ScriptedModel constant(const ModelOutput& reply);
    //! One rule, every phase, reply i answers round i
    static ScriptedModel by_round(const std::vector<ModelOutput>& replies);

    //! Throws TransportError/TimeoutError for failing rules and AdapterError when no rule matches
    [[nodiscard]] std::string reply(const Prompt& prompt, std::size_t round) const;
};

struct ModelBackend {
    enum class Kind : std::uint8_t { kRemoteApi, kScripted };

    std::string id;
    Kind kind{Kind::kScripted};
    // REMOTE_API
    std::string model_name;
    std::string endpoint;
    std::string api_key;
    // SCRIPTED
    std::shared_ptr<const ScriptedModel> script;
    // transport attempts made through this backend, for diagnostics and tests
    std::shared_ptr<std::atomic<int>> attempts{std::make_shared<std::atomic<int>>(0)};
};

inline constexpr std::chrono::milliseconds kDefaultModelTimeout{60'000};

//! `remote:<name>@<url>` or `scripted:<path>`; throws ConfigError
ModelBackend parse_backend_descriptor(std::string_view descriptor, std::string id, std::string api_key = {});

ModelBackend make_scripted_backend(std::string id, ScriptedModel script);

//! Raw reply text. One automatic retry on TransportError; the second failure propagates.
std::string query(const ModelBackend& backend, const Prompt& prompt, std::size_t round,
                  std::chrono::milliseconds timeout = kDefaultModelTimeout);

//! query + parse_model_response; a transport failure or malformed reply gets one retry, then propagates
ModelOutput ask(const ModelBackend& backend, const Prompt& prompt, std::size_t round,
                std::chrono::milliseconds timeout = kDefaultModelTimeout);

}  // namespace txlens
