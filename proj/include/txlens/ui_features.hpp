// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <txlens/types.hpp>

namespace txlens {

struct CalldataConstructionSite {
    std::size_t script_index{0};
    std::size_t line{0};  // 1-based
    std::string snippet;

    bool operator==(const CalldataConstructionSite&) const = default;
};

struct SigningInitiationSite {
    std::size_t script_index{0};
    std::size_t line{0};  // 1-based
    std::string api_name;

    bool operator==(const SigningInitiationSite&) const = default;
};

struct UIFindings {
    bool present{false};
    std::optional<std::string> main_domain;
    std::vector<CalldataConstructionSite> calldata_construction_sites;
    std::vector<SigningInitiationSite> signing_initiation_sites;
    std::vector<std::string> notes;

    bool operator==(const UIFindings&) const = default;
};

//! Host part of an absolute URL, lowercased, without port or userinfo
std::optional<std::string> url_host(std::string_view url);

//! Public-suffix-aware registrable domain ("app.example.co.uk" -> "example.co.uk").
//! Uses a bundled suffix snapshot; unknown suffixes fall back to the last two labels. IP literals are returned as-is.
std::string registrable_domain(std::string_view host);

//! Token-level scan of page scripts for signing calls and calldata construction, plus the page's main domain
UIFindings extract_ui_features(const TxEnvelope& tx);

}  // namespace txlens
