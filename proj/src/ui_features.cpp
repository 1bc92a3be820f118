// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <sstream>

#include <txlens/ui_features.hpp>

namespace txlens {

namespace {

    // Multi-label public suffixes seen on phishing and DApp hosting; single-label TLDs need no entry
    constexpr std::array<std::string_view, 48> kPublicSuffixes{
        "co.uk",        "org.uk",         "ac.uk",        "gov.uk",       "com.au",        "net.au",
        "org.au",       "co.jp",          "ne.jp",        "or.jp",        "co.kr",         "or.kr",
        "com.br",       "com.cn",         "net.cn",       "org.cn",       "com.hk",        "com.sg",
        "com.tw",       "co.in",          "co.nz",        "co.za",        "com.mx",        "com.tr",
        "com.ua",       "github.io",      "gitlab.io",    "vercel.app",   "netlify.app",   "pages.dev",
        "workers.dev",  "web.app",        "firebaseapp.com", "herokuapp.com", "onrender.com", "fly.dev",
        "eth.limo",     "eth.link",       "ipfs.dweb.link", "on-fleek.app", "azurewebsites.net", "cloudfront.net",
        "appspot.com",  "blogspot.com",   "repl.co",      "glitch.me",    "surge.sh",      "4everland.app",
    };

    std::string lower(std::string_view text) {
        std::string out{text};
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    }

    bool is_ipv4(std::string_view host) {
        static const std::regex re{R"(^\d{1,3}(\.\d{1,3}){3}$)"};
        return std::regex_match(host.begin(), host.end(), re);
    }

    struct Token {
        std::string_view needle;
        std::string_view api_name;
    };

    constexpr std::array<Token, 4> kSigningTokens{{
        {"eth_sendTransaction", "eth_sendTransaction"},
        {"eth_signTypedData", "eth_signTypedData"},
        {"personal_sign", "personal_sign"},
        {"sendTransaction(", "sendTransaction"},
    }};

    bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

    //! Occurrence of needle not glued to a longer identifier on its left
    bool contains_token(std::string_view line, std::string_view needle) {
        for (auto pos = line.find(needle); pos != std::string_view::npos; pos = line.find(needle, pos + 1)) {
            if (pos == 0 || !ident_char(line[pos - 1])) return true;
        }
        return false;
    }

    std::optional<std::string> construction_reason(const std::string& line) {
        static const std::regex selector_literal{R"(['"`]0x[0-9a-fA-F]{8}['"`])"};
        static const std::regex data_field{R"(\bdata\s*:)"};
        static const std::regex hex_literal{R"(['"`]0x[0-9a-fA-F]*)"};
        static const std::regex concatenation{R"(\+|\.concat\(|\$\{)"};

        if (line.find("encodeFunctionData") != std::string::npos) return "encodeFunctionData";
        if (std::regex_search(line, selector_literal)) return "selector literal";
        if (std::regex_search(line, data_field) && std::regex_search(line, hex_literal) && std::regex_search(line, concatenation))
            return "hex concatenation in data field";
        return std::nullopt;
    }

    std::string trimmed_snippet(const std::string& line) {
        const auto first = line.find_first_not_of(" \t");
        const auto last = line.find_last_not_of(" \t\r");
        if (first == std::string::npos) return {};
        std::string s = line.substr(first, last - first + 1);
        if (s.size() > 160) s = s.substr(0, 157) + "...";
        return s;
    }

}  // namespace

std::optional<std::string> url_host(std::string_view url) {
    auto sep = url.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    std::string_view rest = url.substr(sep + 3);
    rest = rest.substr(0, rest.find_first_of("/?#"));
    if (auto at = rest.rfind('@'); at != std::string_view::npos) rest = rest.substr(at + 1);
    if (rest.starts_with("[")) {
        auto close = rest.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        return lower(rest.substr(1, close - 1));
    }
    rest = rest.substr(0, rest.find(':'));
    while (rest.ends_with(".")) rest.remove_suffix(1);
    if (rest.empty()) return std::nullopt;
    return lower(rest);
}

std::string registrable_domain(std::string_view host_in) {
    std::string host = lower(host_in);
    while (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty() || is_ipv4(host) || host.find(':') != std::string::npos) return host;

    std::vector<std::string> labels;
    std::stringstream ss(host);
    for (std::string label; std::getline(ss, label, '.');) labels.push_back(label);

    std::size_t suffix_labels = 1;
    for (auto suffix : kPublicSuffixes) {
        const auto n = static_cast<std::size_t>(std::count(suffix.begin(), suffix.end(), '.')) + 1;
        if (n <= suffix_labels || n > labels.size()) continue;
        if (host == suffix || host.ends_with("." + std::string{suffix})) suffix_labels = n;
    }
    if (labels.size() <= suffix_labels) return host;
    std::string out;
    for (std::size_t i = labels.size() - suffix_labels - 1; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

UIFindings extract_ui_features(const TxEnvelope& tx) {
    UIFindings ui;
    const bool has_scripts = tx.page_scripts.has_value();
    if (!tx.origin_url && !has_scripts) return ui;
    ui.present = true;

    if (tx.origin_url) {
        if (auto host = url_host(*tx.origin_url)) {
            ui.main_domain = registrable_domain(*host);
        } else {
            ui.notes.push_back("origin URL has no parsable host: " + *tx.origin_url);
        }
    } else {
        ui.notes.emplace_back("no origin URL");
    }

    if (!has_scripts || tx.page_scripts->empty()) {
        ui.notes.emplace_back("no page scripts captured");
        return ui;
    }

    for (std::size_t index = 0; index < tx.page_scripts->size(); ++index) {
        const auto& script = (*tx.page_scripts)[index];
        if (script.content.empty()) {
            ui.notes.push_back("script " + std::to_string(index) + " has no content" + (script.url ? " (" + *script.url + ")" : ""));
            continue;
        }
        if (script.content.find('\0') != std::string::npos) {
            ui.notes.push_back("script " + std::to_string(index) + " is not text; skipped");
            continue;
        }
        std::istringstream lines(script.content);
        std::size_t line_no = 0;
        for (std::string line; std::getline(lines, line);) {
            ++line_no;
            for (const auto& token : kSigningTokens) {
                if (contains_token(line, token.needle))
                    ui.signing_initiation_sites.push_back({index, line_no, std::string{token.api_name}});
            }
            if (construction_reason(line)) ui.calldata_construction_sites.push_back({index, line_no, trimmed_snippet(line)});
        }
    }
    return ui;
}

}  // namespace txlens
