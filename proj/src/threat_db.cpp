// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/threat_db.hpp>

namespace txlens {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ThreatHit::Kind kind) noexcept {
    switch (kind) {
        case ThreatHit::Kind::kAddress:
            return "ADDRESS";
        case ThreatHit::Kind::kDomain:
            return "DOMAIN";
        case ThreatHit::Kind::kTag:
            return "TAG";
        case ThreatHit::Kind::kPattern:
            return "PATTERN";
    }
    return "ADDRESS";
}

namespace {

    enum class FileKind { kAddresses, kDomains, kTags, kPatterns };

    std::optional<FileKind> kind_of(const fs::path& path) {
        std::string name = path.filename().string();
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const auto ext = path.extension().string();
        if (ext == ".txt" && name.find("address") != std::string::npos) return FileKind::kAddresses;
        if (ext == ".txt" && name.find("domain") != std::string::npos) return FileKind::kDomains;
        if (ext == ".json" && name.find("tag") != std::string::npos) return FileKind::kTags;
        if (ext == ".json" && name.find("pattern") != std::string::npos) return FileKind::kPatterns;
        return std::nullopt;
    }

    std::string read_text(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError(path.string(), 0, "cannot open file");
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    std::string trim(std::string_view s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) return {};
        const auto last = s.find_last_not_of(" \t\r");
        return std::string{s.substr(first, last - first + 1)};
    }

    std::string normalize_domain(std::string d) {
        for (auto& c : d) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (d.starts_with("*.")) d = d.substr(2);
        while (!d.empty() && d.back() == '.') d.pop_back();
        return d;
    }

    //! Calls fn(line_no, key, source) for each non-comment line of a `key<TAB>source` file
    template <typename Fn>
    void for_each_entry(const fs::path& path, Fn&& fn) {
        std::istringstream in(read_text(path));
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            const auto text = trim(line);
            if (text.empty() || text.starts_with("#")) continue;
            const auto tab = text.find('\t');
            std::string key = trim(text.substr(0, tab));
            std::string source = tab == std::string::npos ? path.filename().string() : trim(text.substr(tab + 1));
            if (source.empty()) source = path.filename().string();
            fn(line_no, std::move(key), std::move(source));
        }
    }

    json parse_json(const fs::path& path) {
        const auto text = read_text(path);
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            const auto upto = std::min<std::size_t>(e.byte, text.size());
            const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
            throw LoadError(path.string(), line, "invalid JSON");
        }
    }

    //! 1-based line of the n-th occurrence of `needle` in the file, for error messages on parsed JSON
    std::size_t line_of_key(const fs::path& path, const std::string& needle) {
        const auto text = read_text(path);
        const auto pos = text.find(needle);
        if (pos == std::string::npos) return 0;
        return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    std::size_t line_of_element(const std::string& text, std::size_t index) {
        // elements of a top-level array of objects: count opening braces at depth 1
        int depth = 0;
        std::size_t seen = 0;
        std::size_t line = 1;
        bool in_string = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '\n') ++line;
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{') {
                if (depth == 1 && seen++ == index) return line;
                ++depth;
            } else if (c == ']' || c == '}') {
                --depth;
            }
        }
        return 0;
    }

    void load_patterns(const fs::path& path, ThreatDB& db) {
        const auto doc = parse_json(path);
        if (!doc.is_array()) throw LoadError(path.string(), 1, "expected an array of patterns");
        const auto text = read_text(path);
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const auto& p = doc[i];
            const auto line = line_of_element(text, i);
            auto fail = [&](const std::string& what) { throw LoadError(path.string(), line, what); };
            if (!p.is_object()) fail("pattern must be an object");

            SelectorPattern pattern;
            auto sel = p.contains("selector") && p["selector"].is_string() ? Selector::parse_exact(p["selector"].get<std::string>()) : std::nullopt;
            if (!sel) fail("pattern selector must be 4-byte hex");
            pattern.selector = *sel;
            if (p.contains("calldata_regex") && !p["calldata_regex"].is_null()) {
                if (!p["calldata_regex"].is_string()) fail("calldata_regex must be a string or null");
                pattern.calldata_regex = p["calldata_regex"].get<std::string>();
                try {
                    std::regex check{*pattern.calldata_regex};
                } catch (const std::regex_error&) {
                    fail("invalid calldata_regex");
                }
            }
            if (!p.contains("label") || !p["label"].is_string()) fail("pattern label must be a string");
            pattern.label = p["label"].get<std::string>();
            const auto severity = p.contains("severity") && p["severity"].is_string() ? parse_risk_label(p["severity"].get<std::string>()) : std::nullopt;
            if (!severity || *severity == RiskLabel::kSafe) fail("pattern severity must be SUSPICIOUS or MALICIOUS");
            pattern.severity = *severity;
            pattern.source = path.filename().string();

            auto same = std::find_if(db.selector_patterns.begin(), db.selector_patterns.end(), [&](const SelectorPattern& q) {
                return q.selector == pattern.selector && q.calldata_regex == pattern.calldata_regex && q.label == pattern.label;
            });
            if (same != db.selector_patterns.end()) {
                *same = std::move(pattern);
            } else {
                db.selector_patterns.push_back(std::move(pattern));
            }
        }
    }

    void load_tags(const fs::path& path, ThreatDB& db) {
        const auto doc = parse_json(path);
        if (!doc.is_object()) throw LoadError(path.string(), 1, "expected an object of address -> tags");
        for (const auto& [key, tags] : doc.items()) {
            const auto line = line_of_key(path, "\"" + key + "\"");
            auto addr = Address::parse_exact(key);
            if (!addr) throw LoadError(path.string(), line, "malformed address '" + key + "'");
            if (!tags.is_array()) throw LoadError(path.string(), line, "tags must be an array of strings");
            std::vector<std::string> list;
            for (const auto& t : tags) {
                if (!t.is_string()) throw LoadError(path.string(), line, "tags must be an array of strings");
                if (std::find(list.begin(), list.end(), t.get<std::string>()) == list.end()) list.push_back(t.get<std::string>());
            }
            db.contract_tags[*addr] = std::move(list);
        }
    }

}  // namespace

ThreatDB load_db(const std::vector<fs::path>& paths) {
    ThreatDB db;
    for (const auto& path : paths) {
        const auto kind = kind_of(path);
        if (!kind) throw LoadError(path.string(), 0, "unrecognised indicator file name");
        switch (*kind) {
            case FileKind::kAddresses:
                for_each_entry(path, [&](std::size_t line, std::string key, std::string source) {
                    auto addr = Address::parse_exact(key);
                    if (!addr || !(key.starts_with("0x") || key.starts_with("0X")))
                        throw LoadError(path.string(), line, "malformed address '" + key + "'");
                    db.blacklisted_addresses[*addr] = std::move(source);
                });
                break;
            case FileKind::kDomains:
                for_each_entry(path, [&](std::size_t line, std::string key, std::string source) {
                    auto domain = normalize_domain(std::move(key));
                    if (domain.empty() || domain.find_first_of(" /:@") != std::string::npos)
                        throw LoadError(path.string(), line, "malformed domain");
                    db.blacklisted_domains[domain] = std::move(source);
                });
                break;
            case FileKind::kTags:
                load_tags(path, db);
                break;
            case FileKind::kPatterns:
                load_patterns(path, db);
                break;
        }
    }
    return db;
}

std::vector<fs::path> db_files_in(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) throw LoadError(dir.string(), 0, "not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && kind_of(entry.path())) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ThreatHit> query_all(const ThreatDB& db, const TxEnvelope& tx, const ExecutionTrace& trace, const UIFindings& ui) {
    std::vector<ThreatHit> hits;
    if (db.empty()) return hits;

    std::vector<Address> addresses;
    std::set<Address> seen;
    auto visit = [&](const Address& a) {
        if (seen.insert(a).second) addresses.push_back(a);
    };
    visit(tx.sender);
    if (tx.recipient) visit(*tx.recipient);
    walk_preorder(trace.root, [&](const CallNode& node, const std::string&) {
        visit(node.caller);
        visit(node.callee);
    });

    for (const auto& a : addresses) {
        if (auto it = db.blacklisted_addresses.find(a); it != db.blacklisted_addresses.end())
            hits.push_back({ThreatHit::Kind::kAddress, a.hex(), "blacklisted address", std::nullopt, it->second});
        if (auto it = db.contract_tags.find(a); it != db.contract_tags.end())
            for (const auto& tag : it->second) hits.push_back({ThreatHit::Kind::kTag, a.hex(), tag, std::nullopt, "tags"});
    }

    if (ui.main_domain) {
        if (auto it = db.blacklisted_domains.find(*ui.main_domain); it != db.blacklisted_domains.end())
            hits.push_back({ThreatHit::Kind::kDomain, *ui.main_domain, "blacklisted domain", std::nullopt, it->second});
    }

    if (!db.selector_patterns.empty()) {
        std::vector<std::optional<std::regex>> compiled;
        compiled.reserve(db.selector_patterns.size());
        for (const auto& p : db.selector_patterns)
            compiled.push_back(p.calldata_regex ? std::optional<std::regex>{std::regex{*p.calldata_regex}} : std::nullopt);

        walk_preorder(trace.root, [&](const CallNode& node, const std::string&) {
            const auto sel = selector_of(node.input);
            if (!sel) return;
            std::optional<std::string> hex;
            for (std::size_t i = 0; i < db.selector_patterns.size(); ++i) {
                const auto& p = db.selector_patterns[i];
                if (p.selector != *sel) continue;
                if (compiled[i]) {
                    if (!hex) hex = to_hex(node.input);
                    if (!std::regex_search(*hex, *compiled[i])) continue;
                }
                hits.push_back({ThreatHit::Kind::kPattern, node.callee.hex() + ":" + to_hex(sel->bytes), p.label, p.severity, p.source});
            }
        });
    }
    return hits;
}

}  // namespace txlens
