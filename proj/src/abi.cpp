// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>

#include <txlens/abi.hpp>
#include <txlens/errors.hpp>
#include <txlens/keccak.hpp>
#include <txlens/types.hpp>

namespace txlens {

namespace {

    std::string strip_spaces(std::string_view text) {
        std::string out;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) out += c;
        return out;
    }

    bool is_ident(std::string_view s) {
        if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '$') return false;
        return true;
    }

    //! Width in bits for "uintN"/"intN" (256 when N is absent); 0 when malformed
    unsigned int_width(std::string_view type, std::string_view prefix) {
        const auto digits = type.substr(prefix.size());
        if (digits.empty()) return 256;
        unsigned bits = 0;
        for (char c : digits) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return 0;
            bits = bits * 10 + static_cast<unsigned>(c - '0');
            if (bits > 256) return 0;
        }
        return bits % 8 == 0 && bits >= 8 ? bits : 0;
    }

    std::string normalize_type(const std::string& type) {
        if (type == "uint") return "uint256";
        if (type == "int") return "int256";
        return type;
    }

    uint256 parse_integer(const std::string& text, const std::string& type) {
        std::optional<uint256> v;
        if (text.starts_with("0x") || text.starts_with("0X")) {
            if (auto w = Word::parse_padded(text)) v = word_to_u256(*w);
        } else {
            v = parse_decimal_u256(text);
        }
        if (!v) throw PreconditionError("argument '" + text + "' is not a valid " + type);
        return *v;
    }

    Word encode_arg(const std::string& type, const std::string& value) {
        if (type == "address") {
            auto a = Address::parse_exact(value);
            if (!a) throw PreconditionError("argument '" + value + "' is not an address");
            Word w;
            std::copy(a->bytes.begin(), a->bytes.end(), w.bytes.begin() + 12);
            return w;
        }
        if (type == "bool") {
            Word w;
            if (value == "true" || value == "1") {
                w.bytes[31] = 1;
            } else if (value != "false" && value != "0") {
                throw PreconditionError("argument '" + value + "' is not a bool");
            }
            return w;
        }
        if (type.starts_with("uint")) {
            const unsigned bits = int_width(type, "uint");
            const uint256 v = parse_integer(value, type);
            if (bits < 256 && (v >> bits) != 0) throw PreconditionError("argument '" + value + "' overflows " + type);
            return u256_to_word(v);
        }
        if (type.starts_with("int")) {
            const unsigned bits = int_width(type, "int");
            const bool negative = value.starts_with("-");
            const uint256 magnitude = parse_integer(negative ? value.substr(1) : value, type);
            const uint256 limit = uint256{1} << (bits - 1);
            if (negative ? magnitude > limit : magnitude >= limit)
                throw PreconditionError("argument '" + value + "' overflows " + type);
            return u256_to_word(negative ? uint256{0} - magnitude : magnitude);
        }
        if (type.starts_with("bytes")) {
            const auto raw = from_hex(value);
            const auto n = static_cast<std::size_t>(std::stoul(type.substr(5)));
            if (!raw || raw->size() != n) throw PreconditionError("argument '" + value + "' is not a " + type);
            Word w;
            std::copy(raw->begin(), raw->end(), w.bytes.begin());
            return w;
        }
        throw PreconditionError("unsupported ABI type " + type);
    }

    bool is_static_type(const std::string& type) {
        if (type == "address" || type == "bool") return true;
        if (type.starts_with("uint")) return int_width(type, "uint") != 0;
        if (type.starts_with("int")) return int_width(type, "int") != 0;
        if (type.starts_with("bytes") && type.size() > 5) {
            const auto rest = type.substr(5);
            if (rest.size() > 2 || !std::isdigit(static_cast<unsigned char>(rest[0]))) return false;
            if (rest.size() == 2 && !std::isdigit(static_cast<unsigned char>(rest[1]))) return false;
            const int n = std::stoi(rest);
            return n >= 1 && n <= 32;
        }
        return false;
    }

}  // namespace

std::string canonical_signature(std::string_view signature) {
    const auto s = strip_spaces(signature);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')' || !is_ident(std::string_view{s}.substr(0, open)))
        throw PreconditionError("malformed function signature '" + std::string{signature} + "'");
    std::string out = s.substr(0, open) + "(";
    const auto params = s.substr(open + 1, s.size() - open - 2);
    bool first = true;
    for (const auto& type : split_args(params)) {
        if (type.empty()) throw PreconditionError("malformed function signature '" + std::string{signature} + "'");
        if (!first) out += ",";
        out += normalize_type(type);
        first = false;
    }
    return out + ")";
}

std::vector<std::string> signature_types(std::string_view canonical) {
    const auto open = canonical.find('(');
    return split_args(canonical.substr(open + 1, canonical.size() - open - 2));
}

std::vector<std::string> split_args(std::string_view text) {
    std::vector<std::string> out;
    auto trimmed = [](std::string_view s) {
        const auto a = s.find_first_not_of(" \t");
        if (a == std::string_view::npos) return std::string{};
        const auto b = s.find_last_not_of(" \t");
        return std::string{s.substr(a, b - a + 1)};
    };
    if (trimmed(text).empty()) return out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            out.push_back(trimmed(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

Bytes encode_call(std::string_view signature, const std::vector<std::string>& args) {
    const auto canonical = canonical_signature(signature);
    const auto types = signature_types(canonical);
    if (types.size() != args.size())
        throw PreconditionError(canonical + " takes " + std::to_string(types.size()) + " argument(s), got " +
                                std::to_string(args.size()));
    const auto sel = selector_for_signature(canonical);
    Bytes out(sel.bytes.begin(), sel.bytes.end());
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (!is_static_type(types[i])) throw PreconditionError("unsupported ABI type " + types[i]);
        const auto word = encode_arg(types[i], args[i]);
        out.insert(out.end(), word.bytes.begin(), word.bytes.end());
    }
    return out;
}

}  // namespace txlens
