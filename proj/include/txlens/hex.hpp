// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace txlens {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

//! Decodes hex with optional 0x prefix; odd length and non-hex digits yield nullopt
std::optional<Bytes> from_hex(std::string_view hex);

//! Lowercase hex, no prefix
std::string to_hex(ByteView bytes);

inline std::string to_hex_prefixed(ByteView bytes) { return "0x" + to_hex(bytes); }

//! Fixed-width big-endian byte string (addresses, words, selectors)
template <std::size_t N>
struct FixedBytes {
    std::array<std::uint8_t, N> bytes{};

    static constexpr std::size_t size() noexcept { return N; }

    //! Exact width after stripping 0x; case-insensitive
    static std::optional<FixedBytes> parse_exact(std::string_view hex) {
        auto raw = from_hex(hex);
        if (!raw || raw->size() != N) return std::nullopt;
        FixedBytes out;
        std::copy(raw->begin(), raw->end(), out.bytes.begin());
        return out;
    }

    //! Accepts up to N bytes and zero-left-pads; odd digit counts get a leading zero
    static std::optional<FixedBytes> parse_padded(std::string_view hex) {
        if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
        std::string even{hex};
        if (even.size() % 2 != 0) even.insert(even.begin(), '0');
        auto raw = from_hex(even);
        if (!raw || raw->size() > N) return std::nullopt;
        FixedBytes out;
        std::copy(raw->begin(), raw->end(), out.bytes.begin() + static_cast<std::ptrdiff_t>(N - raw->size()));
        return out;
    }

    static FixedBytes from_span(ByteView view) {
        FixedBytes out;
        std::copy_n(view.begin(), N, out.bytes.begin());
        return out;
    }

    [[nodiscard]] std::string hex() const { return to_hex_prefixed(bytes); }
    [[nodiscard]] bool is_zero() const noexcept {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    auto operator<=>(const FixedBytes&) const = default;
};

using Address = FixedBytes<20>;
using Word = FixedBytes<32>;
using Selector = FixedBytes<4>;

}  // namespace txlens
