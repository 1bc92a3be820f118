// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include <txlens/hex.hpp>

namespace txlens {

//! Original Keccak-256 (0x01 domain padding), as used by the EVM
Word keccak256(ByteView data);

inline Word keccak256(std::string_view text) {
    return keccak256(ByteView{reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

//! First four bytes of keccak256 of a canonical signature such as "transfer(address,uint256)"
Selector selector_for_signature(std::string_view signature);

}  // namespace txlens
