// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <txlens/hex.hpp>

namespace txlens {

//! "transfer( address , uint256 )" -> "transfer(address,uint256)"; throws PreconditionError when malformed.
//! uint/int without a width become uint256/int256.
std::string canonical_signature(std::string_view signature);

//! Parameter types of a canonical signature
std::vector<std::string> signature_types(std::string_view canonical);

//! Selector plus head-encoded arguments. Only static types are supported:
//! address, bool, uint8..uint256, int8..int256, bytes1..bytes32. Throws PreconditionError otherwise.
Bytes encode_call(std::string_view signature, const std::vector<std::string>& args);

//! Splits "a, b ,c" into trimmed values; empty text gives no values
std::vector<std::string> split_args(std::string_view text);

}  // namespace txlens
