// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace txlens {

//! Validates `doc` against a JSON Schema restricted to the keywords the report schema uses:
//! type, properties, required, additionalProperties (boolean or schema), items, enum, const,
//! minimum, maximum, minLength, pattern. Returns "<json-pointer>: <problem>" per violation.
std::vector<std::string> validate_json_schema(const nlohmann::json& doc, const nlohmann::json& schema);

}  // namespace txlens
