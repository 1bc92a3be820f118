// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <txlens/model_output.hpp>
#include <txlens/trace_ingest.hpp>

namespace support {

//! tests/data in the source tree
std::filesystem::path data_dir();

std::string read_text(const std::filesystem::path& path);

//! tests/data/fixtures/<name>.json, parsed
txlens::TracedTx load_fixture(const std::string& name);

txlens::Address address(const std::string& hex);
txlens::Word word(const std::string& hex);

//! Output with default importance and fixed text
txlens::ModelOutput output(const std::string& id, txlens::RiskLabel risk, std::int64_t confidence_nanos);

//! The sha256-derived address the corpus generator assigns to `name`
std::string corpus_address(const std::string& name);

//! Fresh empty directory under the system temp dir
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace support
