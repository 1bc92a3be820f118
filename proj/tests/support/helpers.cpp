// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>
#include <unistd.h>

namespace support {

std::filesystem::path data_dir() { return TXLENS_TEST_DATA_DIR; }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

txlens::TracedTx load_fixture(const std::string& name) {
    return txlens::parse_normalized_trace(std::string_view{read_text(data_dir() / "fixtures" / (name + ".json"))});
}

txlens::Address address(const std::string& hex) {
    auto a = txlens::Address::parse_exact(hex);
    if (!a) throw std::invalid_argument("bad address " + hex);
    return *a;
}

txlens::Word word(const std::string& hex) {
    auto w = txlens::Word::parse_padded(hex);
    if (!w) throw std::invalid_argument("bad word " + hex);
    return *w;
}

txlens::ModelOutput output(const std::string& id, txlens::RiskLabel risk, std::int64_t confidence_nanos) {
    txlens::ModelOutput o;
    o.model_id = id;
    o.risk = risk;
    o.confidence = txlens::Confidence{confidence_nanos};
    o.justification = id + " justification";
    o.summary = id + " summary";
    o.importance = txlens::kDefaultWeights;
    o.recommendations = {"Check the spender."};
    return o;
}

std::string corpus_address(const std::string& name) {
    unsigned char digest[32];
    unsigned int len = 0;
    EVP_Digest(name.data(), name.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "0x";
    for (int i = 0; i < 20; ++i) {
        out += kDigits[digest[i] >> 4];
        out += kDigits[digest[i] & 0xf];
    }
    return out;
}

std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("txlens-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace support
