// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <txlens/features.hpp>
#include <txlens/types.hpp>

namespace txlens {

//! Fixed-point confidence in units of 1e-9, so confidence sums compare exactly.
//! Not range-limited here; ModelOutput parsing enforces [0, 1].
struct Confidence {
    static constexpr std::int64_t kScale = 1'000'000'000;

    std::int64_t nanos{0};

    static Confidence from_double(double value);
    [[nodiscard]] double value() const noexcept { return static_cast<double>(nanos) / static_cast<double>(kScale); }

    Confidence& operator+=(Confidence other) noexcept {
        nanos += other.nanos;
        return *this;
    }
    friend Confidence operator+(Confidence a, Confidence b) noexcept { return a += b; }
    auto operator<=>(const Confidence&) const = default;
};

struct ModelOutput {
    std::string model_id;
    RiskLabel risk{RiskLabel::kSafe};
    Confidence confidence;
    std::string justification;
    std::string summary;
    DimensionWeights importance;  // sums to 1 within 1e-9
    std::vector<std::string> recommendations;

    bool operator==(const ModelOutput&) const = default;
};

//! Importance sums may deviate from 1 by at most this much before renormalization
inline constexpr double kImportanceTolerance = 0.02;

//! Extracts the first JSON object in `raw` (surrounding prose and code fences are ignored) and validates it.
//! Throws NoJsonError when no object is present and SchemaError(field) on enum, range, or shape violations.
ModelOutput parse_model_response(std::string_view raw, const std::string& model_id);

//! The reply-schema JSON for an output; parse_model_response(render_model_output(o), o.model_id) == o
std::string render_model_output(const ModelOutput& output);

}  // namespace txlens
