// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <nlohmann/json.hpp>

#include <txlens/errors.hpp>
#include <txlens/model_output.hpp>

namespace txlens {

using nlohmann::json;
using nlohmann::ordered_json;

Confidence Confidence::from_double(double value) {
    return Confidence{std::llround(value * static_cast<double>(kScale))};
}

namespace {

    //! End of the balanced {...} starting at `start`, honouring JSON strings; npos if unbalanced
    std::size_t object_end(std::string_view text, std::size_t start) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
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
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) return i;
            }
        }
        return std::string_view::npos;
    }

    json first_object(std::string_view raw) {
        for (auto start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
            const auto end = object_end(raw, start);
            if (end == std::string_view::npos) continue;
            json candidate = json::parse(raw.substr(start, end - start + 1), nullptr, false);
            if (!candidate.is_discarded() && candidate.is_object()) return candidate;
        }
        throw NoJsonError("model reply contains no JSON object");
    }

    std::string required_string(const json& obj, const char* field) {
        if (!obj.contains(field) || !obj[field].is_string()) throw SchemaError(field, "expected string");
        return obj[field].get<std::string>();
    }

}  // namespace

ModelOutput parse_model_response(std::string_view raw, const std::string& model_id) {
    const json obj = first_object(raw);
    ModelOutput out;
    out.model_id = model_id;

    if (!obj.contains("risk") || !obj["risk"].is_string()) throw SchemaError("risk", "expected string");
    auto risk = parse_risk_label(obj["risk"].get<std::string>());
    if (!risk) throw SchemaError("risk", "unknown label '" + obj["risk"].get<std::string>() + "'");
    out.risk = *risk;

    if (!obj.contains("confidence") || !obj["confidence"].is_number()) throw SchemaError("confidence", "expected number");
    const double confidence = obj["confidence"].get<double>();
    if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0)
        throw SchemaError("confidence", "must lie in [0, 1]");
    out.confidence = Confidence::from_double(confidence);

    out.justification = required_string(obj, "justification");
    out.summary = required_string(obj, "summary");

    if (!obj.contains("importance") || !obj["importance"].is_object()) throw SchemaError("importance", "expected object");
    const auto& importance = obj["importance"];
    for (auto d : kDimensions) {
        const std::string key{to_string(d)};
        if (!importance.contains(key) || !importance[key].is_number())
            throw SchemaError("importance." + key, "expected number");
        const double w = importance[key].get<double>();
        if (!std::isfinite(w) || w < 0.0) throw SchemaError("importance." + key, "must be non-negative");
        out.importance[d] = w;
    }
    const double sum = out.importance.sum();
    if (std::abs(sum - 1.0) > kImportanceTolerance) throw SchemaError("importance", "weights sum to " + std::to_string(sum));
    if (std::abs(sum - 1.0) > 1e-12)
        for (double& w : out.importance.values) w /= sum;

    if (!obj.contains("recommendations") || !obj["recommendations"].is_array())
        throw SchemaError("recommendations", "expected array of strings");
    for (const auto& r : obj["recommendations"]) {
        if (!r.is_string()) throw SchemaError("recommendations", "expected array of strings");
        out.recommendations.push_back(r.get<std::string>());
    }
    return out;
}

std::string render_model_output(const ModelOutput& output) {
    ordered_json j;
    j["risk"] = std::string{to_string(output.risk)};
    j["confidence"] = output.confidence.value();
    j["justification"] = output.justification;
    j["summary"] = output.summary;
    ordered_json importance;
    for (auto d : kDimensions) importance[std::string{to_string(d)}] = output.importance[d];
    j["importance"] = std::move(importance);
    j["recommendations"] = output.recommendations;
    return j.dump();
}

}  // namespace txlens
