// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <regex>

#include <txlens/json_schema.hpp>

namespace txlens {

using nlohmann::json;

namespace {

    bool has_type(const json& v, const std::string& type) {
        if (type == "object") return v.is_object();
        if (type == "array") return v.is_array();
        if (type == "string") return v.is_string();
        if (type == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
        if (type == "number") return v.is_number();
        if (type == "boolean") return v.is_boolean();
        if (type == "null") return v.is_null();
        return false;
    }

    void check(const json& v, const json& schema, const std::string& at, std::vector<std::string>& out) {
        if (schema.is_boolean()) {
            if (!schema.get<bool>()) out.push_back(at + ": not allowed");
            return;
        }
        if (schema.contains("type")) {
            const auto& t = schema["type"];
            bool ok = false;
            if (t.is_string()) {
                ok = has_type(v, t.get<std::string>());
            } else {
                for (const auto& alt : t) ok = ok || has_type(v, alt.get<std::string>());
            }
            if (!ok) {
                out.push_back(at + ": expected type " + t.dump());
                return;
            }
        }
        if (schema.contains("const") && v != schema["const"]) out.push_back(at + ": expected " + schema["const"].dump());
        if (schema.contains("enum")) {
            const auto& options = schema["enum"];
            if (std::find(options.begin(), options.end(), v) == options.end())
                out.push_back(at + ": value " + v.dump() + " not in enum");
        }
        if (v.is_number()) {
            const double x = v.get<double>();
            if (schema.contains("minimum") && x < schema["minimum"].get<double>()) out.push_back(at + ": below minimum");
            if (schema.contains("maximum") && x > schema["maximum"].get<double>()) out.push_back(at + ": above maximum");
        }
        if (v.is_string()) {
            const auto& s = v.get_ref<const std::string&>();
            if (schema.contains("minLength") && s.size() < schema["minLength"].get<std::size_t>())
                out.push_back(at + ": shorter than minLength");
            if (schema.contains("pattern") && !std::regex_search(s, std::regex{schema["pattern"].get<std::string>()}))
                out.push_back(at + ": does not match pattern");
        }
        if (v.is_array() && schema.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) check(v[i], schema["items"], at + "/" + std::to_string(i), out);
        }
        if (v.is_object()) {
            if (schema.contains("required"))
                for (const auto& key : schema["required"])
                    if (!v.contains(key.get<std::string>())) out.push_back(at + ": missing required '" + key.get<std::string>() + "'");
            const json empty = json::object();
            const auto& props = schema.contains("properties") ? schema["properties"] : empty;
            for (const auto& [key, value] : v.items()) {
                const auto path = at + "/" + key;
                if (props.contains(key)) {
                    check(value, props[key], path, out);
                } else if (schema.contains("additionalProperties")) {
                    check(value, schema["additionalProperties"], path, out);
                }
            }
        }
    }

}  // namespace

std::vector<std::string> validate_json_schema(const json& doc, const json& schema) {
    std::vector<std::string> out;
    check(doc, schema, "", out);
    return out;
}

}  // namespace txlens
