#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "problem.hpp"
#include "scalar.hpp"

namespace solman {

using json = nlohmann::json;

namespace detail {

inline double number_field(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(std::string("missing field '") + key + "'");
    }
    if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline std::vector<double> array_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw ConfigError(std::string("field '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline ScalarFn table_from_json(const json& j) {
    try {
        return table_fn(array_field(j, "ts"), array_field(j, "xs"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline ScalarFn g_from_json(const json& j, std::string& name) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("g must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    name = kind;
    if (kind == "linear") return linear_fn(number_field(j, "slope"));
    if (kind == "sine")
        return sine_fn(number_field(j, "amplitude", 1.0), number_field(j, "frequency", 1.0),
                       number_field(j, "offset", 0.0));
    if (kind == "table") return table_from_json(j);
    throw ConfigError("unknown g kind '" + kind + "' (expected linear, sine or table)");
}

inline ScalarFn d_from_json(const json& j, double eta0, double r, std::string& name) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("d must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    name = kind;
    if (kind == "rational_square") {
        const double scale = number_field(j, "scale", 1.0);
        if (!(scale > 0.0) || scale > r) throw ConfigError("rational_square: scale must lie in (0, r]");
        return rational_square_fn(scale, eta0);
    }
    if (kind == "table") return table_from_json(j);
    throw ConfigError("unknown d kind '" + kind + "' (expected rational_square or table)");
}

} // namespace detail

/// Instance description from JSON:
/// {"r", "eta0", "rho", "g": {kind, ...}, "d": {kind, ...}, "sample_range",
///  "safety_factor", "c" (optional override)}.
inline ProblemSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ProblemSpec s;
    s.r = detail::number_field(j, "r");
    s.eta0 = detail::number_field(j, "eta0");
    s.rho = detail::number_field(j, "rho", 1.0);
    s.sample_range = detail::number_field(j, "sample_range", 10.0);
    s.safety_factor = detail::number_field(j, "safety_factor", 1.01);
    if (j.contains("c")) s.c_override = detail::number_field(j, "c");
    if (!j.contains("g")) throw ConfigError("missing field 'g'");
    if (!j.contains("d")) throw ConfigError("missing field 'd'");
    s.g = detail::g_from_json(j.at("g"), s.g_name);
    s.d = detail::d_from_json(j.at("d"), s.eta0, s.r, s.d_name);
    return s;
}

inline Problem problem_from_json(const json& j) { return make_problem(spec_from_json(j)); }

inline Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return problem_from_json(j);
}

/// The two reference instances: g(x) = -x (LIN) and g(x) = sin(x)/2 (SIN),
/// both with r = 1, eta0 = 0, rho = 1 and d(x) = x^2/(1 + x^2).
inline json lin_config() {
    return json{{"r", 1.0},
                {"eta0", 0.0},
                {"rho", 1.0},
                {"g", {{"kind", "linear"}, {"slope", -1.0}}},
                {"d", {{"kind", "rational_square"}, {"scale", 1.0}}}};
}

inline json sin_config() {
    return json{{"r", 1.0},
                {"eta0", 0.0},
                {"rho", 1.0},
                {"g", {{"kind", "sine"}, {"amplitude", 0.5}, {"frequency", 1.0}, {"offset", 0.0}}},
                {"d", {{"kind", "rational_square"}, {"scale", 1.0}}}};
}

} // namespace solman
