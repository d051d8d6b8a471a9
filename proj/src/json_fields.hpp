#pragma once

// Field accessors that raise parse errors carrying the entity path.

#include <optional>
#include <string>

#include "json.hpp"
#include "refa/error.hpp"

namespace refa::detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw Error(errc::parse_error, path + " is not an object", path);
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(errc::parse_error, path + "." + key + " is missing", path);
    return *it;
}

inline std::string get_string(const json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_string()) throw Error(errc::parse_error, path + "." + key + " must be a string", path);
    return v.get<std::string>();
}

inline std::string opt_string(const json& obj, const char* key, const std::string& path,
                              std::string fallback = {}) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (!it->is_string()) throw Error(errc::parse_error, path + "." + key + " must be a string", path);
    return it->get<std::string>();
}

inline std::optional<std::string> maybe_string(const json& obj, const char* key,
                                               const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(errc::parse_error, path + "." + key + " must be a string", path);
    return it->get<std::string>();
}

inline bool opt_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) throw Error(errc::parse_error, path + "." + key + " must be a boolean", path);
    return it->get<bool>();
}

inline long long get_int(const json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_number_integer()) throw Error(errc::parse_error, path + "." + key + " must be an integer", path);
    return v.get<long long>();
}

inline std::optional<long long> maybe_int(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw Error(errc::parse_error, path + "." + key + " must be an integer", path);
    return it->get<long long>();
}

inline const json& get_array(const json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_array()) throw Error(errc::parse_error, path + "." + key + " must be an array", path);
    return v;
}

}  // namespace refa::detail
