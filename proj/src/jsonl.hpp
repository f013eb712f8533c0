// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/error.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>

namespace recaudit::detail {

using json = nlohmann::json;

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open input file: " + path.string());
    }
    return in;
}

/// Calls fn(object, line_number) for every non-blank line. Parse failures and
/// exceptions thrown by fn are reported with the 1-based line number.
template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected a JSON object");
        }
        try {
            fn(obj, lineno);
        } catch (const json::exception& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

template <typename T>
T required(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing required key '") + key + "'");
    return it->get<T>();
}

}  // namespace recaudit::detail
