// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>
#include <recaudit/trace.hpp>

#include "jsonl.hpp"

#include <ostream>

namespace recaudit {

using detail::json;

std::string serialize_trace(const WalkTrace& trace) {
    json nodes = json::array();
    for (const auto& s : trace.nodes) nodes.push_back({{"id", s.id}, {"label", s.label.name}});
    json obj = {{"seed", trace.seed}, {"truncated", trace.truncated}, {"nodes", std::move(nodes)}};
    return obj.dump();
}

void write_traces(std::ostream& out, std::span<const WalkTrace> traces) {
    for (const auto& t : traces) out << serialize_trace(t) << '\n';
}

std::vector<WalkTrace> read_traces(std::istream& in) {
    std::vector<WalkTrace> out;
    detail::for_each_json_line(in, "traces", [&](const json& obj, std::size_t) {
        WalkTrace t;
        auto seed = obj.find("seed");
        if (seed == obj.end() || !seed->is_number_unsigned()) throw ParseError("'seed' must be an unsigned integer");
        t.seed = seed->get<std::uint64_t>();
        t.truncated = detail::required<bool>(obj, "truncated");
        auto nodes = obj.find("nodes");
        if (nodes == obj.end() || !nodes->is_array()) throw ParseError("'nodes' must be an array");
        for (const auto& n : *nodes) {
            t.nodes.push_back({detail::required<std::string>(n, "id"), Label(detail::required<std::string>(n, "label"))});
        }
        if (t.nodes.empty()) throw ParseError("trace has no nodes");
        out.push_back(std::move(t));
    });
    return out;
}

std::vector<WalkTrace> load_traces(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_traces(in);
}

}  // namespace recaudit
