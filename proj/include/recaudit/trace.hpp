// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/corpus.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace recaudit {

struct TraceStep {
    std::string id;
    Label label;

    bool operator==(const TraceStep&) const = default;
};

/// One random walk. Position 0 is the start video (hop 0); position k is hop k.
struct WalkTrace {
    std::vector<TraceStep> nodes;
    bool truncated = false;
    std::uint64_t seed = 0;

    std::size_t hops() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
    bool operator==(const WalkTrace&) const = default;
};

std::string serialize_trace(const WalkTrace& trace);
void write_traces(std::ostream& out, std::span<const WalkTrace> traces);
std::vector<WalkTrace> read_traces(std::istream& in);
std::vector<WalkTrace> load_traces(const std::filesystem::path& path);

}  // namespace recaudit
