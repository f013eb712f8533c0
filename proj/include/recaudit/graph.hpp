// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/corpus.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace recaudit {

using NodeIndex = std::size_t;
using Rational = boost::multiprecision::cpp_rational;

/// One line of edges.jsonl: a video and its recommendations in rank order.
struct EdgeList {
    std::string source;
    std::vector<std::string> recs;
};

std::vector<EdgeList> load_edges(const std::filesystem::path& path);

/// Immutable labeled recommendation graph. Node indices follow the order in
/// which nodes were supplied; out-lists keep recommendation rank order.
class RecGraph {
public:
    static constexpr std::size_t kDefaultMaxOutDegree = 10;

    /// Duplicate targets within a source's recommendations collapse to their
    /// first occurrence. Throws BuildError on unknown endpoints, duplicate node
    /// ids, or an out-list longer than `max_out_degree`.
    static RecGraph from_parts(std::span<const std::pair<std::string, Label>> nodes, std::span<const EdgeList> edges,
                               std::size_t max_out_degree = kDefaultMaxOutDegree);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    std::size_t max_out_degree() const noexcept { return max_out_degree_; }

    const std::string& id(NodeIndex v) const { return ids_.at(v); }
    const Label& label(NodeIndex v) const { return labels_.at(v); }
    std::span<const NodeIndex> out(NodeIndex v) const { return out_.at(v); }

    std::optional<NodeIndex> find(std::string_view id) const;
    /// Throws LookupError for unknown ids.
    NodeIndex index_of(std::string_view id) const;

    /// Distinct labels carried by nodes, sorted by name.
    std::vector<Label> label_set() const;
    std::vector<NodeIndex> nodes_with_label(const Label& label) const;

private:
    RecGraph() = default;

    std::vector<std::string> ids_;
    std::vector<Label> labels_;
    std::vector<std::vector<NodeIndex>> out_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::size_t edge_count_ = 0;
    std::size_t max_out_degree_ = kDefaultMaxOutDegree;
};

/// Builds the graph over `records` with labels taken from `labels`, which must
/// cover every record.
RecGraph build_graph(std::span<const VideoRecord> records, std::span<const EdgeList> edges,
                     const std::map<std::string, Label>& labels,
                     std::size_t max_out_degree = RecGraph::kDefaultMaxOutDegree);

struct TransitionCounts {
    std::map<std::pair<Label, Label>, std::size_t> cells;

    std::size_t at(const Label& src, const Label& dst) const;
    std::size_t total() const;
    std::size_t row_total(const Label& src) const;
};

/// One count per directed edge in cell (label(src), label(dst)). Every pair
/// of labels present in the graph gets a cell, including empty ones.
TransitionCounts transition_counts(const RecGraph& graph);

struct CdfPoint {
    double value = 0;
    double cumulative = 0;
};

struct NodeComposition {
    NodeIndex node = 0;
    double fraction = 0;  // share of out-neighbors bearing the target label
};

struct RecComposition {
    std::vector<NodeComposition> per_node;          // nodes with out-degree > 0, by index
    std::map<Label, std::vector<CdfPoint>> by_group;  // keyed by source label
};

/// Empirical CDF: sorted values with cumulative step (i + 1) / n.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

RecComposition rec_composition(const RecGraph& graph, const Label& target);

using StartDistribution = std::vector<std::pair<NodeIndex, Rational>>;

StartDistribution uniform_start(std::span<const NodeIndex> nodes);

/// Exact probability that a walk choosing a uniformly random out-edge at each
/// step visits a `target`-labeled node within `hops` steps. The start node is
/// not a visit unless `include_start` is set. Dead ends absorb the walk.
Rational hitting_probability_oracle(const RecGraph& graph, const StartDistribution& start, const Label& target,
                                    std::size_t hops, bool include_start = false);

}  // namespace recaudit
