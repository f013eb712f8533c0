// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>
#include <recaudit/graph.hpp>

#include "jsonl.hpp"

#include <algorithm>
#include <set>

namespace recaudit {

using detail::json;

std::vector<EdgeList> load_edges(const std::filesystem::path& path) {
    std::vector<EdgeList> out;
    auto in = detail::open_input(path);
    detail::for_each_json_line(in, path.string(), [&](const json& obj, std::size_t) {
        EdgeList e;
        e.source = detail::required<std::string>(obj, "source");
        auto recs = obj.find("recs");
        if (recs == obj.end() || !recs->is_array()) throw ParseError("'recs' must be an array");
        e.recs = recs->get<std::vector<std::string>>();
        out.push_back(std::move(e));
    });
    return out;
}

RecGraph RecGraph::from_parts(std::span<const std::pair<std::string, Label>> nodes, std::span<const EdgeList> edges,
                              std::size_t max_out_degree) {
    RecGraph g;
    g.max_out_degree_ = max_out_degree;
    g.ids_.reserve(nodes.size());
    g.labels_.reserve(nodes.size());
    for (const auto& [id, label] : nodes) {
        if (!g.index_.emplace(id, g.ids_.size()).second) throw BuildError("duplicate node id '" + id + "'");
        g.ids_.push_back(id);
        g.labels_.push_back(label);
    }
    g.out_.resize(g.ids_.size());

    auto lookup = [&](const std::string& id) {
        auto it = g.index_.find(id);
        if (it == g.index_.end()) throw BuildError("edge references unknown video '" + id + "'");
        return it->second;
    };
    for (const auto& e : edges) {
        const NodeIndex src = lookup(e.source);
        auto& list = g.out_[src];
        for (const auto& r : e.recs) {
            const NodeIndex dst = lookup(r);
            if (std::find(list.begin(), list.end(), dst) != list.end()) continue;
            list.push_back(dst);
        }
        if (list.size() > max_out_degree) {
            throw BuildError("video '" + e.source + "' has " + std::to_string(list.size()) +
                             " recommendations, more than the limit of " + std::to_string(max_out_degree));
        }
    }
    for (const auto& l : g.out_) g.edge_count_ += l.size();
    return g;
}

std::optional<NodeIndex> RecGraph::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex RecGraph::index_of(std::string_view id) const {
    auto v = find(id);
    if (!v) throw LookupError("unknown video '" + std::string(id) + "'");
    return *v;
}

std::vector<Label> RecGraph::label_set() const {
    std::set<Label> s(labels_.begin(), labels_.end());
    return {s.begin(), s.end()};
}

std::vector<NodeIndex> RecGraph::nodes_with_label(const Label& label) const {
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < labels_.size(); ++v) {
        if (labels_[v] == label) out.push_back(v);
    }
    return out;
}

RecGraph build_graph(std::span<const VideoRecord> records, std::span<const EdgeList> edges,
                     const std::map<std::string, Label>& labels, std::size_t max_out_degree) {
    std::vector<std::pair<std::string, Label>> nodes;
    nodes.reserve(records.size());
    for (const auto& r : records) {
        auto it = labels.find(r.id);
        if (it == labels.end()) throw BuildError("no label assigned to video '" + r.id + "'");
        nodes.emplace_back(r.id, it->second);
    }
    return RecGraph::from_parts(nodes, edges, max_out_degree);
}

// ---------------------------------------------------------------------------

std::size_t TransitionCounts::at(const Label& src, const Label& dst) const {
    auto it = cells.find({src, dst});
    return it == cells.end() ? 0 : it->second;
}

std::size_t TransitionCounts::total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : cells) n += v;
    return n;
}

std::size_t TransitionCounts::row_total(const Label& src) const {
    std::size_t n = 0;
    for (const auto& [k, v] : cells) {
        if (k.first == src) n += v;
    }
    return n;
}

TransitionCounts transition_counts(const RecGraph& graph) {
    TransitionCounts tc;
    const auto labels = graph.label_set();
    for (const auto& a : labels) {
        for (const auto& b : labels) tc.cells[{a, b}] = 0;
    }
    for (NodeIndex v = 0; v < graph.size(); ++v) {
        for (NodeIndex w : graph.out(v)) ++tc.cells[{graph.label(v), graph.label(w)}];
    }
    return tc;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> out;
    out.reserve(values.size());
    const auto n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.push_back({values[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

RecComposition rec_composition(const RecGraph& graph, const Label& target) {
    RecComposition rc;
    std::map<Label, std::vector<double>> groups;
    for (NodeIndex v = 0; v < graph.size(); ++v) {
        const auto out = graph.out(v);
        if (out.empty()) continue;
        const auto hits = std::count_if(out.begin(), out.end(), [&](NodeIndex w) { return graph.label(w) == target; });
        const double f = static_cast<double>(hits) / static_cast<double>(out.size());
        rc.per_node.push_back({v, f});
        groups[graph.label(v)].push_back(f);
    }
    for (auto& [label, values] : groups) rc.by_group[label] = empirical_cdf(std::move(values));
    return rc;
}

// ---------------------------------------------------------------------------

StartDistribution uniform_start(std::span<const NodeIndex> nodes) {
    if (nodes.empty()) throw ContractError("uniform_start: no start nodes");
    StartDistribution d;
    const Rational w(1, static_cast<long long>(nodes.size()));
    for (NodeIndex v : nodes) d.emplace_back(v, w);
    return d;
}

Rational hitting_probability_oracle(const RecGraph& graph, const StartDistribution& start, const Label& target,
                                    std::size_t hops, bool include_start) {
    if (hops == 0) throw ContractError("hitting_probability_oracle: hops must be >= 1");
    Rational mass = 0;
    for (const auto& [v, w] : start) {
        if (v >= graph.size()) throw ContractError("hitting_probability_oracle: start node out of range");
        if (w < 0) throw ContractError("hitting_probability_oracle: negative start weight");
        mass += w;
    }
    if (mass != 1) throw ContractError("hitting_probability_oracle: start distribution does not sum to 1");

    const std::size_t n = graph.size();
    std::vector<bool> is_target(n);
    for (NodeIndex v = 0; v < n; ++v) is_target[v] = graph.label(v) == target;

    // reach[v] = P(hit within h steps | currently at v, v itself not counted)
    std::vector<Rational> reach(n, Rational(0));
    std::vector<Rational> next(n);
    for (std::size_t h = 1; h <= hops; ++h) {
        for (NodeIndex v = 0; v < n; ++v) {
            const auto out = graph.out(v);
            if (out.empty()) {
                next[v] = 0;
                continue;
            }
            Rational sum = 0;
            for (NodeIndex w : out) sum += is_target[w] ? Rational(1) : reach[w];
            next[v] = sum / static_cast<long long>(out.size());
        }
        std::swap(reach, next);
    }

    Rational p = 0;
    for (const auto& [v, w] : start) {
        p += w * ((include_start && is_target[v]) ? Rational(1) : reach[v]);
    }
    return p;
}

}  // namespace recaudit
