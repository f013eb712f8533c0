// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>
#include <recaudit/metrics.hpp>
#include <recaudit/walker.hpp>

#include "jsonl.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <thread>

namespace recaudit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unbiased draw in [0, n). std::uniform_int_distribution is not specified
// bit-for-bit across standard libraries, so it is avoided here.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

std::vector<NodeIndex> node_sequence(const RecGraph& graph, const WalkTrace& t) {
    std::vector<NodeIndex> seq;
    seq.reserve(t.nodes.size());
    for (const auto& s : t.nodes) seq.push_back(graph.index_of(s.id));
    return seq;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t walk, std::uint64_t attempt) noexcept {
    std::uint64_t x = splitmix64(master);
    x = splitmix64(x ^ walk);
    return splitmix64(x ^ (attempt * 0xd1b54a32d192ed03ULL));
}

std::vector<NodeIndex> select_start_nodes(const RecGraph& graph, const WalkConfig& config) {
    std::vector<NodeIndex> starts;
    switch (config.start) {
    case StartScenario::TargetStart:
        starts = graph.nodes_with_label(config.target);
        break;
    case StartScenario::OtherStart:
        for (NodeIndex v = 0; v < graph.size(); ++v) {
            if (graph.label(v) != config.target) starts.push_back(v);
        }
        break;
    case StartScenario::Explicit:
        for (const auto& id : config.start_nodes) {
            auto v = graph.find(id);
            if (!v) throw ConfigError("start video '" + id + "' is not in the graph");
            starts.push_back(*v);
        }
        break;
    }
    if (starts.empty()) throw ConfigError("start scenario selects no videos");
    return starts;
}

WalkTrace simulate_walk(const RecGraph& graph, std::span<const NodeIndex> starts, const WalkConfig& config,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    WalkTrace trace;
    trace.seed = seed;
    NodeIndex cur = starts[bounded(rng, starts.size())];
    std::vector<NodeIndex> visited{cur};
    std::vector<NodeIndex> candidates;
    for (std::size_t h = 1; h <= config.hops; ++h) {
        candidates.clear();
        for (NodeIndex w : graph.out(cur)) {
            if (config.no_repeat && std::find(visited.begin(), visited.end(), w) != visited.end()) continue;
            candidates.push_back(w);
        }
        if (candidates.empty()) {
            trace.truncated = true;
            break;
        }
        cur = candidates[bounded(rng, candidates.size())];
        visited.push_back(cur);
    }
    trace.nodes.reserve(visited.size());
    for (NodeIndex v : visited) trace.nodes.push_back({graph.id(v), graph.label(v)});
    return trace;
}

WalkRun run_walks(const RecGraph& graph, const WalkConfig& config) {
    if (config.walks == 0) throw ConfigError("walks must be >= 1");
    if (config.hops == 0) throw ConfigError("hops must be >= 1");
    const auto starts = select_start_nodes(graph, config);

    WalkRun run;
    run.traces.resize(config.walks);

    std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = std::min(threads, config.walks);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            run.traces[i] = simulate_walk(graph, starts, config, derive_seed(config.master_seed, i, 0));
        }
    };
    if (threads <= 1) {
        work(0, config.walks);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (config.walks + threads - 1) / threads;
        for (std::size_t b = 0; b < config.walks; b += chunk) pool.emplace_back(work, b, std::min(b + chunk, config.walks));
    }

    if (!config.unique_walks) return run;

    // Sequential pass keeps the accepted set independent of thread count.
    const std::size_t budget = 100 * config.walks;
    std::set<std::vector<NodeIndex>> seen;
    bool exhausted = false;
    for (std::size_t i = 0; i < config.walks; ++i) {
        auto seq = node_sequence(graph, run.traces[i]);
        std::uint64_t attempt = 0;
        while (seen.contains(seq) && !exhausted) {
            if (run.retries == budget) {
                exhausted = true;
                run.warnings.push_back("unique-walk retry budget of " + std::to_string(budget) +
                                       " exhausted at walk " + std::to_string(i) + "; admitting duplicates");
                break;
            }
            ++run.retries;
            run.traces[i] = simulate_walk(graph, starts, config, derive_seed(config.master_seed, i, ++attempt));
            seq = node_sequence(graph, run.traces[i]);
        }
        if (!seen.insert(std::move(seq)).second) ++run.duplicates_admitted;
    }
    return run;
}

// ---------------------------------------------------------------------------

ScriptedRecommender::ScriptedRecommender(std::map<std::size_t, std::vector<std::string>> steps)
    : steps_(std::move(steps)) {}

ScriptedRecommender ScriptedRecommender::parse(std::istream& in) {
    std::map<std::size_t, std::vector<std::string>> steps;
    detail::for_each_json_line(in, "recommender script", [&](const detail::json& obj, std::size_t) {
        auto step = obj.find("step");
        if (step == obj.end() || !step->is_number_unsigned()) throw ParseError("'step' must be a non-negative integer");
        auto recs = obj.find("recs");
        if (recs == obj.end() || !recs->is_array()) throw ParseError("'recs' must be an array");
        if (!steps.emplace(step->get<std::size_t>(), recs->get<std::vector<std::string>>()).second) {
            throw ParseError("step " + std::to_string(step->get<std::size_t>()) + " defined twice");
        }
    });
    return ScriptedRecommender(std::move(steps));
}

ScriptedRecommender ScriptedRecommender::load(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return parse(in);
}

void ScriptedRecommender::write(std::ostream& out) const {
    for (const auto& [step, recs] : steps_) {
        out << detail::json{{"step", step}, {"recs", recs}}.dump() << '\n';
    }
}

std::vector<std::string> ScriptedRecommender::recommend(const std::string& /*reference*/,
                                                        std::span<const std::string> history) const {
    auto it = steps_.find(history.size());
    if (it == steps_.end()) throw PlaybackError("recommender script has no step " + std::to_string(history.size()));
    return it->second;
}

SaturationResult saturation_detect(const Recommender& recommender, const std::string& reference,
                                   std::span<const std::string> watch_list, double threshold) {
    if (watch_list.empty()) throw ContractError("saturation_detect: watch list is empty");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ContractError("saturation_detect: threshold must be in (0, 1]");

    std::vector<std::string> history;
    auto fetch = [&] {
        auto recs = recommender.recommend(reference, history);
        if (recs.empty()) throw DetectorError("recommender returned no recommendations for '" + reference + "'");
        return std::set<std::string>(recs.begin(), recs.end());
    };

    SaturationResult result;
    std::set<std::string> accumulated = fetch();
    for (const auto& video : watch_list) {
        history.push_back(video);
        ++result.watched;
        auto current = fetch();
        const double coef = overlap_coefficient(current, accumulated);
        result.overlap.push_back(coef);
        if (coef >= threshold) {
            result.saturated = true;
            return result;
        }
        accumulated.insert(current.begin(), current.end());
    }
    result.watched = watch_list.size() + 1;
    return result;
}

}  // namespace recaudit
