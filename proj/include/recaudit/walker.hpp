// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/graph.hpp>
#include <recaudit/trace.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace recaudit {

enum class StartScenario { TargetStart, OtherStart, Explicit };

struct WalkConfig {
    std::size_t walks = 100;
    std::size_t hops = 5;
    StartScenario start = StartScenario::TargetStart;
    std::vector<std::string> start_nodes;  // used by StartScenario::Explicit
    Label target{"target"};                // defines target-start / other-start
    bool no_repeat = true;
    bool unique_walks = true;
    std::uint64_t master_seed = 0;
    bool include_start_in_metrics = false;
    std::size_t threads = 1;  // 0 means one per hardware thread; never changes results
};

struct WalkRun {
    std::vector<WalkTrace> traces;
    std::size_t retries = 0;              // re-draws spent enforcing unique walks
    std::size_t duplicates_admitted = 0;  // duplicates kept after the retry budget ran out
    std::vector<std::string> warnings;
};

/// Counter-based per-walk seed; identical for any execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t walk, std::uint64_t attempt) noexcept;

/// Start nodes selected by the configured scenario. Throws ConfigError when empty.
std::vector<NodeIndex> select_start_nodes(const RecGraph& graph, const WalkConfig& config);

/// Simulates one walk from a derived seed: the start node is drawn uniformly
/// from `starts`, then each hop follows a uniformly chosen out-neighbor.
WalkTrace simulate_walk(const RecGraph& graph, std::span<const NodeIndex> starts, const WalkConfig& config,
                        std::uint64_t seed);

/// Runs `config.walks` walks. With `unique_walks`, a walk whose node sequence
/// repeats an earlier one is re-drawn; the run spends at most 100 * walks
/// re-draws, after which duplicates are admitted and a warning recorded.
WalkRun run_walks(const RecGraph& graph, const WalkConfig& config);

// ---- watch-history saturation ----

class Recommender {
public:
    virtual ~Recommender() = default;
    /// Ordered top-K recommendations for `reference` given the watch history.
    virtual std::vector<std::string> recommend(const std::string& reference,
                                               std::span<const std::string> history) const = 0;
};

/// Plays back a fixed list per watch-history length (the step).
class ScriptedRecommender : public Recommender {
public:
    explicit ScriptedRecommender(std::map<std::size_t, std::vector<std::string>> steps);

    static ScriptedRecommender load(const std::filesystem::path& path);
    static ScriptedRecommender parse(std::istream& in);
    void write(std::ostream& out) const;

    std::vector<std::string> recommend(const std::string& reference,
                                       std::span<const std::string> history) const override;

    const std::map<std::size_t, std::vector<std::string>>& steps() const noexcept { return steps_; }

private:
    std::map<std::size_t, std::vector<std::string>> steps_;
};

struct SaturationResult {
    std::size_t watched = 0;  // W; watch_list.size() + 1 when never saturated
    bool saturated = false;
    std::vector<double> overlap;  // coefficient after each watched video
};

/// Watch-history saturation: after each watched video, the reference's
/// current recommendations are compared with everything it recommended
/// before; stops once their overlap coefficient reaches `threshold`.
SaturationResult saturation_detect(const Recommender& recommender, const std::string& reference,
                                   std::span<const std::string> watch_list, double threshold = 1.0);

}  // namespace recaudit
