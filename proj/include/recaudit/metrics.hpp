// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/corpus.hpp>
#include <recaudit/error.hpp>
#include <recaudit/trace.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace recaudit {

// ---- walk metrics ----
//
// Hop k of a trace is position k; the start video (position 0) only counts
// when `include_start` is set. A truncated walk contributes its observed
// prefix and stays in every denominator.

struct CurvePoint {
    std::size_t hop = 0;
    double value = 0;

    bool operator==(const CurvePoint&) const = default;
};

/// Largest hop count over the traces.
std::size_t max_hops(std::span<const WalkTrace> traces);

/// Fraction of walks that have met at least one target video by hop k, for
/// k = 1..hops. `hops == 0` means max_hops(traces).
std::vector<CurvePoint> encounter_curve(std::span<const WalkTrace> traces, const Label& target,
                                        std::size_t hops = 0, bool include_start = false);

struct UniqueFractionPoint {
    std::size_t hop = 0;
    std::size_t target_nodes = 0;
    std::size_t distinct_nodes = 0;
    std::optional<double> fraction;  // undefined when no node was visited
};

/// Share of target videos among the distinct videos visited by any walk up to hop k.
std::vector<UniqueFractionPoint> unique_fraction_curve(std::span<const WalkTrace> traces, const Label& target,
                                                       std::size_t hops = 0, bool include_start = false);

struct ContinuationRow {
    std::size_t m = 0;
    std::size_t qualifying = 0;       // walks whose hops 1..m are all target
    std::optional<double> p_any;      // >= 1 target in hops m+1..hops
    std::optional<double> p_next;     // target at hop m+1
};

/// Conditional continuation for M = 1..hops. Rows with no qualifying walks,
/// or with no hop left after M, are undefined rather than zero.
std::vector<ContinuationRow> continuation_table(std::span<const WalkTrace> traces, const Label& target,
                                                std::size_t hops);

// ---- set similarity ----

/// |a ∩ b| / min(|a|, |b|). Works with any associative container.
template <typename Set>
double overlap_coefficient(const Set& a, const Set& b) {
    if (a.empty() || b.empty()) throw ContractError("overlap_coefficient: empty set");
    const Set& small = a.size() <= b.size() ? a : b;
    const Set& large = a.size() <= b.size() ? b : a;
    const auto common = std::count_if(small.begin(), small.end(), [&](const auto& x) { return large.contains(x); });
    return static_cast<double>(common) / static_cast<double>(small.size());
}

struct RetentionPoint {
    YearMonth month;
    std::optional<double> overlap;  // undefined when either month has no users
};

/// Overlap of each month's commenting users with the previous month's.
std::vector<RetentionPoint> retention_series(std::span<const CommentEvent> events);

// ---- agreement ----

struct KappaResult {
    double kappa = 0;
    std::size_t n_items = 0;
    std::size_t n_annotators = 0;
    std::size_t n_categories = 0;
};

KappaResult fleiss_kappa(const AnnotationSet& annotations);

/// Fleiss kappa from an item x category count matrix. Every row must sum to
/// the same number of raters (>= 2).
KappaResult fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

// ---- significance tests ----

struct Table2x2 {
    std::uint64_t a = 0, b = 0;  // first row
    std::uint64_t c = 0, d = 0;  // second row
};

/// Two-sided Fisher exact test: sums the probabilities of all tables with
/// the observed margins that are no more likely than the observed one.
double fisher_exact(const Table2x2& table);

struct KsResult {
    double statistic = 0;
    double p_value = 1;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

}  // namespace recaudit
