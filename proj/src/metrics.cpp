// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/metrics.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>

namespace recaudit {

namespace {

void require_traces(std::span<const WalkTrace> traces, const char* op) {
    if (traces.empty()) throw ContractError(std::string(op) + ": no traces");
}

std::size_t resolve_hops(std::span<const WalkTrace> traces, std::size_t hops) {
    return hops == 0 ? max_hops(traces) : hops;
}

}  // namespace

std::size_t max_hops(std::span<const WalkTrace> traces) {
    std::size_t h = 0;
    for (const auto& t : traces) h = std::max(h, t.hops());
    return h;
}

std::vector<CurvePoint> encounter_curve(std::span<const WalkTrace> traces, const Label& target, std::size_t hops,
                                        bool include_start) {
    require_traces(traces, "encounter_curve");
    hops = resolve_hops(traces, hops);

    // first hop at which each walk meets a target; hops + 1 when never
    std::vector<std::size_t> hits(hops + 2, 0);
    for (const auto& t : traces) {
        std::size_t first = hops + 1;
        const std::size_t begin = include_start ? 0 : 1;
        for (std::size_t k = begin; k < t.nodes.size() && k <= hops; ++k) {
            if (t.nodes[k].label == target) {
                first = k;
                break;
            }
        }
        ++hits[first];
    }
    std::vector<CurvePoint> curve;
    std::size_t cumulative = hits[0];
    const auto n = static_cast<double>(traces.size());
    for (std::size_t k = 1; k <= hops; ++k) {
        cumulative += hits[k];
        curve.push_back({k, static_cast<double>(cumulative) / n});
    }
    return curve;
}

std::vector<UniqueFractionPoint> unique_fraction_curve(std::span<const WalkTrace> traces, const Label& target,
                                                       std::size_t hops, bool include_start) {
    require_traces(traces, "unique_fraction_curve");
    hops = resolve_hops(traces, hops);

    std::set<std::string> seen;
    std::size_t targets = 0;
    auto visit = [&](const TraceStep& s) {
        if (seen.insert(s.id).second && s.label == target) ++targets;
    };
    if (include_start) {
        for (const auto& t : traces) visit(t.nodes.front());
    }
    std::vector<UniqueFractionPoint> curve;
    for (std::size_t k = 1; k <= hops; ++k) {
        for (const auto& t : traces) {
            if (k < t.nodes.size()) visit(t.nodes[k]);
        }
        UniqueFractionPoint p{k, targets, seen.size(), std::nullopt};
        if (!seen.empty()) p.fraction = static_cast<double>(targets) / static_cast<double>(seen.size());
        curve.push_back(p);
    }
    return curve;
}

std::vector<ContinuationRow> continuation_table(std::span<const WalkTrace> traces, const Label& target,
                                                std::size_t hops) {
    require_traces(traces, "continuation_table");
    if (hops == 0) throw ContractError("continuation_table: hops must be >= 1");

    std::vector<ContinuationRow> rows;
    for (std::size_t m = 1; m <= hops; ++m) {
        ContinuationRow row{m, 0, std::nullopt, std::nullopt};
        std::size_t any = 0, next = 0;
        for (const auto& t : traces) {
            if (t.hops() < m) continue;
            bool all_target = true;
            for (std::size_t k = 1; k <= m; ++k) {
                if (t.nodes[k].label != target) {
                    all_target = false;
                    break;
                }
            }
            if (!all_target) continue;
            ++row.qualifying;
            const std::size_t last = std::min(hops, t.hops());
            for (std::size_t k = m + 1; k <= last; ++k) {
                if (t.nodes[k].label == target) {
                    ++any;
                    break;
                }
            }
            if (m + 1 <= last && t.nodes[m + 1].label == target) ++next;
        }
        if (row.qualifying > 0 && m < hops) {
            const auto q = static_cast<double>(row.qualifying);
            row.p_any = static_cast<double>(any) / q;
            row.p_next = static_cast<double>(next) / q;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<RetentionPoint> retention_series(std::span<const CommentEvent> events) {
    std::map<YearMonth, std::set<std::string>> users;
    for (const auto& e : events) users[e.month].insert(e.user);
    if (users.size() < 2) throw ContractError("retention_series: need events in at least two months");

    std::vector<RetentionPoint> out;
    const YearMonth last = users.rbegin()->first;
    const std::set<std::string> none;
    auto users_in = [&](const YearMonth& m) -> const std::set<std::string>& {
        auto it = users.find(m);
        return it == users.end() ? none : it->second;
    };
    for (YearMonth m = users.begin()->first.next(); m <= last; m = m.next()) {
        const auto& prev = users_in(m.prev());
        const auto& cur = users_in(m);
        RetentionPoint p{m, std::nullopt};
        if (!prev.empty() && !cur.empty()) p.overlap = overlap_coefficient(prev, cur);
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------

KappaResult fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
    if (counts.empty()) throw ContractError("fleiss_kappa: no items");
    const std::size_t k = counts.front().size();
    if (k < 2) throw ContractError("fleiss_kappa: need at least two categories");

    std::size_t raters = 0;
    std::vector<std::uint64_t> category_totals(k, 0);
    double sum_agreement = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto& row = counts[i];
        if (row.size() != k) throw ContractError("fleiss_kappa: ragged count matrix");
        std::size_t n = 0;
        std::uint64_t sq = 0;
        for (std::size_t j = 0; j < k; ++j) {
            n += row[j];
            sq += static_cast<std::uint64_t>(row[j]) * row[j];
            category_totals[j] += row[j];
        }
        if (i == 0) raters = n;
        if (n != raters) {
            throw ContractError("fleiss_kappa: item " + std::to_string(i) + " has " + std::to_string(n) +
                                " annotations, expected " + std::to_string(raters));
        }
        if (raters < 2) throw ContractError("fleiss_kappa: need at least two annotators per item");
        sum_agreement += static_cast<double>(sq - n) / static_cast<double>(n * (n - 1));
    }

    const std::uint64_t total = static_cast<std::uint64_t>(counts.size()) * raters;
    double expected = 0;
    for (auto t : category_totals) {
        if (t == total) throw ContractError("fleiss_kappa: all annotations fall in one category");
        const double p = static_cast<double>(t) / static_cast<double>(total);
        expected += p * p;
    }
    const double observed = sum_agreement / static_cast<double>(counts.size());
    return {(observed - expected) / (1.0 - expected), counts.size(), raters, k};
}

KappaResult fleiss_kappa(const AnnotationSet& annotations) {
    std::vector<std::vector<std::size_t>> counts;
    counts.reserve(annotations.items().size());
    for (const auto& [item, list] : annotations.items()) {
        std::vector<std::size_t> row(annotations.universe().size(), 0);
        for (const auto& a : list) ++row[annotations.category_index(a.label)];
        counts.push_back(std::move(row));
    }
    return fleiss_kappa(counts);
}

// ---------------------------------------------------------------------------

double fisher_exact(const Table2x2& t) {
    const std::uint64_t r1 = t.a + t.b, r2 = t.c + t.d, c1 = t.a + t.c, n = r1 + r2;
    if (n == 0) throw ContractError("fisher_exact: all-zero table");

    // Hypergeometric support for the top-left cell.
    const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0;
    const std::uint64_t hi = std::min(r1, c1);
    if (lo == hi) return 1.0;

    // Weights relative to the mode, built by the ratio recurrence
    // P(x+1)/P(x) = (r1-x)(c1-x) / ((x+1)(r2-c1+x+1)).
    auto ratio = [&](std::uint64_t x) {
        return static_cast<long double>(r1 - x) * static_cast<long double>(c1 - x) /
               (static_cast<long double>(x + 1) * static_cast<long double>(r2 + x + 1 - c1));
    };
    const auto mode = static_cast<std::uint64_t>(
        std::floor(static_cast<long double>(r1 + 1) * static_cast<long double>(c1 + 1) / static_cast<long double>(n + 2)));
    const std::uint64_t m = std::clamp(mode, lo, hi);
    std::vector<long double> w(hi - lo + 1, 0.0L);
    w[m - lo] = 1.0L;
    for (std::uint64_t x = m; x < hi; ++x) w[x + 1 - lo] = w[x - lo] * ratio(x);
    for (std::uint64_t x = m; x > lo; --x) w[x - 1 - lo] = w[x - lo] / ratio(x - 1);

    // Same relative tolerance as R's fisher.test for ties.
    const long double cutoff = w[t.a - lo] * (1.0L + 1e-7L);
    long double total = 0, tail = 0;
    // Sum smallest first to limit rounding.
    std::vector<long double> sorted(w);
    std::sort(sorted.begin(), sorted.end());
    for (long double v : sorted) {
        total += v;
        if (v <= cutoff) tail += v;
    }
    return static_cast<double>(std::min(1.0L, tail / total));
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-transformed form converges fast for small lambda.
        const double pi = std::numbers::pi;
        double s = 0;
        for (int k = 1; k <= 50; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi * pi / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ContractError("ks_two_sample: empty sample");
    std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const auto n = static_cast<double>(xs.size());
    const auto m = static_cast<double>(ys.size());

    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        const double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] == v) ++i;
        while (j < ys.size() && ys[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double en = n * m / (n + m);
    return {d, kolmogorov_survival(std::sqrt(en) * d)};
}

}  // namespace recaudit
