// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/graph.hpp>
#include <recaudit/lexicon.hpp>
#include <recaudit/metrics.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace recaudit {

// All CSV output is ',' separated, '.' decimal, LF terminated, with "NA" for
// undefined values. Doubles use the shortest text that parses back exactly.

inline constexpr std::string_view kNA = "NA";

std::string format_number(double value);
std::string format_number(const std::optional<double>& value);
double parse_number(std::string_view text);
std::optional<double> parse_optional_number(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Lines starting with '#' are skipped. Fields are never quoted.
CsvTable read_csv(std::istream& in);
CsvTable load_csv(const std::filesystem::path& path);

void write_encounter_csv(std::ostream& out, std::span<const CurvePoint> curve);
void write_unique_fraction_csv(std::ostream& out, std::span<const UniqueFractionPoint> curve);
void write_continuation_csv(std::ostream& out, std::span<const ContinuationRow> rows);
void write_rec_cdf_csv(std::ostream& out, const RecComposition& composition);
void write_rec_composition_csv(std::ostream& out, const RecGraph& graph, const RecComposition& composition);
void write_retention_csv(std::ostream& out, std::span<const RetentionPoint> series);
void write_temporal_csv(std::ostream& out, std::span<const MonthValue> series);
void write_agreement_csv(std::ostream& out, const KappaResult& kappa);
void write_fisher_csv(std::ostream& out, const Table2x2& table, double p_value);
void write_ks_csv(std::ostream& out, std::size_t n_x, std::size_t n_y, const KsResult& ks);
void write_tuning_csv(std::ostream& out, const TuningResult& result);

/// Transition cells with their share of all edges and of the source row.
/// With a binary label set and `target` given, rows follow the order
/// target->target, target->other, other->other, other->target.
void write_transitions_csv(std::ostream& out, const TransitionCounts& counts,
                           const std::optional<Label>& target = std::nullopt);

std::vector<CurvePoint> read_encounter_csv(const CsvTable& table);
std::vector<ContinuationRow> read_continuation_csv(const CsvTable& table);
TransitionCounts read_transitions_csv(const CsvTable& table);
std::vector<UniqueFractionPoint> read_unique_fraction_csv(const CsvTable& table);
std::map<Label, std::vector<CdfPoint>> read_rec_cdf_csv(const CsvTable& table);
std::vector<RetentionPoint> read_retention_csv(const CsvTable& table);
std::vector<MonthValue> read_temporal_csv(const CsvTable& table);
KappaResult read_agreement_csv(const CsvTable& table);

struct CompositionRow {
    std::string id;
    Label label;
    std::size_t out_degree = 0;
    double fraction = 0;
};

std::vector<CompositionRow> read_rec_composition_csv(const CsvTable& table);

/// Converts a metric CSV into an x,y series file for plotting. The kind of
/// metric is recognized from its header. Throws EmissionError otherwise.
void emit_plot_data(const CsvTable& metric, std::ostream& out);
void emit_plot_data(const std::filesystem::path& metric_csv, const std::filesystem::path& series_out);

}  // namespace recaudit
