// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/csv.hpp>
#include <recaudit/error.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace recaudit {

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw ContractError("format_number: conversion failed");
    return std::string(buf, end);
}

std::string format_number(const std::optional<double>& value) {
    return value ? format_number(*value) : std::string(kNA);
}

double parse_number(std::string_view text) {
    double v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ParseError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::optional<double> parse_optional_number(std::string_view text) {
    if (text == kNA) return std::nullopt;
    return parse_number(text);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::size_t parse_count(std::string_view text) {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ParseError("not a count: '" + std::string(text) + "'");
    }
    return v;
}

void expect_header(const CsvTable& t, std::initializer_list<std::string_view> cols) {
    if (!std::equal(t.header.begin(), t.header.end(), cols.begin(), cols.end())) {
        throw ParseError("unexpected CSV header");
    }
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (!have_header) throw ParseError("CSV has no header");
    return t;
}

CsvTable load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open CSV file: " + path.string());
    return read_csv(in);
}

// ---------------------------------------------------------------------------

void write_encounter_csv(std::ostream& out, std::span<const CurvePoint> curve) {
    out << "hop,fraction\n";
    for (const auto& p : curve) out << p.hop << ',' << format_number(p.value) << '\n';
}

void write_unique_fraction_csv(std::ostream& out, std::span<const UniqueFractionPoint> curve) {
    out << "hop,target_nodes,distinct_nodes,fraction\n";
    for (const auto& p : curve) {
        out << p.hop << ',' << p.target_nodes << ',' << p.distinct_nodes << ',' << format_number(p.fraction) << '\n';
    }
}

void write_continuation_csv(std::ostream& out, std::span<const ContinuationRow> rows) {
    out << "m,qualifying,p_any,p_next\n";
    for (const auto& r : rows) {
        out << r.m << ',' << r.qualifying << ',' << format_number(r.p_any) << ',' << format_number(r.p_next) << '\n';
    }
}

void write_rec_cdf_csv(std::ostream& out, const RecComposition& composition) {
    out << "group,fraction,cumulative\n";
    for (const auto& [label, points] : composition.by_group) {
        for (const auto& p : points) {
            out << label.name << ',' << format_number(p.value) << ',' << format_number(p.cumulative) << '\n';
        }
    }
}

void write_rec_composition_csv(std::ostream& out, const RecGraph& graph, const RecComposition& composition) {
    out << "id,label,out_degree,fraction\n";
    for (const auto& nc : composition.per_node) {
        out << graph.id(nc.node) << ',' << graph.label(nc.node).name << ',' << graph.out(nc.node).size() << ','
            << format_number(nc.fraction) << '\n';
    }
}

void write_retention_csv(std::ostream& out, std::span<const RetentionPoint> series) {
    out << "month,overlap\n";
    for (const auto& p : series) out << p.month.to_string() << ',' << format_number(p.overlap) << '\n';
}

void write_temporal_csv(std::ostream& out, std::span<const MonthValue> series) {
    out << "month,value\n";
    for (const auto& p : series) out << p.month.to_string() << ',' << format_number(p.value) << '\n';
}

void write_agreement_csv(std::ostream& out, const KappaResult& k) {
    out << "n_items,n_annotators,n_categories,kappa\n";
    out << k.n_items << ',' << k.n_annotators << ',' << k.n_categories << ',' << format_number(k.kappa) << '\n';
}

void write_fisher_csv(std::ostream& out, const Table2x2& t, double p_value) {
    out << "a,b,c,d,p_value\n";
    out << t.a << ',' << t.b << ',' << t.c << ',' << t.d << ',' << format_number(p_value) << '\n';
}

void write_ks_csv(std::ostream& out, std::size_t n_x, std::size_t n_y, const KsResult& ks) {
    out << "n_x,n_y,statistic,p_value\n";
    out << n_x << ',' << n_y << ',' << format_number(ks.statistic) << ',' << format_number(ks.p_value) << '\n';
}

void write_tuning_csv(std::ostream& out, const TuningResult& result) {
    auto row = [&](const RuleEvaluation& e) {
        out << e.rule.min_transcript << ',' << e.rule.min_comments << ',' << format_number(e.score.accuracy) << ','
            << format_number(e.score.precision) << ',' << format_number(e.score.recall) << ','
            << format_number(e.score.f1) << '\n';
    };
    out << "min_transcript,min_comments,accuracy,precision,recall,f1\n";
    for (const auto& e : result.cells) row(e);
    out << "selected,";
    row(result.selected);
}

void write_transitions_csv(std::ostream& out, const TransitionCounts& counts, const std::optional<Label>& target) {
    std::vector<std::pair<Label, Label>> order;
    std::vector<Label> labels;
    for (const auto& [key, n] : counts.cells) {
        if (std::find(labels.begin(), labels.end(), key.first) == labels.end()) labels.push_back(key.first);
    }
    if (target && labels.size() == 2 && std::find(labels.begin(), labels.end(), *target) != labels.end()) {
        const Label& t = *target;
        const Label& o = labels[0] == t ? labels[1] : labels[0];
        order = {{t, t}, {t, o}, {o, o}, {o, t}};
    } else {
        for (const auto& [key, n] : counts.cells) order.push_back(key);
    }

    const auto total = static_cast<double>(counts.total());
    out << "source,destination,count,percent,row_percent\n";
    for (const auto& [src, dst] : order) {
        const auto n = counts.at(src, dst);
        const auto row = static_cast<double>(counts.row_total(src));
        std::optional<double> pct, row_pct;
        if (total > 0) pct = 100.0 * static_cast<double>(n) / total;
        if (row > 0) row_pct = 100.0 * static_cast<double>(n) / row;
        out << src.name << ',' << dst.name << ',' << n << ',' << format_number(pct) << ',' << format_number(row_pct)
            << '\n';
    }
}

std::vector<CurvePoint> read_encounter_csv(const CsvTable& table) {
    expect_header(table, {"hop", "fraction"});
    std::vector<CurvePoint> out;
    for (const auto& r : table.rows) {
        if (r.size() != 2) throw ParseError("encounter CSV: expected 2 fields");
        out.push_back({parse_count(r[0]), parse_number(r[1])});
    }
    return out;
}

std::vector<ContinuationRow> read_continuation_csv(const CsvTable& table) {
    expect_header(table, {"m", "qualifying", "p_any", "p_next"});
    std::vector<ContinuationRow> out;
    for (const auto& r : table.rows) {
        if (r.size() != 4) throw ParseError("continuation CSV: expected 4 fields");
        out.push_back({parse_count(r[0]), parse_count(r[1]), parse_optional_number(r[2]), parse_optional_number(r[3])});
    }
    return out;
}

TransitionCounts read_transitions_csv(const CsvTable& table) {
    expect_header(table, {"source", "destination", "count", "percent", "row_percent"});
    TransitionCounts tc;
    for (const auto& r : table.rows) {
        if (r.size() != 5) throw ParseError("transitions CSV: expected 5 fields");
        tc.cells[{Label(r[0]), Label(r[1])}] = parse_count(r[2]);
    }
    return tc;
}

std::vector<UniqueFractionPoint> read_unique_fraction_csv(const CsvTable& table) {
    expect_header(table, {"hop", "target_nodes", "distinct_nodes", "fraction"});
    std::vector<UniqueFractionPoint> out;
    for (const auto& r : table.rows) {
        if (r.size() != 4) throw ParseError("unique-fraction CSV: expected 4 fields");
        out.push_back({parse_count(r[0]), parse_count(r[1]), parse_count(r[2]), parse_optional_number(r[3])});
    }
    return out;
}

std::map<Label, std::vector<CdfPoint>> read_rec_cdf_csv(const CsvTable& table) {
    expect_header(table, {"group", "fraction", "cumulative"});
    std::map<Label, std::vector<CdfPoint>> out;
    for (const auto& r : table.rows) {
        if (r.size() != 3) throw ParseError("rec-cdf CSV: expected 3 fields");
        out[Label(r[0])].push_back({parse_number(r[1]), parse_number(r[2])});
    }
    return out;
}

std::vector<CompositionRow> read_rec_composition_csv(const CsvTable& table) {
    expect_header(table, {"id", "label", "out_degree", "fraction"});
    std::vector<CompositionRow> out;
    for (const auto& r : table.rows) {
        if (r.size() != 4) throw ParseError("rec-composition CSV: expected 4 fields");
        out.push_back({r[0], Label(r[1]), parse_count(r[2]), parse_number(r[3])});
    }
    return out;
}

std::vector<RetentionPoint> read_retention_csv(const CsvTable& table) {
    expect_header(table, {"month", "overlap"});
    std::vector<RetentionPoint> out;
    for (const auto& r : table.rows) {
        if (r.size() != 2) throw ParseError("retention CSV: expected 2 fields");
        out.push_back({YearMonth::parse(r[0]), parse_optional_number(r[1])});
    }
    return out;
}

std::vector<MonthValue> read_temporal_csv(const CsvTable& table) {
    expect_header(table, {"month", "value"});
    std::vector<MonthValue> out;
    for (const auto& r : table.rows) {
        if (r.size() != 2) throw ParseError("temporal CSV: expected 2 fields");
        out.push_back({YearMonth::parse(r[0]), parse_number(r[1])});
    }
    return out;
}

KappaResult read_agreement_csv(const CsvTable& table) {
    expect_header(table, {"n_items", "n_annotators", "n_categories", "kappa"});
    if (table.rows.size() != 1 || table.rows[0].size() != 4) throw ParseError("agreement CSV: expected one 4-field row");
    const auto& r = table.rows[0];
    return {parse_number(r[3]), parse_count(r[0]), parse_count(r[1]), parse_count(r[2])};
}

// ---------------------------------------------------------------------------

namespace {

struct PlotSpec {
    std::vector<std::string_view> header;
    std::string_view comment;
    int series_col;  // -1 for a single series
    int x_col;
    std::vector<int> y_cols;
};

const std::vector<PlotSpec>& plot_specs() {
    static const std::vector<PlotSpec> specs = {
        {{"hop", "fraction"}, "encounter curve: x = hop, y = fraction of walks with a target video by hop x", -1, 0, {1}},
        {{"hop", "target_nodes", "distinct_nodes", "fraction"},
         "unique-fraction curve: x = hop, y = target share of distinct videos visited by hop x", -1, 0, {3}},
        {{"m", "qualifying", "p_any", "p_next"},
         "continuation: series = p_any | p_next, x = consecutive target hops M, y = probability", -1, 0, {2, 3}},
        {{"group", "fraction", "cumulative"},
         "recommendation composition CDF: series = source label, x = target share of recommendations, y = cumulative",
         0, 1, {2}},
        {{"month", "overlap"}, "retention: x = month, y = overlap coefficient with the previous month", -1, 0, {1}},
        {{"month", "value"}, "temporal counts: x = month, y = value", -1, 0, {1}},
    };
    return specs;
}

}  // namespace

void emit_plot_data(const CsvTable& metric, std::ostream& out) {
    const PlotSpec* spec = nullptr;
    for (const auto& s : plot_specs()) {
        if (std::equal(metric.header.begin(), metric.header.end(), s.header.begin(), s.header.end())) spec = &s;
    }
    if (!spec) throw EmissionError("unrecognized metric CSV header");

    const bool multi = spec->series_col >= 0 || spec->y_cols.size() > 1;
    std::ostringstream body;
    for (const auto& row : metric.rows) {
        if (row.size() != spec->header.size()) throw EmissionError("metric CSV row has the wrong number of fields");
        for (int y : spec->y_cols) {
            try {
                parse_optional_number(row[static_cast<std::size_t>(y)]);
            } catch (const ParseError& e) {
                throw EmissionError(std::string("metric CSV value: ") + e.what());
            }
            if (multi) {
                body << (spec->series_col >= 0 ? row[static_cast<std::size_t>(spec->series_col)]
                                               : metric.header[static_cast<std::size_t>(y)])
                     << ',';
            }
            body << row[static_cast<std::size_t>(spec->x_col)] << ',' << row[static_cast<std::size_t>(y)] << '\n';
        }
    }
    out << "# " << spec->comment << '\n' << (multi ? "series,x,y\n" : "x,y\n") << body.str();
}

void emit_plot_data(const std::filesystem::path& metric_csv, const std::filesystem::path& series_out) {
    CsvTable table;
    try {
        table = load_csv(metric_csv);
    } catch (const ParseError& e) {
        throw EmissionError(metric_csv.string() + ": " + e.what());
    }
    std::ostringstream buf;
    emit_plot_data(table, buf);
    std::ofstream out(series_out, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + series_out.string());
    out << buf.str();
}

}  // namespace recaudit
