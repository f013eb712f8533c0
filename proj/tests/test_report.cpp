// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/csv.hpp>
#include <recaudit/error.hpp>
#include <recaudit/pipeline.hpp>

#include "cli_util.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace recaudit;
using namespace recaudit::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kDemo = fs::path(RECAUDIT_FIXTURES) / "demo";
const Label T("target");

CsvTable table_of(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

template <typename Writer>
std::string render(Writer&& w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

AuditConfig demo_config(const fs::path& out) {
    auto cfg = load_config(kDemo / "config.json");
    cfg.out = out;
    return cfg;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("number formatting is shortest round-trip and locale free") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        CHECK(parse_number(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(std::optional<double>{}) == "NA");
    CHECK_FALSE(parse_optional_number("NA").has_value());
    CHECK_THROWS_AS(parse_number("1,5"), ParseError);
    CHECK_THROWS_AS(parse_number("abc"), ParseError);
}

TEST_CASE("metric CSVs round-trip through their readers") {
    SUBCASE("encounter") {
        const std::vector<CurvePoint> c = {{1, 0.1}, {2, 1.0 / 3.0}, {3, 0.75}};
        const auto text = render([&](std::ostream& os) { write_encounter_csv(os, c); });
        const auto back = read_encounter_csv(table_of(text));
        CHECK(back == c);
        CHECK(render([&](std::ostream& os) { write_encounter_csv(os, back); }) == text);
    }
    SUBCASE("continuation with an undefined row") {
        const std::vector<ContinuationRow> rows = {{1, 3, 2.0 / 3.0, 1.0 / 3.0}, {2, 0, std::nullopt, std::nullopt}};
        const auto text = render([&](std::ostream& os) { write_continuation_csv(os, rows); });
        CHECK(text.find("2,0,NA,NA\n") != std::string::npos);
        const auto back = read_continuation_csv(table_of(text));
        REQUIRE(back.size() == 2);
        CHECK(*back[0].p_any == 2.0 / 3.0);
        CHECK_FALSE(back[1].p_next.has_value());
        CHECK(render([&](std::ostream& os) { write_continuation_csv(os, back); }) == text);
    }
    SUBCASE("unique fraction") {
        const std::vector<UniqueFractionPoint> c = {{1, 0, 0, std::nullopt}, {2, 1, 3, 1.0 / 3.0}};
        const auto text = render([&](std::ostream& os) { write_unique_fraction_csv(os, c); });
        const auto back = read_unique_fraction_csv(table_of(text));
        CHECK(render([&](std::ostream& os) { write_unique_fraction_csv(os, back); }) == text);
    }
    SUBCASE("retention and temporal") {
        const std::vector<RetentionPoint> r = {{YearMonth::parse("2020-02"), 0.5},
                                               {YearMonth::parse("2020-03"), std::nullopt}};
        const auto rt = render([&](std::ostream& os) { write_retention_csv(os, r); });
        CHECK(render([&](std::ostream& os) { write_retention_csv(os, read_retention_csv(table_of(rt))); }) == rt);
        const std::vector<MonthValue> m = {{YearMonth::parse("2019-12"), 3}, {YearMonth::parse("2020-01"), 0.25}};
        const auto mt = render([&](std::ostream& os) { write_temporal_csv(os, m); });
        CHECK(read_temporal_csv(table_of(mt)) == m);
    }
    SUBCASE("agreement") {
        const KappaResult k{5.0 / 47.0, 4, 3, 3};
        const auto text = render([&](std::ostream& os) { write_agreement_csv(os, k); });
        const auto back = read_agreement_csv(table_of(text));
        CHECK(back.kappa == k.kappa);
        CHECK(back.n_items == 4);
    }
    SUBCASE("transitions") {
        const auto g = make_graph({{"a", "target"}, {"b", "other"}}, {{"a", {"a", "b"}}, {"b", {"a"}}});
        const auto tc = transition_counts(g);
        const auto text = render([&](std::ostream& os) { write_transitions_csv(os, tc, T); });
        CHECK(text.substr(0, text.find('\n', text.find('\n') + 1)) ==
              "source,destination,count,percent,row_percent\ntarget,target,1,33.333333333333336,50");
        const auto back = read_transitions_csv(table_of(text));
        CHECK(back.cells == tc.cells);
        CHECK(render([&](std::ostream& os) { write_transitions_csv(os, back, T); }) == text);
    }
    SUBCASE("malformed input") {
        CHECK_THROWS_AS(read_encounter_csv(table_of("hop,value\n1,0.5\n")), ParseError);
        CHECK_THROWS_AS(read_encounter_csv(table_of("hop,fraction\n1\n")), ParseError);
        CHECK_THROWS_AS(read_encounter_csv(table_of("hop,fraction\nx,0.5\n")), ParseError);
    }
}

TEST_CASE("emit_plot_data") {
    SUBCASE("encounter curve gives a monotone series") {
        std::ostringstream os;
        emit_plot_data(table_of("hop,fraction\n1,0.25\n2,0.5\n3,0.75\n4,0.75\n"), os);
        const auto text = os.str();
        CHECK(text.rfind("# ", 0) == 0);
        const auto series = table_of(text);
        CHECK(series.header == std::vector<std::string>{"x", "y"});
        REQUIRE(series.rows.size() == 4);
        for (std::size_t i = 1; i < series.rows.size(); ++i) {
            CHECK(parse_number(series.rows[i][1]) >= parse_number(series.rows[i - 1][1]));
        }
    }
    SUBCASE("rec-cdf gives sorted non-decreasing series") {
        std::ostringstream os;
        emit_plot_data(table_of("group,fraction,cumulative\nother,0,0.5\nother,0.5,1\ntarget,1,1\n"), os);
        const auto series = table_of(os.str());
        CHECK(series.header == std::vector<std::string>{"series", "x", "y"});
        REQUIRE(series.rows.size() == 3);
        CHECK(series.rows[0] == std::vector<std::string>{"other", "0", "0.5"});
        CHECK(series.rows[1] == std::vector<std::string>{"other", "0.5", "1"});
    }
    SUBCASE("undefined continuation rows keep NA") {
        std::ostringstream os;
        emit_plot_data(table_of("m,qualifying,p_any,p_next\n1,3,0.5,0.25\n2,0,NA,NA\n"), os);
        const auto text = os.str();
        CHECK(text.find("p_any,2,NA\n") != std::string::npos);
        CHECK(text.find("p_next,2,NA\n") != std::string::npos);
    }
    SUBCASE("malformed metric CSV") {
        std::ostringstream os;
        CHECK_THROWS_AS(emit_plot_data(table_of("foo,bar\n1,2\n"), os), EmissionError);
        CHECK_THROWS_AS(emit_plot_data(table_of("hop,fraction\n1\n"), os), EmissionError);
        CHECK_THROWS_AS(emit_plot_data(table_of("hop,fraction\n1,abc\n"), os), EmissionError);
        TempDir tmp("recaudit-plot");
        const auto bad = tmp.write("bad.csv", "hop,fraction\n1,0.5,9\n");
        CHECK_THROWS_AS(emit_plot_data(bad, tmp.path() / "out.csv"), EmissionError);
    }
}

TEST_CASE("config file handling") {
    TempDir tmp("recaudit-config");
    SUBCASE("defaults fill unspecified keys and paths resolve against the file") {
        const auto p = tmp.write("c.json", R"({"videos": "v.jsonl", "walk": {"hops": 7}})");
        const auto cfg = load_config(p);
        CHECK(cfg.videos == tmp.path() / "v.jsonl");
        CHECK(cfg.walk.hops == 7);
        CHECK(cfg.walk.walks == WalkConfig{}.walks);
        CHECK(cfg.rule.min_transcript == 1);
        CHECK(cfg.rule.min_comments == 3);
    }
    SUBCASE("unknown keys and bad values are configuration errors") {
        CHECK_THROWS_AS(load_config(tmp.write("a.json", R"({"vidoes": "x"})")), ConfigError);
        CHECK_THROWS_AS(load_config(tmp.write("b.json", R"({"walk": {"hop": 3}})")), ConfigError);
        CHECK_THROWS_AS(load_config(tmp.write("c.json", R"({"walk": {"hops": 0}})")), ConfigError);
        CHECK_THROWS_AS(load_config(tmp.write("d.json", R"({"walk": {"start": "sideways"}})")), ConfigError);
        CHECK_THROWS_AS(load_config(tmp.write("e.json", "{not json")), ConfigError);
        CHECK_THROWS_AS(load_config(tmp.path() / "missing.json"), ConfigError);
    }
    SUBCASE("command-line flags override the file") {
        const auto p = tmp.write("w.json", nlohmann::json{{"videos", (kDemo / "videos.jsonl").string()},
                                                          {"edges", (kDemo / "edges.jsonl").string()},
                                                          {"lexicon", (kDemo / "lexicon.txt").string()},
                                                          {"walk", {{"walks", 3}, {"hops", 2}, {"seed", 5}}}}
                                                .dump());
        const auto file_only = tmp.path() / "file.jsonl";
        auto r = run_cli("--config " + quoted(p) + " --out " + quoted(file_only) + " walk", tmp.path());
        REQUIRE(r.status == 0);
        auto traces = load_traces(file_only);
        CHECK(traces.size() == 3);
        for (const auto& t : traces) CHECK(t.nodes.size() <= 3);

        const auto flagged = tmp.path() / "flag.jsonl";
        r = run_cli("--config " + quoted(p) + " --out " + quoted(flagged) + " walk --walks 4 --hops 1", tmp.path());
        REQUIRE(r.status == 0);
        traces = load_traces(flagged);
        CHECK(traces.size() == 4);
        for (const auto& t : traces) CHECK(t.nodes.size() <= 2);

        const auto reseeded = tmp.path() / "seed.jsonl";
        r = run_cli("--config " + quoted(p) + " --seed 6 --out " + quoted(reseeded) + " walk", tmp.path());
        REQUIRE(r.status == 0);
        CHECK(slurp(reseeded) != slurp(file_only));
    }
}

TEST_CASE("CLI exit codes") {
    TempDir tmp("recaudit-exit");
    auto r = run_cli("label --videos " + quoted(kDemo / "videos.jsonl") + " --lexicon /nonexistent/lexicon.txt",
                     tmp.path());
    CHECK(r.status == 2);
    CHECK(r.output.find("/nonexistent/lexicon.txt") != std::string::npos);

    const auto bad = tmp.write("bad.jsonl", "{\"id\": \"x\"}\n");
    r = run_cli("ingest " + quoted(bad), tmp.path());
    CHECK(r.status == 3);

    r = run_cli("metrics fisher --table 0,0,0,0", tmp.path());
    CHECK(r.status == 4);

    r = run_cli("walk --bogus-flag", tmp.path());
    CHECK(r.status == 2);

    const auto xs = tmp.write("x.txt", "1\n2\n3\n4\n");
    const auto ys = tmp.write("y.txt", "2\n3\n4\n5\n");
    r = run_cli("metrics ks --x " + quoted(xs) + " --y " + quoted(ys), tmp.path());
    CHECK(r.status == 0);
    CHECK(r.output.find("4,4,0.25,") != std::string::npos);
}

TEST_CASE("pipeline on the demo fixture") {
    TempDir a("recaudit-run-a"), b("recaudit-run-b"), c("recaudit-run-c");
    const auto ra = run_pipeline(demo_config(a.path()));
    const auto rb = run_pipeline(demo_config(b.path()));
    const auto sa = snapshot(ra.report_dir);
    const auto sb = snapshot(rb.report_dir);
    CHECK(sa == sb);
    CHECK_FALSE(fs::exists(a.path() / "report.partial"));

    for (const char* f : {"labels.csv", "transitions.csv", "rec_composition.csv", "rec_cdf.csv",
                          "traces_target_start.jsonl", "traces_other_start.jsonl", "encounter_target_start.csv",
                          "unique_fraction_target_start.csv", "continuation_target_start.csv", "agreement.csv",
                          "retention.csv", "temporal.csv", "manifest.json", "plots/encounter_target_start.series.csv"}) {
        CHECK_MESSAGE(sa.contains(f), f);
    }

    SUBCASE("every CSV reads back and re-renders to the same bytes") {
        const auto dir = ra.report_dir;
        auto same = [&](const std::string& name, auto&& rewrite) {
            CHECK_MESSAGE(render(rewrite) == sa.at(name), name);
        };
        for (const std::string tag : {"target_start", "other_start"}) {
            same("encounter_" + tag + ".csv", [&](std::ostream& os) {
                write_encounter_csv(os, read_encounter_csv(load_csv(dir / ("encounter_" + tag + ".csv"))));
            });
            same("unique_fraction_" + tag + ".csv", [&](std::ostream& os) {
                write_unique_fraction_csv(
                    os, read_unique_fraction_csv(load_csv(dir / ("unique_fraction_" + tag + ".csv"))));
            });
            same("traces_" + tag + ".jsonl", [&](std::ostream& os) {
                write_traces(os, load_traces(dir / ("traces_" + tag + ".jsonl")));
            });
        }
        same("continuation_target_start.csv", [&](std::ostream& os) {
            write_continuation_csv(os, read_continuation_csv(load_csv(dir / "continuation_target_start.csv")));
        });
        same("transitions.csv", [&](std::ostream& os) {
            write_transitions_csv(os, read_transitions_csv(load_csv(dir / "transitions.csv")), T);
        });
        same("rec_cdf.csv", [&](std::ostream& os) {
            RecComposition rc;
            rc.by_group = read_rec_cdf_csv(load_csv(dir / "rec_cdf.csv"));
            write_rec_cdf_csv(os, rc);
        });
        same("retention.csv",
             [&](std::ostream& os) { write_retention_csv(os, read_retention_csv(load_csv(dir / "retention.csv"))); });
        same("temporal.csv",
             [&](std::ostream& os) { write_temporal_csv(os, read_temporal_csv(load_csv(dir / "temporal.csv"))); });
        same("agreement.csv",
             [&](std::ostream& os) { write_agreement_csv(os, read_agreement_csv(load_csv(dir / "agreement.csv"))); });

        const auto rows = read_rec_composition_csv(load_csv(dir / "rec_composition.csv"));
        std::string rebuilt = "id,label,out_degree,fraction\n";
        for (const auto& r : rows) {
            rebuilt += r.id + "," + r.label.name + "," + std::to_string(r.out_degree) + "," + format_number(r.fraction) +
                       "\n";
        }
        CHECK(rebuilt == sa.at("rec_composition.csv"));

        const auto labels = read_labels_csv(dir / "labels.csv");
        CHECK(labels.size() == 12);
        CHECK(labels.at("v01") == T);
    }

    SUBCASE("manifest records config, seed and digests") {
        const auto m = nlohmann::json::parse(sa.at("manifest.json"));
        CHECK(m.at("master_seed") == 20240101);
        CHECK(m.at("inputs").at("videos").at("sha256") == sha256_hex(kDemo / "videos.jsonl"));
        CHECK(m.at("outputs").at("labels.csv") == sha256_hex(ra.report_dir / "labels.csv"));
        CHECK(m.at("config").at("walk").at("hops") == 5);
    }

    SUBCASE("changing the seed changes traces only") {
        auto cfg = demo_config(c.path());
        cfg.walk.master_seed = 99;
        const auto sc = snapshot(run_pipeline(cfg).report_dir);
        CHECK(sc.at("traces_target_start.jsonl") != sa.at("traces_target_start.jsonl"));
        CHECK(sc.at("labels.csv") == sa.at("labels.csv"));
        const auto ma = nlohmann::json::parse(sa.at("manifest.json"));
        const auto mc = nlohmann::json::parse(sc.at("manifest.json"));
        CHECK(ma.at("inputs") == mc.at("inputs"));
    }
}

TEST_CASE("pipeline failures leave nothing behind") {
    TempDir tmp("recaudit-fail");
    SUBCASE("missing lexicon names the path") {
        auto cfg = demo_config(tmp.path() / "out");
        cfg.lexicon = tmp.path() / "nope.txt";
        try {
            run_pipeline(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
        }
        CHECK_FALSE(fs::exists(tmp.path() / "out" / "report"));
    }
    SUBCASE("a failing stage is named and no bundle is written") {
        auto cfg = demo_config(tmp.path() / "out");
        cfg.edges = tmp.write("edges.jsonl", "{\"source\": \"v01\", \"recs\": [\"v99\"]}\n");
        try {
            run_pipeline(cfg);
            FAIL("expected BuildError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Data);
            CHECK(std::string(e.what()).find("stage 'build'") != std::string::npos);
        }
        CHECK_FALSE(fs::exists(tmp.path() / "out" / "report"));
        CHECK_FALSE(fs::exists(tmp.path() / "out" / "report.partial"));
    }
    SUBCASE("an unwritable output location is a configuration error") {
        const auto blocker = tmp.write("blocker", "x");
        auto cfg = demo_config(blocker / "out");
        CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
    }
    SUBCASE("CLI reports the stage and exits with the data code") {
        const auto edges = tmp.write("edges.jsonl", "{\"source\": \"v01\", \"recs\": [\"v99\"]}\n");
        auto doc = nlohmann::json::parse(slurp(kDemo / "config.json"));
        for (const char* k : {"videos", "lexicon", "annotations", "comment_events"}) {
            doc[k] = (kDemo / doc[k].get<std::string>()).string();
        }
        doc["edges"] = edges.string();
        const auto cfg = tmp.write("cfg.json", doc.dump());
        const auto r = run_cli("--config " + quoted(cfg) + " --out " + quoted(tmp.path() / "o") + " pipeline", tmp.path());
        CHECK(r.status == 3);
        CHECK(r.output.find("stage 'build'") != std::string::npos);
        CHECK(r.output.find("v99") != std::string::npos);
        CHECK_FALSE(fs::exists(tmp.path() / "o" / "report"));
    }
}
