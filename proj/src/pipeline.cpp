// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/csv.hpp>
#include <recaudit/error.hpp>
#include <recaudit/metrics.hpp>
#include <recaudit/pipeline.hpp>

#include "jsonl.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

namespace recaudit {

using detail::json;
namespace fs = std::filesystem;

namespace {

template <typename T>
void read_key(const json& obj, const char* key, T& dst) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            dst = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config key '" + where + key + "'");
        }
    }
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    fs::path path(p);
    return (path.is_relative() && !base_dir.empty()) ? base_dir / path : path;
}

StartScenario parse_scenario(const std::string& s) {
    if (s == "target") return StartScenario::TargetStart;
    if (s == "other") return StartScenario::OtherStart;
    if (s == "list") return StartScenario::Explicit;
    throw ConfigError("start must be 'target', 'other' or 'list', got '" + s + "'");
}

std::string scenario_name(StartScenario s) {
    switch (s) {
    case StartScenario::TargetStart:
        return "target";
    case StartScenario::OtherStart:
        return "other";
    case StartScenario::Explicit:
        return "list";
    }
    return "?";
}

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("write failed: " + path.string());
}

}  // namespace

AuditConfig config_from_json(const json& doc, AuditConfig cfg, const fs::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc,
                   {"videos", "edges", "lexicon", "annotations", "comment_events", "rule", "labels", "walk",
                    "max_out_degree", "out"},
                   "");
    for (const char* key : {"videos", "edges", "lexicon"}) {
        if (auto it = doc.find(key); it != doc.end()) {
            std::string p;
            read_key(doc, key, p);
            fs::path r = resolve(base_dir, p);
            if (std::string_view(key) == "videos") cfg.videos = r;
            else if (std::string_view(key) == "edges") cfg.edges = r;
            else cfg.lexicon = r;
        }
    }
    if (doc.contains("annotations")) {
        std::string p;
        read_key(doc, "annotations", p);
        cfg.annotations = resolve(base_dir, p);
    }
    if (doc.contains("comment_events")) {
        std::string p;
        read_key(doc, "comment_events", p);
        cfg.comment_events = resolve(base_dir, p);
    }
    if (doc.contains("out")) {
        std::string p;
        read_key(doc, "out", p);
        cfg.out = resolve(base_dir, p);
    }
    read_key(doc, "max_out_degree", cfg.max_out_degree);

    if (auto it = doc.find("rule"); it != doc.end()) {
        reject_unknown(*it, {"min_transcript", "min_comments"}, "rule.");
        read_key(*it, "min_transcript", cfg.rule.min_transcript);
        read_key(*it, "min_comments", cfg.rule.min_comments);
    }
    if (auto it = doc.find("labels"); it != doc.end()) {
        reject_unknown(*it, {"target", "other"}, "labels.");
        read_key(*it, "target", cfg.names.target.name);
        read_key(*it, "other", cfg.names.other.name);
    }
    cfg.walk.target = cfg.names.target;
    if (auto it = doc.find("walk"); it != doc.end()) {
        const auto& w = *it;
        reject_unknown(w, {"walks", "hops", "start", "start_list", "no_repeat", "unique", "seed", "include_start",
                           "threads"},
                       "walk.");
        read_key(w, "walks", cfg.walk.walks);
        read_key(w, "hops", cfg.walk.hops);
        if (w.contains("start")) {
            std::string s;
            read_key(w, "start", s);
            cfg.walk.start = parse_scenario(s);
        }
        if (w.contains("start_list")) {
            read_key(w, "start_list", cfg.walk.start_nodes);
            cfg.walk.start = StartScenario::Explicit;
        }
        read_key(w, "no_repeat", cfg.walk.no_repeat);
        read_key(w, "unique", cfg.walk.unique_walks);
        read_key(w, "seed", cfg.walk.master_seed);
        read_key(w, "include_start", cfg.walk.include_start_in_metrics);
        read_key(w, "threads", cfg.walk.threads);
    }
    if (cfg.walk.walks == 0 || cfg.walk.hops == 0) throw ConfigError("walk.walks and walk.hops must be >= 1");
    return cfg;
}

AuditConfig load_config(const fs::path& path, AuditConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(doc, std::move(base), path.parent_path());
}

json config_to_json(const AuditConfig& c) {
    json doc = {
        {"videos", c.videos.generic_string()},
        {"edges", c.edges.generic_string()},
        {"lexicon", c.lexicon.generic_string()},
        {"rule", {{"min_transcript", c.rule.min_transcript}, {"min_comments", c.rule.min_comments}}},
        {"labels", {{"target", c.names.target.name}, {"other", c.names.other.name}}},
        {"max_out_degree", c.max_out_degree},
        {"walk",
         {{"walks", c.walk.walks},
          {"hops", c.walk.hops},
          {"start", scenario_name(c.walk.start)},
          {"no_repeat", c.walk.no_repeat},
          {"unique", c.walk.unique_walks},
          {"seed", c.walk.master_seed},
          {"include_start", c.walk.include_start_in_metrics}}},
    };
    if (c.walk.start == StartScenario::Explicit) doc["walk"]["start_list"] = c.walk.start_nodes;
    if (c.annotations) doc["annotations"] = c.annotations->generic_string();
    if (c.comment_events) doc["comment_events"] = c.comment_events->generic_string();
    return doc;
}

// ---------------------------------------------------------------------------

LabeledCorpus label_corpus(std::vector<VideoRecord> videos, const Lexicon& lexicon, const LabelRule& rule,
                           const LabelNames& names) {
    LabeledCorpus lc;
    for (const auto& v : videos) {
        const auto mc = count_video(lexicon, v);
        lc.counts[v.id] = mc;
        lc.labels[v.id] = satisfies(rule, mc) ? names.target : names.other;
    }
    lc.videos = std::move(videos);
    return lc;
}

void write_labels_csv(std::ostream& out, const LabeledCorpus& corpus) {
    out << "id,label,transcript_matches,comment_matches\n";
    for (const auto& v : corpus.videos) {
        if (v.id.find_first_of(",\n\r") != std::string::npos) {
            throw IngestError("video id '" + v.id + "' cannot be written to CSV");
        }
        const auto& mc = corpus.counts.at(v.id);
        out << v.id << ',' << corpus.labels.at(v.id).name << ',' << mc.transcript << ',' << mc.comments << '\n';
    }
}

std::map<std::string, Label> read_labels_csv(const fs::path& path) {
    const auto table = load_csv(path);
    if (table.header.size() < 2 || table.header[0] != "id" || table.header[1] != "label") {
        throw ParseError(path.string() + ": labels CSV must start with columns id,label");
    }
    std::map<std::string, Label> labels;
    for (const auto& r : table.rows) {
        if (r.size() != table.header.size()) throw ParseError(path.string() + ": ragged labels CSV");
        if (!labels.emplace(r[0], Label(r[1])).second) throw IngestError(path.string() + ": duplicate id '" + r[0] + "'");
    }
    return labels;
}

std::string sha256_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw ContractError("sha256 init failed");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const AuditConfig& config) {
    std::map<std::string, fs::path> inputs = {
        {"videos", config.videos}, {"edges", config.edges}, {"lexicon", config.lexicon}};
    if (config.annotations) inputs["annotations"] = *config.annotations;
    if (config.comment_events) inputs["comment_events"] = *config.comment_events;
    for (const auto& [name, path] : inputs) {
        if (!fs::is_regular_file(path)) throw ConfigError("input '" + name + "' not found: " + path.string());
    }

    // Everything is rendered in memory first; the bundle is written only once
    // every stage has succeeded.
    std::map<std::string, std::string> files;
    PipelineResult result;
    auto emit = [&](const std::string& name, auto&& writer) {
        std::ostringstream os;
        writer(os);
        files[name] = os.str();
    };

    auto videos = run_stage("ingest", [&] { return ingest_videos(config.videos); });
    auto corpus = run_stage("label", [&] {
        const auto lexicon = load_lexicon(config.lexicon);
        return label_corpus(std::move(videos), lexicon, config.rule, config.names);
    });
    emit("labels.csv", [&](std::ostream& os) { write_labels_csv(os, corpus); });

    const auto graph = run_stage("build", [&] {
        const auto edges = load_edges(config.edges);
        return build_graph(corpus.videos, edges, corpus.labels, config.max_out_degree);
    });
    run_stage("graph-stats", [&] {
        emit("transitions.csv",
             [&](std::ostream& os) { write_transitions_csv(os, transition_counts(graph), config.names.target); });
        const auto comp = rec_composition(graph, config.names.target);
        emit("rec_composition.csv", [&](std::ostream& os) { write_rec_composition_csv(os, graph, comp); });
        emit("rec_cdf.csv", [&](std::ostream& os) { write_rec_cdf_csv(os, comp); });
        return 0;
    });

    std::vector<WalkConfig> scenarios;
    if (config.walk.start == StartScenario::Explicit) {
        scenarios.push_back(config.walk);
    } else {
        for (auto s : {StartScenario::TargetStart, StartScenario::OtherStart}) {
            WalkConfig w = config.walk;
            w.start = s;
            w.target = config.names.target;
            scenarios.push_back(w);
        }
    }
    for (const auto& w : scenarios) {
        const std::string tag = scenario_name(w.start) + "_start";
        const auto run = run_stage("walk", [&] { return run_walks(graph, w); });
        for (const auto& msg : run.warnings) result.warnings.push_back(tag + ": " + msg);
        emit("traces_" + tag + ".jsonl", [&](std::ostream& os) { write_traces(os, run.traces); });
        run_stage("metrics", [&] {
            const auto& target = config.names.target;
            const bool inc = w.include_start_in_metrics;
            emit("encounter_" + tag + ".csv", [&](std::ostream& os) {
                write_encounter_csv(os, encounter_curve(run.traces, target, w.hops, inc));
            });
            emit("unique_fraction_" + tag + ".csv", [&](std::ostream& os) {
                write_unique_fraction_csv(os, unique_fraction_curve(run.traces, target, w.hops, inc));
            });
            if (w.start == StartScenario::TargetStart) {
                emit("continuation_" + tag + ".csv", [&](std::ostream& os) {
                    write_continuation_csv(os, continuation_table(run.traces, target, w.hops));
                });
            }
            return 0;
        });
    }

    if (config.annotations) {
        run_stage("agreement", [&] {
            const auto ann = load_annotations(*config.annotations);
            emit("agreement.csv", [&](std::ostream& os) { write_agreement_csv(os, fleiss_kappa(ann)); });
            return 0;
        });
    }
    if (config.comment_events) {
        run_stage("retention", [&] {
            const auto events = load_comment_events(*config.comment_events);
            emit("retention.csv", [&](std::ostream& os) { write_retention_csv(os, retention_series(events)); });
            emit("temporal.csv", [&](std::ostream& os) { write_temporal_csv(os, temporal_counts(events, false)); });
            emit("temporal_normalized.csv",
                 [&](std::ostream& os) { write_temporal_csv(os, temporal_counts(events, true)); });
            return 0;
        });
    }

    run_stage("plot-data", [&] {
        std::map<std::string, std::string> plots;
        for (const auto& [name, content] : files) {
            if (!name.ends_with(".csv") || name == "labels.csv" || name == "transitions.csv" ||
                name == "rec_composition.csv" || name == "agreement.csv") {
                continue;
            }
            std::istringstream is(content);
            std::ostringstream os;
            emit_plot_data(read_csv(is), os);
            plots["plots/" + name.substr(0, name.size() - 4) + ".series.csv"] = os.str();
        }
        files.insert(plots.begin(), plots.end());
        return 0;
    });

    json manifest;
    manifest["config"] = config_to_json(config);
    manifest["master_seed"] = config.walk.master_seed;
    for (const auto& [name, path] : inputs) {
        manifest["inputs"][name] = {{"path", path.generic_string()}, {"sha256", sha256_hex(path)}};
    }
    manifest["warnings"] = result.warnings;

    const fs::path report = config.out / "report";
    const fs::path staging = config.out / "report.partial";
    try {
        fs::create_directories(config.out);
        fs::remove_all(staging);
        fs::create_directories(staging / "plots");
        for (const auto& [name, content] : files) write_file(staging / name, content);
        for (const auto& [name, content] : files) manifest["outputs"][name] = sha256_hex(staging / name);
        write_file(staging / "manifest.json", manifest.dump(2) + "\n");
        fs::remove_all(report);
        fs::rename(staging, report);
    } catch (const fs::filesystem_error& e) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw ConfigError(std::string("stage 'report': ") + e.what());
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }

    result.report_dir = report;
    for (const auto& [name, content] : files) result.files.push_back(name);
    result.files.push_back("manifest.json");
    std::sort(result.files.begin(), result.files.end());
    return result;
}

}  // namespace recaudit
