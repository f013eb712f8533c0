// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

// recaudit: command-line front end for recommendation-graph audits.

#include <recaudit/corpus.hpp>
#include <recaudit/csv.hpp>
#include <recaudit/error.hpp>
#include <recaudit/graph.hpp>
#include <recaudit/lexicon.hpp>
#include <recaudit/metrics.hpp>
#include <recaudit/pipeline.hpp>
#include <recaudit/walker.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace recaudit;

namespace {

struct Globals {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
};

/// Writes to --out when given, stdout otherwise.
void deliver(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + out_path);
    f << content;
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

bool on_off(const std::string& v, const char* flag) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw ConfigError(std::string(flag) + " expects on|off, got '" + v + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

std::vector<double> read_numbers(const std::string& path) {
    std::vector<double> out;
    for (const auto& l : read_lines(path)) out.push_back(parse_number(l));
    return out;
}

/// Shared options for commands that need a labeled graph.
struct GraphInputs {
    std::string videos, edges, lexicon, labels;
    std::size_t min_transcript = 1, min_comments = 3, max_out_degree = RecGraph::kDefaultMaxOutDegree;
    std::string target = "target", other = "other";
    CLI::Option *o_videos{}, *o_edges{}, *o_lexicon{}, *o_mt{}, *o_mc{}, *o_target{}, *o_other{}, *o_k{};

    void add(CLI::App* cmd, bool need_edges) {
        o_videos = cmd->add_option("--videos", videos, "videos.jsonl");
        if (need_edges) o_edges = cmd->add_option("--edges", edges, "edges.jsonl");
        o_lexicon = cmd->add_option("--lexicon", lexicon, "lexicon.txt (labels videos with the threshold rule)");
        cmd->add_option("--labels", labels, "labels CSV (id,label,...) instead of lexicon labeling");
        o_mt = cmd->add_option("--min-transcript", min_transcript, "transcript match threshold");
        o_mc = cmd->add_option("--min-comments", min_comments, "comment match threshold");
        o_target = cmd->add_option("--target-label", target, "name of the audited label");
        o_other = cmd->add_option("--other-label", other, "name of the complementary label");
        if (need_edges) o_k = cmd->add_option("--max-recs", max_out_degree, "maximum recommendations per video");
    }

    /// flag > config file > default
    void merge(const AuditConfig& cfg) {
        if (!o_videos->count() && !cfg.videos.empty()) videos = cfg.videos.string();
        if (o_edges && !o_edges->count() && !cfg.edges.empty()) edges = cfg.edges.string();
        if (!o_lexicon->count() && !cfg.lexicon.empty() && labels.empty()) lexicon = cfg.lexicon.string();
        if (!o_mt->count()) min_transcript = cfg.rule.min_transcript;
        if (!o_mc->count()) min_comments = cfg.rule.min_comments;
        if (!o_target->count()) target = cfg.names.target.name;
        if (!o_other->count()) other = cfg.names.other.name;
        if (o_k && !o_k->count()) max_out_degree = cfg.max_out_degree;
    }

    LabelNames names() const { return {Label(target), Label(other)}; }

    LabeledCorpus corpus() const {
        if (videos.empty()) throw ConfigError("--videos is required");
        auto vids = ingest_videos(videos);
        if (!labels.empty()) {
            LabeledCorpus lc;
            lc.labels = read_labels_csv(labels);
            lc.videos = std::move(vids);
            return lc;
        }
        if (lexicon.empty()) throw ConfigError("either --lexicon or --labels is required");
        return label_corpus(std::move(vids), load_lexicon(lexicon), LabelRule{min_transcript, min_comments}, names());
    }

    RecGraph graph() const {
        if (edges.empty()) throw ConfigError("--edges is required");
        auto lc = corpus();
        return build_graph(lc.videos, load_edges(edges), lc.labels, max_out_degree);
    }
};

AuditConfig base_config(const Globals& g) {
    AuditConfig cfg;
    if (!g.config.empty()) cfg = load_config(g.config);
    if (g.seed_opt && g.seed_opt->count()) cfg.walk.master_seed = g.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recaudit: recommendation-graph audit toolkit"};
    app.require_subcommand(1);
    Globals g;
    g.seed_opt = app.add_option("--seed", g.seed, "master seed for all randomness");
    app.add_option("--out", g.out, "output file (output directory for 'pipeline')");
    app.add_option("--config", g.config, "JSON audit configuration");
    // Global flags may also follow the subcommand.
    app.fallthrough();

    std::function<void()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate videos.jsonl and re-emit it normalized");
    std::string ingest_path;
    ingest->add_option("videos", ingest_path, "videos.jsonl")->required();
    ingest->callback([&] {
        action = [&] {
            const auto videos = ingest_videos(ingest_path);
            deliver(g.out, render([&](std::ostream& os) { write_videos(os, videos); }));
            std::cerr << videos.size() << " records\n";
        };
    });

    // label
    auto* label = app.add_subcommand("label", "label videos with the lexicon threshold rule");
    GraphInputs label_in;
    label_in.add(label, false);
    label->callback([&] {
        action = [&] {
            label_in.merge(base_config(g));
            auto lc = label_in.corpus();
            if (lc.counts.empty()) throw ConfigError("label needs --lexicon");
            deliver(g.out, render([&](std::ostream& os) { write_labels_csv(os, lc); }));
        };
    });

    // tune-rule
    auto* tune = app.add_subcommand("tune-rule", "grid-search the threshold rule against ground truth");
    std::string tune_videos, tune_truth, tune_lexicon, tune_target = "target", tune_other = "other";
    ThresholdGrid grid;
    tune->add_option("--videos", tune_videos, "videos.jsonl")->required();
    tune->add_option("--truth", tune_truth, "ground-truth labels CSV (id,label)")->required();
    tune->add_option("--lexicon", tune_lexicon, "lexicon.txt")->required();
    tune->add_option("--max-transcript", grid.transcript_max, "largest transcript threshold");
    tune->add_option("--max-comments", grid.comments_max, "largest comment threshold");
    tune->add_option("--target-label", tune_target);
    tune->add_option("--other-label", tune_other);
    tune->callback([&] {
        action = [&] {
            const auto videos = ingest_videos(tune_videos);
            const auto truth_labels = read_labels_csv(tune_truth);
            std::vector<std::pair<VideoRecord, Label>> truth;
            for (const auto& v : videos) {
                if (auto it = truth_labels.find(v.id); it != truth_labels.end()) truth.emplace_back(v, it->second);
            }
            const auto result =
                tune_rule(load_lexicon(tune_lexicon), truth, grid, LabelNames{Label(tune_target), Label(tune_other)});
            deliver(g.out, render([&](std::ostream& os) { write_tuning_csv(os, result); }));
        };
    });

    // graph-stats
    auto* gstats = app.add_subcommand("graph-stats", "transition counts between labels");
    GraphInputs gs_in;
    gs_in.add(gstats, true);
    gstats->callback([&] {
        action = [&] {
            gs_in.merge(base_config(g));
            const auto graph = gs_in.graph();
            deliver(g.out, render([&](std::ostream& os) {
                        write_transitions_csv(os, transition_counts(graph), Label(gs_in.target));
                    }));
        };
    });

    // walk
    auto* walk = app.add_subcommand("walk", "seeded random walks over the recommendation graph");
    GraphInputs walk_in;
    walk_in.add(walk, true);
    WalkConfig wc;
    std::string start_label = "target", start_list, no_repeat = "on", unique = "on";
    auto* o_walks = walk->add_option("--walks", wc.walks, "number of walks");
    auto* o_hops = walk->add_option("--hops", wc.hops, "hops per walk");
    auto* o_start = walk->add_option("--start-label", start_label, "target|other");
    walk->add_option("--start-list", start_list, "file of start video ids, one per line");
    auto* o_norep = walk->add_option("--no-repeat", no_repeat, "on|off");
    auto* o_uniq = walk->add_option("--unique", unique, "on|off");
    auto* o_threads = walk->add_option("--threads", wc.threads, "worker threads (0 = all cores)");
    walk->callback([&] {
        action = [&] {
            const auto cfg = base_config(g);
            walk_in.merge(cfg);
            WalkConfig w = cfg.walk;
            if (o_walks->count()) w.walks = wc.walks;
            if (o_hops->count()) w.hops = wc.hops;
            if (o_threads->count()) w.threads = wc.threads;
            if (o_start->count()) {
                if (start_label == "target") w.start = StartScenario::TargetStart;
                else if (start_label == "other") w.start = StartScenario::OtherStart;
                else throw ConfigError("--start-label expects target|other");
            }
            if (!start_list.empty()) {
                w.start = StartScenario::Explicit;
                w.start_nodes = read_lines(start_list);
            }
            if (o_norep->count()) w.no_repeat = on_off(no_repeat, "--no-repeat");
            if (o_uniq->count()) w.unique_walks = on_off(unique, "--unique");
            w.target = Label(walk_in.target);
            if (w.walks == 0 || w.hops == 0) throw ConfigError("--walks and --hops must be >= 1");
            const auto graph = walk_in.graph();
            const auto run = run_walks(graph, w);
            for (const auto& msg : run.warnings) std::cerr << "warning: " << msg << '\n';
            deliver(g.out, render([&](std::ostream& os) { write_traces(os, run.traces); }));
        };
    });

    // metrics <sub>
    auto* metrics = app.add_subcommand("metrics", "compute one audit metric");
    metrics->require_subcommand(1);
    bool plot = false;
    metrics->add_flag("--plot", plot, "emit x,y plot series instead of the metric CSV");
    auto emit_metric = [&](const std::string& csv) {
        if (!plot) return deliver(g.out, csv);
        std::istringstream is(csv);
        deliver(g.out, render([&](std::ostream& os) { emit_plot_data(read_csv(is), os); }));
    };

    struct TraceMetricArgs {
        std::string traces, target = "target";
        std::size_t hops = 0;
        bool include_start = false;
    };
    auto add_trace_metric = [&](const char* name, const char* desc, TraceMetricArgs& a) {
        auto* cmd = metrics->add_subcommand(name, desc);
        cmd->add_option("--traces", a.traces, "traces.jsonl")->required();
        cmd->add_option("--target-label", a.target, "audited label");
        cmd->add_option("--hops", a.hops, "hops (default: longest trace)");
        cmd->add_flag("--include-start", a.include_start, "count the start video as a visit");
        return cmd;
    };
    TraceMetricArgs enc_a, uf_a, cont_a;
    add_trace_metric("encounter", "fraction of walks meeting a target video by hop k", enc_a)->callback([&] {
        action = [&] {
            const auto traces = load_traces(enc_a.traces);
            emit_metric(render([&](std::ostream& os) {
                write_encounter_csv(os, encounter_curve(traces, Label(enc_a.target), enc_a.hops, enc_a.include_start));
            }));
        };
    });
    add_trace_metric("unique-fraction", "target share of distinct videos visited by hop k", uf_a)->callback([&] {
        action = [&] {
            const auto traces = load_traces(uf_a.traces);
            emit_metric(render([&](std::ostream& os) {
                write_unique_fraction_csv(os,
                                          unique_fraction_curve(traces, Label(uf_a.target), uf_a.hops, uf_a.include_start));
            }));
        };
    });
    add_trace_metric("conditional", "continuation after M consecutive target videos", cont_a)->callback([&] {
        action = [&] {
            const auto traces = load_traces(cont_a.traces);
            const std::size_t hops = cont_a.hops ? cont_a.hops : max_hops(traces);
            emit_metric(render([&](std::ostream& os) {
                write_continuation_csv(os, continuation_table(traces, Label(cont_a.target), hops));
            }));
        };
    });

    auto* rec_cdf = metrics->add_subcommand("rec-cdf", "per-video share of target recommendations, as a CDF");
    GraphInputs cdf_in;
    cdf_in.add(rec_cdf, true);
    rec_cdf->callback([&] {
        action = [&] {
            cdf_in.merge(base_config(g));
            const auto graph = cdf_in.graph();
            emit_metric(render([&](std::ostream& os) { write_rec_cdf_csv(os, rec_composition(graph, Label(cdf_in.target))); }));
        };
    });

    std::string events_path, annotations_path;
    auto retention_action = [&] {
        const auto events = load_comment_events(events_path);
        emit_metric(render([&](std::ostream& os) { write_retention_csv(os, retention_series(events)); }));
    };
    auto agreement_action = [&] {
        const auto ann = load_annotations(annotations_path);
        emit_metric(render([&](std::ostream& os) { write_agreement_csv(os, fleiss_kappa(ann)); }));
    };
    auto* m_ret = metrics->add_subcommand("retention", "overlap of commenting users between adjacent months");
    m_ret->add_option("--events", events_path, "comment_events.jsonl")->required();
    m_ret->callback([&] { action = retention_action; });
    auto* m_agr = metrics->add_subcommand("agreement", "Fleiss kappa over annotations");
    m_agr->add_option("--annotations", annotations_path, "annotations.jsonl")->required();
    m_agr->callback([&] { action = agreement_action; });

    auto* fisher = metrics->add_subcommand("fisher", "two-sided Fisher exact test on a 2x2 table");
    std::vector<std::uint64_t> cells;
    fisher->add_option("--table", cells, "a,b,c,d (row-major)")->required()->delimiter(',')->expected(4);
    fisher->callback([&] {
        action = [&] {
            Table2x2 t{cells[0], cells[1], cells[2], cells[3]};
            emit_metric(render([&](std::ostream& os) { write_fisher_csv(os, t, fisher_exact(t)); }));
        };
    });

    auto* ks = metrics->add_subcommand("ks", "two-sample Kolmogorov-Smirnov test");
    std::string ks_x, ks_y, ks_xt, ks_yt, ks_target = "target";
    ks->add_option("--x", ks_x, "first sample, one number per line");
    ks->add_option("--y", ks_y, "second sample, one number per line");
    ks->add_option("--x-traces", ks_xt, "first sample as per-walk target counts from traces.jsonl");
    ks->add_option("--y-traces", ks_yt, "second sample as per-walk target counts from traces.jsonl");
    ks->add_option("--target-label", ks_target);
    ks->callback([&] {
        action = [&] {
            auto per_walk = [&](const std::string& path) {
                std::vector<double> out;
                for (const auto& t : load_traces(path)) {
                    std::size_t n = 0;
                    for (std::size_t k = 1; k < t.nodes.size(); ++k) n += t.nodes[k].label.name == ks_target;
                    out.push_back(static_cast<double>(n));
                }
                return out;
            };
            auto sample = [&](const std::string& nums, const std::string& traces, const char* which) {
                if (!nums.empty()) return read_numbers(nums);
                if (!traces.empty()) return per_walk(traces);
                throw ConfigError(std::string("sample ") + which + " is missing");
            };
            const auto x = sample(ks_x, ks_xt, "x");
            const auto y = sample(ks_y, ks_yt, "y");
            emit_metric(render([&](std::ostream& os) { write_ks_csv(os, x.size(), y.size(), ks_two_sample(x, y)); }));
        };
    });

    // top-level aliases
    auto* retention = app.add_subcommand("retention", "same as 'metrics retention'");
    retention->add_option("--events", events_path, "comment_events.jsonl")->required();
    retention->callback([&] { action = retention_action; });
    auto* agreement = app.add_subcommand("agreement", "same as 'metrics agreement'");
    agreement->add_option("--annotations", annotations_path, "annotations.jsonl")->required();
    agreement->callback([&] { action = agreement_action; });

    // saturation
    auto* sat = app.add_subcommand("saturation", "watch-history saturation against a scripted recommender");
    std::string script, reference = "ref", watch_list;
    std::size_t watch_count = 100;
    double threshold = 1.0;
    sat->add_option("--script", script, "recommender_script.jsonl")->required();
    sat->add_option("--reference", reference, "reference video id");
    sat->add_option("--watch-list", watch_list, "videos to watch, one id per line");
    sat->add_option("--watch-count", watch_count, "watch this many placeholder videos when no list is given");
    sat->add_option("--threshold", threshold, "overlap coefficient that stops the search");
    sat->callback([&] {
        action = [&] {
            const auto rec = ScriptedRecommender::load(script);
            std::vector<std::string> watch;
            if (!watch_list.empty()) {
                watch = read_lines(watch_list);
            } else {
                for (std::size_t i = 1; i <= watch_count; ++i) watch.push_back("watch" + std::to_string(i));
            }
            const auto res = saturation_detect(rec, reference, watch, threshold);
            deliver(g.out, render([&](std::ostream& os) {
                        os << "# watched,overlap per step; saturated=" << (res.saturated ? "yes" : "no")
                           << " W=" << res.watched << '\n';
                        os << "watched,overlap\n";
                        for (std::size_t i = 0; i < res.overlap.size(); ++i) {
                            os << (i + 1) << ',' << format_number(res.overlap[i]) << '\n';
                        }
                    }));
            std::cerr << "W=" << res.watched << (res.saturated ? "" : " (not saturated)") << '\n';
        };
    });

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the full audit and write a report bundle");
    pipeline->callback([&] {
        action = [&] {
            if (g.config.empty()) throw ConfigError("pipeline requires --config");
            auto cfg = base_config(g);
            if (!g.out.empty()) cfg.out = g.out;
            const auto res = run_pipeline(cfg);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
            std::cerr << "wrote " << res.files.size() << " files to " << res.report_dir.string() << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (action) action();
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
