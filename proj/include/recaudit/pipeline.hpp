// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/graph.hpp>
#include <recaudit/lexicon.hpp>
#include <recaudit/walker.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace recaudit {

struct AuditConfig {
    std::filesystem::path videos;
    std::filesystem::path edges;
    std::filesystem::path lexicon;
    std::optional<std::filesystem::path> annotations;
    std::optional<std::filesystem::path> comment_events;
    LabelRule rule;
    LabelNames names;
    WalkConfig walk;
    std::size_t max_out_degree = RecGraph::kDefaultMaxOutDegree;
    std::filesystem::path out = "out";
};

/// Reads the keys present in `doc` on top of `base`. Unknown keys are a
/// ConfigError. Relative paths resolve against `base_dir`.
AuditConfig config_from_json(const nlohmann::json& doc, AuditConfig base = {},
                             const std::filesystem::path& base_dir = {});
AuditConfig load_config(const std::filesystem::path& path, AuditConfig base = {});

/// Config as recorded in the manifest. Excludes the output directory and the
/// thread count, neither of which affects results.
nlohmann::json config_to_json(const AuditConfig& config);

/// Video id -> label under the lexicon rule, plus the raw match counts.
struct LabeledCorpus {
    std::vector<VideoRecord> videos;
    std::map<std::string, Label> labels;
    std::map<std::string, MatchCounts> counts;
};

LabeledCorpus label_corpus(std::vector<VideoRecord> videos, const Lexicon& lexicon, const LabelRule& rule,
                           const LabelNames& names);

/// Labeled-node manifest: id,label,transcript_matches,comment_matches in corpus order.
void write_labels_csv(std::ostream& out, const LabeledCorpus& corpus);
std::map<std::string, Label> read_labels_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::filesystem::path& path);

struct PipelineResult {
    std::filesystem::path report_dir;
    std::vector<std::string> files;  // relative to report_dir, sorted
    std::vector<std::string> warnings;
};

/// ingest -> label -> build -> walk -> metrics, written to <out>/report.
/// On failure nothing is left behind and the error message names the stage.
PipelineResult run_pipeline(const AuditConfig& config);

}  // namespace recaudit
