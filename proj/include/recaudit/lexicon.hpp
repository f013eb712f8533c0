// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <recaudit/corpus.hpp>

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recaudit {

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 are kept as word characters so UTF-8 words
/// are never split.
std::vector<std::string> tokenize(std::string_view text);

/// A set of lowercase term phrases, each one or more tokens long.
class Lexicon {
public:
    /// Normalizes each phrase (trim, lowercase, collapse to its tokens) and
    /// drops duplicates. Throws ConfigError when nothing is left.
    explicit Lexicon(std::span<const std::string> phrases);

    const std::set<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    /// Occurrences of any phrase in `text`. Each phrase is matched greedily
    /// left to right without overlapping itself; distinct phrases are counted
    /// independently.
    std::size_t count_matches(std::string_view text) const;
    std::size_t count_matches(std::span<const std::string> tokens) const;

private:
    std::set<std::string> terms_;
    std::vector<std::vector<std::string>> phrases_;  // tokenized, parallel to terms_
};

Lexicon load_lexicon(const std::filesystem::path& path);

struct LabelRule {
    std::size_t min_transcript = 1;
    std::size_t min_comments = 3;

    bool operator==(const LabelRule&) const = default;
};

struct LabelNames {
    Label target{"target"};
    Label other{"other"};
};

struct MatchCounts {
    std::size_t transcript = 0;
    std::size_t comments = 0;
};

/// Comment matches are summed comment by comment, so a phrase never spans
/// two comments.
MatchCounts count_video(const Lexicon& lexicon, const VideoRecord& video);

bool satisfies(const LabelRule& rule, const MatchCounts& counts) noexcept;

Label label_video(const Lexicon& lexicon, const LabelRule& rule, const VideoRecord& video,
                  const LabelNames& names = {});

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

struct BinaryScore {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    Confusion confusion;
};

/// Binary metrics with `positive` as the positive class. Precision, recall
/// and F1 are 0 when their denominators are 0.
BinaryScore score(std::span<const Label> predicted, std::span<const Label> truth, const Label& positive);
BinaryScore score(const Confusion& confusion);

struct RuleEvaluation {
    LabelRule rule;
    BinaryScore score;
};

struct ThresholdGrid {
    std::size_t transcript_min = 0, transcript_max = 5;
    std::size_t comments_min = 0, comments_max = 10;
};

struct TuningResult {
    std::vector<RuleEvaluation> cells;  // transcript-major, ascending
    RuleEvaluation selected;
};

/// True when `a` ranks strictly above `b`: higher F1, then higher accuracy,
/// then larger comment threshold, then larger transcript threshold. F1 and
/// accuracy are compared exactly on the confusion counts.
bool ranks_above(const RuleEvaluation& a, const RuleEvaluation& b);

TuningResult tune_rule(const Lexicon& lexicon, std::span<const std::pair<VideoRecord, Label>> truth,
                       const ThresholdGrid& grid = {}, const LabelNames& names = {});

}  // namespace recaudit
