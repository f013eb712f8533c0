// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>
#include <recaudit/lexicon.hpp>

#include "jsonl.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace recaudit {

namespace {

bool is_word_byte(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Lexicon::Lexicon(std::span<const std::string> phrases) {
    std::map<std::string, std::vector<std::string>> normalized;
    for (const auto& p : phrases) {
        auto tokens = tokenize(p);
        if (tokens.empty()) continue;
        auto key = join_tokens(tokens);
        normalized.emplace(std::move(key), std::move(tokens));
    }
    if (normalized.empty()) throw ConfigError("lexicon is empty");
    for (auto& [key, tokens] : normalized) {
        terms_.insert(key);
        phrases_.push_back(std::move(tokens));
    }
}

std::size_t Lexicon::count_matches(std::string_view text) const {
    auto tokens = tokenize(text);
    return count_matches(tokens);
}

std::size_t Lexicon::count_matches(std::span<const std::string> tokens) const {
    // next position at which each phrase may match again
    std::vector<std::size_t> next_allowed(phrases_.size(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (std::size_t p = 0; p < phrases_.size(); ++p) {
            const auto& phrase = phrases_[p];
            if (i < next_allowed[p] || phrase.front() != tokens[i]) continue;
            if (i + phrase.size() > tokens.size()) continue;
            if (!std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) continue;
            ++count;
            next_allowed[p] = i + phrase.size();
        }
    }
    return count;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        phrases.push_back(line);
    }
    try {
        return Lexicon(phrases);
    } catch (const ConfigError&) {
        throw ConfigError("lexicon has no terms after filtering comments: " + path.string());
    }
}

// ---------------------------------------------------------------------------

MatchCounts count_video(const Lexicon& lexicon, const VideoRecord& video) {
    MatchCounts mc;
    mc.transcript = lexicon.count_matches(video.transcript);
    for (const auto& c : video.comments) mc.comments += lexicon.count_matches(c);
    return mc;
}

bool satisfies(const LabelRule& rule, const MatchCounts& counts) noexcept {
    return counts.transcript >= rule.min_transcript && counts.comments >= rule.min_comments;
}

Label label_video(const Lexicon& lexicon, const LabelRule& rule, const VideoRecord& video, const LabelNames& names) {
    return satisfies(rule, count_video(lexicon, video)) ? names.target : names.other;
}

BinaryScore score(const Confusion& c) {
    BinaryScore s;
    s.confusion = c;
    const auto n = static_cast<double>(c.total());
    s.accuracy = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
    s.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    s.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    s.f1 = c.tp > 0 ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn) : 0.0;
    return s;
}

BinaryScore score(std::span<const Label> predicted, std::span<const Label> truth, const Label& positive) {
    if (predicted.size() != truth.size()) {
        throw ContractError("score: predicted has " + std::to_string(predicted.size()) + " items, truth has " +
                            std::to_string(truth.size()));
    }
    if (truth.empty()) throw ContractError("score: no items");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool p = predicted[i] == positive;
        const bool t = truth[i] == positive;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return score(c);
}

bool ranks_above(const RuleEvaluation& a, const RuleEvaluation& b) {
    using u128 = unsigned __int128;
    const auto& ca = a.score.confusion;
    const auto& cb = b.score.confusion;
    // F1 = 2tp / (2tp + fp + fn), compared by cross-multiplication
    const u128 fa_num = 2 * ca.tp, fa_den = 2 * ca.tp + ca.fp + ca.fn;
    const u128 fb_num = 2 * cb.tp, fb_den = 2 * cb.tp + cb.fp + cb.fn;
    const u128 lhs = fa_num * (fb_den == 0 ? 1 : fb_den);
    const u128 rhs = fb_num * (fa_den == 0 ? 1 : fa_den);
    if (lhs != rhs) return lhs > rhs;
    const u128 acc_l = static_cast<u128>(ca.tp + ca.tn) * cb.total();
    const u128 acc_r = static_cast<u128>(cb.tp + cb.tn) * ca.total();
    if (acc_l != acc_r) return acc_l > acc_r;
    if (a.rule.min_comments != b.rule.min_comments) return a.rule.min_comments > b.rule.min_comments;
    return a.rule.min_transcript > b.rule.min_transcript;
}

TuningResult tune_rule(const Lexicon& lexicon, std::span<const std::pair<VideoRecord, Label>> truth,
                       const ThresholdGrid& grid, const LabelNames& names) {
    if (truth.empty()) throw TuningError("tune_rule: ground truth is empty");
    if (grid.transcript_min > grid.transcript_max || grid.comments_min > grid.comments_max) {
        throw ConfigError("tune_rule: empty threshold grid");
    }
    std::vector<MatchCounts> counts;
    std::vector<bool> positive;
    counts.reserve(truth.size());
    std::size_t n_pos = 0;
    for (const auto& [video, label] : truth) {
        if (label != names.target && label != names.other) {
            throw TuningError("tune_rule: truth label '" + label.name + "' for '" + video.id +
                              "' is neither target nor other");
        }
        counts.push_back(count_video(lexicon, video));
        positive.push_back(label == names.target);
        n_pos += positive.back() ? 1 : 0;
    }
    if (n_pos == 0 || n_pos == truth.size()) {
        throw TuningError("tune_rule: ground truth must contain both target and other examples");
    }

    TuningResult result;
    for (std::size_t t = grid.transcript_min; t <= grid.transcript_max; ++t) {
        for (std::size_t c = grid.comments_min; c <= grid.comments_max; ++c) {
            LabelRule rule{t, c};
            Confusion cm;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                const bool p = satisfies(rule, counts[i]);
                if (p && positive[i]) ++cm.tp;
                else if (p) ++cm.fp;
                else if (positive[i]) ++cm.fn;
                else ++cm.tn;
            }
            result.cells.push_back({rule, score(cm)});
        }
    }
    result.selected = result.cells.front();
    for (const auto& cell : result.cells) {
        if (ranks_above(cell, result.selected)) result.selected = cell;
    }
    return result;
}

}  // namespace recaudit
