// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>
#include <recaudit/lexicon.hpp>

#include "tuning_fixture.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

using namespace recaudit;
using namespace recaudit::testing;

namespace {

Lexicon lex(std::initializer_list<std::string> terms) {
    std::vector<std::string> v(terms);
    return Lexicon(v);
}

const Label T("target");
const Label O("other");

}  // namespace

TEST_CASE("load_lexicon normalizes phrases") {
    TempDir dir("lexicon");
    const auto l = load_lexicon(dir.write("lexicon.txt", "blackpill\n# note\n  Beta Male  \n\n"));
    CHECK(l.terms() == std::set<std::string>{"blackpill", "beta male"});

    CHECK(load_lexicon(dir.write("dup.txt", "blackpill\nblackpill\nBLACKPILL\n")).size() == 1);
    CHECK_THROWS_AS(load_lexicon(dir.write("comments.txt", "# only\n# comments\n")), ConfigError);
    CHECK_THROWS_AS(load_lexicon(dir.path() / "missing.txt"), ConfigError);
}

TEST_CASE("tokenize") {
    CHECK(tokenize("The Blackpill, is-REAL!") == std::vector<std::string>{"the", "blackpill", "is", "real"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("naïve café") == std::vector<std::string>{"naïve", "café"});
}

TEST_CASE("count_matches") {
    CHECK(lex({"blackpill"}).count_matches("the blackpill is real") == 1);
    CHECK(lex({"beta male"}).count_matches("a beta male and another beta male") == 2);
    CHECK(lex({"blackpill", "beta male"}).count_matches("") == 0);
    // whole tokens only
    CHECK(lex({"blackpill"}).count_matches("blackpills blackpilled") == 0);
    // phrase must be contiguous
    CHECK(lex({"beta male"}).count_matches("beta, male") == 1);
    CHECK(lex({"beta male"}).count_matches("beta big male") == 0);
    // self-overlap does not double count a token
    CHECK(lex({"la la"}).count_matches("la la la") == 1);
    CHECK(lex({"la la"}).count_matches("la la la la") == 2);
    // distinct phrases counted independently
    CHECK(lex({"beta", "beta male"}).count_matches("beta male") == 2);
}

TEST_CASE("count_matches ignores letter case") {
    std::mt19937_64 rng(3);
    const auto l = lex({"blackpill", "beta male", "chad"});
    const std::string base = "the beta male met chad; blackpill BETA  MALE chadchad Chad.";
    for (int i = 0; i < 200; ++i) {
        std::string s = base;
        for (auto& ch : s) {
            if (std::isalpha(static_cast<unsigned char>(ch)) && (rng() & 1)) {
                ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            }
        }
        CHECK(l.count_matches(s) == l.count_matches(base));
    }
}

TEST_CASE("label_video applies both thresholds") {
    const auto l = tuning_lexicon();
    const LabelRule rule{1, 3};
    CHECK(label_video(l, rule, video_with_matches("a", 1, 3)) == T);
    CHECK(label_video(l, rule, video_with_matches("b", 0, 0)) == O);
    CHECK(label_video(l, rule, video_with_matches("c", 5, 2)) == O);
    CHECK(label_video(l, LabelRule{0, 0}, video_with_matches("d", 0, 0)) == T);

    const auto mc = count_video(l, video_with_matches("e", 4, 6));
    CHECK(mc.transcript == 4);
    CHECK(mc.comments == 6);
}

TEST_CASE("score") {
    const std::vector<Label> truth = {T, T, O, O};
    const auto perfect = score(truth, truth, T);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const std::vector<Label> pred = {T, O, O, O};
    const auto s = score(pred, truth, T);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.accuracy == 0.75);

    const std::vector<Label> none = {O, O, O, O};
    const auto z = score(none, truth, T);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);
    CHECK(z.precision == 0.0);

    const std::vector<Label> short_pred = {T};
    CHECK_THROWS_AS(score(short_pred, truth, T), ContractError);
}

TEST_CASE("tune_rule errors") {
    const auto l = tuning_lexicon();
    std::vector<std::pair<VideoRecord, Label>> one_class = {{video_with_matches("a", 1, 1), T},
                                                            {video_with_matches("b", 2, 2), T}};
    CHECK_THROWS_AS(tune_rule(l, one_class), TuningError);
    CHECK_THROWS_AS(tune_rule(l, std::vector<std::pair<VideoRecord, Label>>{}), TuningError);
}

TEST_CASE("tune_rule on a one-cell grid scores the all-target labeler") {
    const auto l = tuning_lexicon();
    std::vector<std::pair<VideoRecord, Label>> truth = {
        {video_with_matches("a", 0, 0), T}, {video_with_matches("b", 0, 0), O}, {video_with_matches("c", 3, 3), O}};
    const auto r = tune_rule(l, truth, ThresholdGrid{0, 0, 0, 0});
    REQUIRE(r.cells.size() == 1);
    CHECK(r.selected.rule == LabelRule{0, 0});
    CHECK(r.selected.score.precision == doctest::Approx(1.0 / 3.0));
    CHECK(r.selected.score.recall == 1.0);
    CHECK(r.selected.score.accuracy == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("tune_rule picks (1,3) on a corpus where it uniquely maximizes F1") {
    // 1 transcript / 3 comment matches separates the classes perfectly
    const auto l = tuning_lexicon();
    std::vector<std::pair<VideoRecord, Label>> truth;
    int n = 0;
    auto add = [&](std::size_t t, std::size_t c, const Label& y, int k) {
        for (int i = 0; i < k; ++i) truth.emplace_back(video_with_matches("u" + std::to_string(n++), t, c), y);
    };
    add(1, 3, T, 10);
    add(2, 5, T, 5);
    add(1, 2, O, 6);  // rules out c <= 2
    add(0, 9, O, 6);  // rules out t = 0
    add(2, 0, O, 3);
    const auto r = tune_rule(l, truth);

    // oracle: exhaustive re-scoring through label_video
    double best = -1;
    std::vector<LabelRule> argmax;
    for (std::size_t t = 0; t <= 5; ++t) {
        for (std::size_t c = 0; c <= 10; ++c) {
            std::vector<Label> pred, gold;
            for (const auto& [v, y] : truth) {
                pred.push_back(label_video(l, {t, c}, v));
                gold.push_back(y);
            }
            const double f1 = score(pred, gold, T).f1;
            if (f1 > best) {
                best = f1;
                argmax = {{t, c}};
            } else if (f1 == best) {
                argmax.push_back({t, c});
            }
        }
    }
    REQUIRE(argmax.size() == 1);
    CHECK(argmax[0] == LabelRule{1, 3});
    CHECK(r.selected.rule == LabelRule{1, 3});
    CHECK(r.selected.score.f1 == 1.0);
}

TEST_CASE("tune_rule matches exhaustive re-scoring on the tuning-table corpus") {
    const auto l = tuning_lexicon();
    const auto truth = tuning_truth();
    const auto r = tune_rule(l, truth);
    REQUIRE(r.cells.size() == 6 * 11);

    // independent re-scoring of every cell, ranked by (f1, accuracy, c, t)
    using Key = std::tuple<double, double, std::size_t, std::size_t>;
    std::vector<Key> keys;
    for (std::size_t t = 0; t <= 5; ++t) {
        for (std::size_t c = 0; c <= 10; ++c) {
            std::vector<Label> pred, gold;
            for (const auto& [v, y] : truth) {
                pred.push_back(label_video(l, {t, c}, v));
                gold.push_back(y);
            }
            const auto s = score(pred, gold, T);
            keys.emplace_back(s.f1, s.accuracy, c, t);
            const auto& cell = r.cells[t * 11 + c];
            CHECK(cell.rule == LabelRule{t, c});
            CHECK(cell.score.f1 == s.f1);
            CHECK(cell.score.accuracy == s.accuracy);
        }
    }
    const auto best = *std::max_element(keys.begin(), keys.end());
    CHECK(r.selected.score.f1 == std::get<0>(best));
    CHECK(r.selected.rule == LabelRule{std::get<3>(best), std::get<2>(best)});
    CHECK(r.selected.rule == LabelRule{1, 3});
}

TEST_CASE("threshold monotonicity: stricter rules label a subset") {
    std::mt19937_64 rng(11);
    const auto l = tuning_lexicon();
    std::vector<VideoRecord> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(video_with_matches("m" + std::to_string(i), rng() % 6, rng() % 9));
    for (int trial = 0; trial < 200; ++trial) {
        LabelRule a{rng() % 6, rng() % 9};
        LabelRule b{a.min_transcript + rng() % 3, a.min_comments + rng() % 3};
        for (const auto& v : corpus) {
            if (label_video(l, b, v) == T) CHECK(label_video(l, a, v) == T);
        }
    }
}
