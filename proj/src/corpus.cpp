// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/corpus.hpp>
#include <recaudit/error.hpp>

#include "jsonl.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <unordered_set>

namespace recaudit {

using detail::json;

YearMonth YearMonth::parse(std::string_view text) {
    auto bad = [&] { return ParseError("invalid year-month '" + std::string(text) + "', expected YYYY-MM"); };
    if (text.size() != 7 || text[4] != '-') throw bad();
    YearMonth ym;
    auto [p1, e1] = std::from_chars(text.data(), text.data() + 4, ym.year);
    auto [p2, e2] = std::from_chars(text.data() + 5, text.data() + 7, ym.month);
    if (e1 != std::errc() || e2 != std::errc() || p1 != text.data() + 4 || p2 != text.data() + 7) throw bad();
    if (ym.month < 1 || ym.month > 12) throw bad();
    return ym;
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::next() const {
    return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

YearMonth YearMonth::prev() const {
    return month == 1 ? YearMonth{year - 1, 12} : YearMonth{year, month - 1};
}

// ---------------------------------------------------------------------------

AnnotationSet::AnnotationSet(std::vector<Label> universe) : universe_(std::move(universe)) {
    std::set<Label> seen;
    for (const auto& l : universe_) {
        if (!seen.insert(l).second) throw ConfigError("duplicate label in universe: " + l.name);
    }
}

std::size_t AnnotationSet::category_index(const Label& label) const {
    auto it = std::find(universe_.begin(), universe_.end(), label);
    if (it == universe_.end()) throw LookupError("label outside universe: " + label.name);
    return static_cast<std::size_t>(it - universe_.begin());
}

void AnnotationSet::add(const std::string& item, const std::string& annotator, const Label& label) {
    if (std::find(universe_.begin(), universe_.end(), label) == universe_.end()) {
        throw IngestError("label '" + label.name + "' for item '" + item + "' is not in the label universe");
    }
    auto& list = items_[item];
    for (const auto& a : list) {
        if (a.annotator == annotator) {
            throw IngestError("annotator '" + annotator + "' labeled item '" + item + "' twice");
        }
    }
    list.push_back({annotator, label});
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t count_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing required key 'stats.") + key + "'");
    if (!it->is_number_unsigned()) {
        throw ParseError(std::string("'stats.") + key + "' must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

std::vector<std::string> string_array(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing required key '") + key + "'");
    if (!it->is_array()) throw ParseError(std::string("'") + key + "' must be an array");
    return it->get<std::vector<std::string>>();
}

VideoRecord video_from_json(const json& obj) {
    VideoRecord v;
    v.id = detail::required<std::string>(obj, "id");
    if (v.id.empty()) throw ParseError("'id' must be non-empty");
    v.title = detail::required<std::string>(obj, "title");
    v.description = detail::required<std::string>(obj, "description");
    v.tags = string_array(obj, "tags");
    v.transcript = detail::required<std::string>(obj, "transcript");
    v.comments = string_array(obj, "comments");
    for (const auto& c : v.comments) {
        if (c.empty()) throw ParseError("comments must be non-empty text");
    }
    auto st = obj.find("stats");
    if (st == obj.end() || !st->is_object()) throw ParseError("missing required object 'stats'");
    v.stats.views = count_field(*st, "views");
    v.stats.likes = count_field(*st, "likes");
    v.stats.dislikes = count_field(*st, "dislikes");
    v.stats.comment_count = count_field(*st, "comment_count");
    if (auto pm = obj.find("published_month"); pm != obj.end() && !pm->is_null()) {
        v.published_month = YearMonth::parse(pm->get<std::string>());
    }
    return v;
}

}  // namespace

VideoRecord parse_video_line(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
        if (!obj.is_object()) throw ParseError("expected a JSON object");
        return video_from_json(obj);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

std::vector<VideoRecord> parse_videos(std::istream& in) {
    std::vector<VideoRecord> out;
    std::unordered_set<std::string> ids;
    detail::for_each_json_line(in, "videos", [&](const json& obj, std::size_t) {
        auto v = video_from_json(obj);
        if (!ids.insert(v.id).second) throw IngestError("duplicate video id '" + v.id + "'");
        out.push_back(std::move(v));
    });
    return out;
}

std::vector<VideoRecord> ingest_videos(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    try {
        return parse_videos(in);
    } catch (const ParseError& e) {
        // re-prefix with the real file name
        std::string msg = e.what();
        if (msg.rfind("videos:", 0) == 0) msg = path.string() + msg.substr(6);
        throw ParseError(msg);
    } catch (const IngestError& e) {
        throw IngestError(path.string() + ": " + e.what());
    }
}

std::string serialize_video(const VideoRecord& v) {
    json obj = json::object();
    obj["id"] = v.id;
    obj["title"] = v.title;
    obj["description"] = v.description;
    obj["tags"] = v.tags;
    obj["transcript"] = v.transcript;
    obj["comments"] = v.comments;
    obj["stats"] = {{"views", v.stats.views},
                    {"likes", v.stats.likes},
                    {"dislikes", v.stats.dislikes},
                    {"comment_count", v.stats.comment_count}};
    if (v.published_month) obj["published_month"] = v.published_month->to_string();
    return obj.dump();
}

void write_videos(std::ostream& out, std::span<const VideoRecord> videos) {
    for (const auto& v : videos) out << serialize_video(v) << '\n';
}

AnnotationSet load_annotations(const std::filesystem::path& path, std::vector<Label> universe) {
    struct Row {
        std::string item, annotator;
        Label label;
    };
    std::vector<Row> rows;
    auto in = detail::open_input(path);
    detail::for_each_json_line(in, path.string(), [&](const json& obj, std::size_t) {
        rows.push_back({detail::required<std::string>(obj, "item_id"),
                        detail::required<std::string>(obj, "annotator_id"),
                        Label(detail::required<std::string>(obj, "label"))});
    });
    if (universe.empty()) {
        for (const auto& r : rows) {
            if (std::find(universe.begin(), universe.end(), r.label) == universe.end()) universe.push_back(r.label);
        }
    }
    AnnotationSet set(std::move(universe));
    for (const auto& r : rows) set.add(r.item, r.annotator, r.label);
    return set;
}

std::vector<CommentEvent> load_comment_events(const std::filesystem::path& path) {
    std::vector<CommentEvent> out;
    auto in = detail::open_input(path);
    detail::for_each_json_line(in, path.string(), [&](const json& obj, std::size_t) {
        out.push_back({detail::required<std::string>(obj, "user"),
                       YearMonth::parse(detail::required<std::string>(obj, "month")),
                       detail::required<std::string>(obj, "video_id")});
    });
    return out;
}

// ---------------------------------------------------------------------------

std::optional<Label> majority_label(const AnnotationSet& annotations, const std::string& item) {
    auto it = annotations.items().find(item);
    if (it == annotations.items().end()) throw LookupError("no annotations for item '" + item + "'");
    const auto& list = it->second;
    if (list.empty()) throw ContractError("item '" + item + "' has no annotations");

    std::map<Label, std::size_t> votes;
    for (const auto& a : list) ++votes[a.label];
    std::size_t best = 0;
    std::size_t at_best = 0;
    const Label* winner = nullptr;
    for (const auto& [label, n] : votes) {
        if (n > best) {
            best = n;
            at_best = 1;
            winner = &label;
        } else if (n == best) {
            ++at_best;
        }
    }
    if (at_best != 1) return std::nullopt;
    return *winner;
}

namespace {

std::vector<MonthValue> fill_range(const std::map<YearMonth, double>& values) {
    std::vector<MonthValue> out;
    if (values.empty()) return out;
    const YearMonth last = values.rbegin()->first;
    for (YearMonth m = values.begin()->first; m <= last; m = m.next()) {
        auto it = values.find(m);
        out.push_back({m, it == values.end() ? 0.0 : it->second});
    }
    return out;
}

}  // namespace

std::vector<MonthValue> temporal_counts(std::span<const CommentEvent> events, bool normalize_by_active_users) {
    std::map<YearMonth, std::size_t> counts;
    std::map<YearMonth, std::set<std::string>> users;
    for (const auto& e : events) {
        ++counts[e.month];
        if (normalize_by_active_users) users[e.month].insert(e.user);
    }
    std::map<YearMonth, double> values;
    for (const auto& [m, n] : counts) {
        double v = static_cast<double>(n);
        if (normalize_by_active_users) v /= static_cast<double>(users[m].size());
        values[m] = v;
    }
    return fill_range(values);
}

std::vector<MonthValue> temporal_counts(std::span<const VideoRecord> videos) {
    std::map<YearMonth, double> values;
    for (const auto& v : videos) {
        if (!v.published_month) throw ContractError("video '" + v.id + "' has no published_month");
        values[*v.published_month] += 1.0;
    }
    return fill_range(values);
}

}  // namespace recaudit
