// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recaudit {

/// Calendar month, serialized as ISO "YYYY-MM".
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    static YearMonth parse(std::string_view text);
    std::string to_string() const;
    YearMonth next() const;
    YearMonth prev() const;

    auto operator<=>(const YearMonth&) const = default;
};

/// A class name drawn from a configured label universe.
struct Label {
    std::string name;

    Label() = default;
    explicit Label(std::string n) : name(std::move(n)) {}

    auto operator<=>(const Label&) const = default;
};

struct ViewStats {
    std::uint64_t views = 0;
    std::uint64_t likes = 0;
    std::uint64_t dislikes = 0;
    std::uint64_t comment_count = 0;

    bool operator==(const ViewStats&) const = default;
};

struct VideoRecord {
    std::string id;
    std::string title;
    std::string description;
    std::vector<std::string> tags;
    std::string transcript;             // empty when the video has none
    std::vector<std::string> comments;  // top comments, in collection order
    ViewStats stats;
    std::optional<YearMonth> published_month;

    bool operator==(const VideoRecord&) const = default;
};

struct CommentEvent {
    std::string user;
    YearMonth month;
    std::string video_id;

    bool operator==(const CommentEvent&) const = default;
};

struct Annotation {
    std::string annotator;
    Label label;
};

/// Multi-annotator label matrix. Items are kept sorted by id.
class AnnotationSet {
public:
    explicit AnnotationSet(std::vector<Label> universe);

    /// Throws IngestError when the label is outside the universe or the
    /// (item, annotator) pair was already recorded.
    void add(const std::string& item, const std::string& annotator, const Label& label);

    const std::vector<Label>& universe() const noexcept { return universe_; }
    const std::map<std::string, std::vector<Annotation>>& items() const noexcept { return items_; }
    bool contains(const std::string& item) const { return items_.contains(item); }
    std::size_t category_index(const Label& label) const;

private:
    std::vector<Label> universe_;
    std::map<std::string, std::vector<Annotation>> items_;
};

struct MonthValue {
    YearMonth month;
    double value = 0.0;

    bool operator==(const MonthValue&) const = default;
};

// ---- line-delimited JSON records ----

std::vector<VideoRecord> ingest_videos(const std::filesystem::path& path);
std::vector<VideoRecord> parse_videos(std::istream& in);
VideoRecord parse_video_line(std::string_view line);
std::string serialize_video(const VideoRecord& video);
void write_videos(std::ostream& out, std::span<const VideoRecord> videos);

/// When `universe` is empty it is taken from the labels in order of first appearance.
AnnotationSet load_annotations(const std::filesystem::path& path, std::vector<Label> universe = {});
std::vector<CommentEvent> load_comment_events(const std::filesystem::path& path);

// ---- annotation merging and temporal aggregation ----

/// Strict plurality winner; std::nullopt means undecided (tie at the top).
std::optional<Label> majority_label(const AnnotationSet& annotations, const std::string& item);

/// Per-month event counts over the full spanned month range. With
/// `normalize_by_active_users`, each count is divided by the number of
/// distinct users that generated events in that month.
std::vector<MonthValue> temporal_counts(std::span<const CommentEvent> events,
                                        bool normalize_by_active_users);

/// Publication counts per month. Every record must carry a published month.
std::vector<MonthValue> temporal_counts(std::span<const VideoRecord> videos);

}  // namespace recaudit
