#pragma once

#include <cmath>
#include <filesystem>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcprop/error.hpp"
#include "mcprop/geometry.hpp"
#include "mcprop/io.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

enum class Label { Mitosis, NonMitosis, Unclassifiable };

inline const char* to_token(Label l) {
    switch (l) {
        case Label::Mitosis: return "mitosis";
        case Label::NonMitosis: return "nonmitosis";
        case Label::Unclassifiable: return "unclassifiable";
    }
    return "?";
}

inline bool label_from_token(const std::string& tok, Label& out) {
    if (tok == "mitosis") out = Label::Mitosis;
    else if (tok == "nonmitosis") out = Label::NonMitosis;
    else if (tok == "unclassifiable") out = Label::Unclassifiable;
    else return false;
    return true;
}

// One point annotation with the class assigned by each observer.
struct Annotation {
    int x_px = 0;
    int y_px = 0;
    Label obs1 = Label::Mitosis;
    Label obs2 = Label::Mitosis;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Annotations of one slide, or of a horizontal band of one after a
// vertical split. The owned region is rows [region_y0, region_y0+height_px);
// a freshly parsed set has region_y0 == 0.
struct AnnotationSet {
    std::string slide_id;
    int width_px = 0;
    int height_px = 0;
    int region_y0 = 0;
    std::vector<Annotation> items;

    void validate() const {
        if (width_px < 1 || height_px < 1)
            throw DomainError("annotation set dimensions must be positive");
        for (const Annotation& a : items) {
            if (a.x_px < 0 || a.x_px >= width_px || a.y_px < region_y0 ||
                a.y_px >= region_y0 + height_px)
                throw DomainError("annotation out of region bounds");
        }
    }
};

// ------------------------------------------------------------------
// CSV interchange: header "x,y,obs1,obs2", labels from
// {mitosis,nonmitosis,unclassifiable}. Slide dimensions come from the
// sidecar metadata, not the CSV itself.

inline AnnotationSet parse_annotations_text(const std::string& text, int width_px,
                                            int height_px,
                                            std::string slide_id = "") {
    AnnotationSet set;
    set.slide_id = std::move(slide_id);
    set.width_px = width_px;
    set.height_px = height_px;
    if (width_px < 1 || height_px < 1)
        throw DomainError("annotation set dimensions must be positive");

    std::istringstream in(text);
    std::string line;
    int row = 0;
    std::set<std::pair<int, int>> seen;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row == 1) {
            if (line != "x,y,obs1,obs2")
                throw FormatError("annotation CSV row 1: expected header \"x,y,obs1,obs2\"");
            continue;
        }
        if (line.empty() && in.eof()) break;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        const std::string where = "annotation CSV row " + std::to_string(row);
        if (fields.size() != 4)
            throw FormatError(where + ": expected 4 fields, got " +
                              std::to_string(fields.size()));

        Annotation a;
        int x = 0, y = 0;
        if (!detail::parse_header_int(fields[0], x))
            throw FormatError(where + ": invalid x \"" + fields[0] + "\"");
        if (!detail::parse_header_int(fields[1], y))
            throw FormatError(where + ": invalid y \"" + fields[1] + "\"");
        if (x >= width_px || y >= height_px)
            throw FormatError(where + ": coordinate (" + std::to_string(x) + "," +
                              std::to_string(y) + ") outside slide bounds");
        if (!label_from_token(fields[2], a.obs1))
            throw FormatError(where + ": unknown label \"" + fields[2] + "\"");
        if (!label_from_token(fields[3], a.obs2))
            throw FormatError(where + ": unknown label \"" + fields[3] + "\"");
        if (!seen.insert({x, y}).second)
            throw FormatError(where + ": duplicate coordinate (" + std::to_string(x) +
                              "," + std::to_string(y) + ")");
        a.x_px = x;
        a.y_px = y;
        set.items.push_back(a);
    }
    if (row == 0) throw FormatError("annotation CSV is empty (missing header)");
    return set;
}

inline AnnotationSet parse_annotations(const std::filesystem::path& path,
                                       int width_px, int height_px) {
    return parse_annotations_text(read_file(path), width_px, height_px,
                                  path.stem().string());
}

inline std::string write_annotations_text(const AnnotationSet& set) {
    std::string out = "x,y,obs1,obs2\n";
    for (const Annotation& a : set.items) {
        out += std::to_string(a.x_px);
        out += ',';
        out += std::to_string(a.y_px);
        out += ',';
        out += to_token(a.obs1);
        out += ',';
        out += to_token(a.obs2);
        out += '\n';
    }
    return out;
}

inline void write_annotations(const AnnotationSet& set,
                              const std::filesystem::path& path) {
    write_file_atomic(path, write_annotations_text(set));
}

// ------------------------------------------------------------------
// Behavioral views over an annotation set.

// Points both observers agreed to be mitotic figures; input order preserved.
inline std::vector<Point> agreed_mitoses(const AnnotationSet& set) {
    std::vector<Point> out;
    for (const Annotation& a : set.items) {
        if (a.obs1 == Label::Mitosis && a.obs2 == Label::Mitosis)
            out.push_back({a.x_px, a.y_px});
    }
    return out;
}

// Points where the observers disagreed, or both marked unclassifiable.
inline std::vector<Point> hard_negative_candidates(const AnnotationSet& set) {
    std::vector<Point> out;
    for (const Annotation& a : set.items) {
        const bool disagree = a.obs1 != a.obs2;
        const bool both_unclassifiable = a.obs1 == Label::Unclassifiable &&
                                         a.obs2 == Label::Unclassifiable;
        if (disagree || both_unclassifiable) out.push_back({a.x_px, a.y_px});
    }
    return out;
}

// Number of points inside the half-open window [x, x+w) x [y, y+h).
inline std::int64_t window_count(std::span<const Point> points, Point origin,
                                 WindowSize size) {
    if (size.width_px < 1 || size.height_px < 1)
        throw DomainError("window_count: window must be positive");
    std::int64_t n = 0;
    for (const Point& p : points) {
        if (p.x >= origin.x && p.x < origin.x + size.width_px && p.y >= origin.y &&
            p.y < origin.y + size.height_px)
            ++n;
    }
    return n;
}

enum class SplitSide { Bottom, Top };

// Split the owned region into a training band and a validation band of
// validation_fraction of the rows. Bottom: validation is the largest-y band.
// Coordinates stay absolute; each half carries its own region_y0 and height.
inline std::pair<AnnotationSet, AnnotationSet> vertical_split(
    const AnnotationSet& set, double validation_fraction,
    SplitSide side = SplitSide::Bottom) {
    set.validate();
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw DomainError("validation_fraction must be in (0,1)");

    const int h = set.height_px;
    const int train_rows =
        static_cast<int>(std::floor(h * (1.0 - validation_fraction)));
    const int val_rows = h - train_rows;
    // boundary between the two bands, in absolute y
    const int cut = side == SplitSide::Bottom ? set.region_y0 + train_rows
                                              : set.region_y0 + val_rows;

    AnnotationSet train = set;
    AnnotationSet val = set;
    train.items.clear();
    val.items.clear();
    if (side == SplitSide::Bottom) {
        train.region_y0 = set.region_y0;
        train.height_px = train_rows;
        val.region_y0 = cut;
        val.height_px = val_rows;
    } else {
        val.region_y0 = set.region_y0;
        val.height_px = val_rows;
        train.region_y0 = cut;
        train.height_px = train_rows;
    }
    for (const Annotation& a : set.items) {
        const bool in_second_band = a.y_px >= cut;
        const bool to_val = (side == SplitSide::Bottom) == in_second_band;
        (to_val ? val : train).items.push_back(a);
    }
    return {std::move(train), std::move(val)};
}

} // namespace mcprop
