#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "textflow/geom.hpp"

namespace textflow {

/// Candidate character detection. `score` is the text/non-text probability,
/// `src` records provenance for synthetic scenes (ground-truth char index,
/// -1 for distractors, absent for real data).
struct CharCandidate {
    AABox box;
    double score = 0.0;
    int id = 0;
    std::vector<double> features;  // latent channels, synthetic scenes only
    std::optional<int> src;

    Point center() const { return box.center(); }
    double diagonal() const { return box.diagonal(); }
};

/// Word-level ground truth: an axis-aligned box or a tight quadrangle,
/// optionally with the character count and transcription.
struct WordAnnotation {
    std::variant<AABox, Quad> region;
    std::optional<int> char_count;
    std::optional<std::string> transcription;

    bool is_quad() const { return std::holds_alternative<Quad>(region); }
    const AABox& box() const { return std::get<AABox>(region); }
    const Quad& quad() const { return std::get<Quad>(region); }
    AABox bounds() const { return is_quad() ? quad().bounds() : box(); }
    double area() const { return is_quad() ? quad().area() : box().area(); }
    bool contains(Point p) const {
        return is_quad() ? point_in_quad(quad(), p) : box().contains(p);
    }
};

/// One ground-truth text line of a synthetic scene, as indices into gt_chars.
struct LineTruth {
    std::vector<int> char_indices;
};

struct Scene {
    std::optional<std::string> image_path;
    std::vector<CharCandidate> candidates;
    std::vector<WordAnnotation> words;
    std::vector<AABox> gt_chars;       // synthetic scenes only
    std::vector<LineTruth> gt_lines;   // synthetic scenes only
};

Scene parse_scene(const std::string& text);
Scene load_scene(const std::string& path);
std::string serialize_scene(const Scene& scene);

/// Reference character diagonals with the positive size band.
struct AnchorSpec {
    std::vector<double> diagonals = {24.0, 16.0, 12.0};
    double band_low = 0.7;
    double band_high = 1.4;
};

constexpr int kUnmatchedAnchor = -1;

/// For each char, the index of the matched anchor or kUnmatchedAnchor.
/// A char matches anchor a iff diag(char)/diag(a) is in [low, high); among
/// multiple matches the smallest |log ratio| wins.
std::vector<int> assign_anchor_labels(const std::vector<AABox>& gt_chars,
                                      const AnchorSpec& anchors);

}  // namespace textflow
