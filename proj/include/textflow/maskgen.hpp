#pragma once

#include <string>
#include <vector>

#include "textflow/geom.hpp"
#include "textflow/ingest.hpp"

namespace textflow {

struct MaskScoreParams {
    double w = 0.5;                  // balance between coverage and collinearity
    double count_term_weight = 0.25; // applied only when the word has char_count
    int knn_k = 4;
    double score_floor = 0.1;        // candidate admission threshold
};

struct MaskScore {
    double s = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
};

/// Selected candidate subset for one word.
struct CharMask {
    int word_index = 0;
    std::vector<int> selected_ids;  // ascending
    double s = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    bool empty() const { return selected_ids.empty(); }
};

struct GraphEdge {
    int a = 0;  // candidate ids, a < b
    int b = 0;
    double weight = 0.0;
    double dist = 0.0;
};

/// k-NN graph over candidate centers. Edge weight is
/// exp(-d/dbar) * (t_a + t_b) with dbar the mean k-NN distance.
struct CharGraph {
    std::vector<int> nodes;         // candidate ids, ascending
    std::vector<GraphEdge> edges;   // sorted by (a, b)
    double mean_knn_dist = 0.0;
};

/// Coverage (s1) + collinearity (s2) score of a selection against a word.
/// Throws std::invalid_argument on an empty selection.
MaskScore mask_score(const std::vector<CharCandidate>& selection, const WordAnnotation& anno,
                     const MaskScoreParams& params);

CharGraph build_char_graph(const std::vector<CharCandidate>& cands, int k);

/// Maximum-weight spanning tree per connected component (Kruskal).
/// Tie-break: higher weight first, then smaller (a, b).
std::vector<GraphEdge> maximum_spanning_tree(const CharGraph& graph);

/// Recursive single-edge-removal search: keep the higher-scoring side of the
/// best split while the score rises. Returns the final selection.
CharMask greedy_partition(const std::vector<GraphEdge>& tree,
                          const std::vector<CharCandidate>& cands, const WordAnnotation& anno,
                          const MaskScoreParams& params);

/// The per-word loss weight: the mask's selection score (0 for empty masks).
double loss_weight(const CharMask& mask);

/// Full per-word mask generation over a parsed scene.
std::vector<CharMask> generate_masks(const Scene& scene, const MaskScoreParams& params);

std::string masks_to_json(const std::vector<CharMask>& masks);

// Geometry helpers for the quadrangle coverage variant. Exposed for tests.
std::vector<Point> convex_hull(std::vector<Point> pts);
Quad min_area_rect(const std::vector<Point>& pts);
double convex_intersection_area(const std::vector<Point>& subject,
                                const std::vector<Point>& clip);

}  // namespace textflow
