#pragma once

#include <string>
#include <vector>

#include "textflow/geom.hpp"

namespace textflow {

/// One-to-one greedy matching at an IoU threshold (VOC convention).
struct MatchResult {
    std::vector<std::pair<int, int>> matches;  // (pred id, gt index)
    std::vector<int> unmatched_pred_ids;
    std::vector<int> unmatched_gt_indices;
};

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

/// Predictions claim gts in descending score order (ties: lower id first);
/// each takes the unclaimed gt of highest IoU >= threshold.
MatchResult match_boxes(const std::vector<ScoredBox>& preds, const std::vector<AABox>& gts,
                        double iou_threshold);

PRF prf(const MatchResult& m);
PRF prf_from_counts(size_t matched, size_t n_preds, size_t n_gts);

struct EvalRow {
    std::string scene;
    PRF prf;
};

/// CSV report with one row per scene plus a pooled aggregate row.
std::string eval_to_csv(const std::vector<EvalRow>& rows, const PRF& aggregate);

}  // namespace textflow
