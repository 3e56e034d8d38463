#include "textflow/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace textflow {

MatchResult match_boxes(const std::vector<ScoredBox>& preds, const std::vector<AABox>& gts,
                        double iou_threshold) {
    std::vector<size_t> order(preds.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
        return preds[a].id < preds[b].id;
    });

    MatchResult result;
    std::vector<char> gt_claimed(gts.size(), 0);
    for (size_t pi : order) {
        int best_gt = -1;
        double best_iou = 0.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_claimed[g]) continue;
            const double v = iou(preds[pi].box, gts[g]);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            gt_claimed[best_gt] = 1;
            result.matches.emplace_back(preds[pi].id, best_gt);
        } else {
            result.unmatched_pred_ids.push_back(preds[pi].id);
        }
    }
    for (size_t g = 0; g < gts.size(); ++g)
        if (!gt_claimed[g]) result.unmatched_gt_indices.push_back(static_cast<int>(g));
    return result;
}

PRF prf_from_counts(size_t matched, size_t n_preds, size_t n_gts) {
    PRF out;
    out.precision = n_preds > 0 ? static_cast<double>(matched) / n_preds : 0.0;
    out.recall = n_gts > 0 ? static_cast<double>(matched) / n_gts : 0.0;
    const double pr = out.precision + out.recall;
    out.f_measure = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
    return out;
}

PRF prf(const MatchResult& m) {
    const size_t matched = m.matches.size();
    return prf_from_counts(matched, matched + m.unmatched_pred_ids.size(),
                           matched + m.unmatched_gt_indices.size());
}

std::string eval_to_csv(const std::vector<EvalRow>& rows, const PRF& aggregate) {
    std::string out = "scene,precision,recall,f_measure\n";
    char buf[160];
    for (const EvalRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", r.scene.c_str(), r.prf.precision,
                      r.prf.recall, r.prf.f_measure);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "aggregate,%.6f,%.6f,%.6f\n", aggregate.precision,
                  aggregate.recall, aggregate.f_measure);
    out += buf;
    return out;
}

}  // namespace textflow
