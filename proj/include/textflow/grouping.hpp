#pragma once

#include <string>
#include <vector>

#include "textflow/geom.hpp"
#include "textflow/ingest.hpp"

namespace textflow {

/// A node of the grouping graph: two nearby characters in reading order.
struct PairNode {
    int left_char_id = 0;
    int right_char_id = 0;
    double unary_cost = 0.0;
    Point midpoint;
    Point direction;     // unit vector, left -> right
    double chain_coord = 0.0;  // reading-order coordinate, see extract_groups

    bool shares_char(const PairNode& other) const;
};

struct GroupingParams {
    double alpha = 1.0;            // score term weight in the unary cost
    double beta = 1.0;             // distance term weight (distances normalized)
    double entry_exit_cost = 0.4;  // per path end
    double score_floor = 0.5;
    int k = 4;
    bool literal_cos_pairwise = false;  // cos(theta) instead of 1 - cos(theta)
};

/// One extracted text line: the character chain and its path cost.
struct LineGroup {
    std::vector<int> char_ids;  // chain order
    std::vector<int> node_indices;
    double total_cost = 0.0;
};

struct GroupingResult {
    std::vector<PairNode> nodes;
    std::vector<LineGroup> groups;
    std::vector<int> singleton_char_ids;  // admitted chars left ungrouped
};

/// k-NN pairs under the combined metric (center distance plus diagonal
/// difference), oriented into reading order, with Eq.-style unary costs.
/// Input chars must already be filtered by score_floor.
std::vector<PairNode> build_pair_nodes(const std::vector<CharCandidate>& chars,
                                       const GroupingParams& params);

/// Angle cost between two pair nodes sharing exactly one character.
/// Throws std::invalid_argument for non-adjacent pairs.
double pairwise_cost(const PairNode& m, const PairNode& n,
                     const GroupingParams& params = GroupingParams{});

/// Greedy min-cost flow: repeatedly extract the cheapest source->sink path
/// over unused pair nodes while its total cost is negative.
GroupingResult extract_groups(const std::vector<CharCandidate>& chars,
                              const GroupingParams& params);

std::string groups_to_json(const GroupingResult& result);

}  // namespace textflow
