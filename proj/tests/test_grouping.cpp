#include "textflow/grouping.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"

using namespace textflow;
using tftest::TestRng;
using tftest::cand;
using tftest::straight_line_chars;

namespace {

/// Unordered pair set a brute-force k-NN under the combined metric
/// (center distance + diagonal difference) would produce.
std::set<std::pair<int, int>> combined_knn_oracle(const std::vector<CharCandidate>& chars,
                                                  int k) {
    std::set<std::pair<int, int>> pairs;
    for (size_t i = 0; i < chars.size(); ++i) {
        std::vector<std::pair<double, int>> d;
        for (size_t j = 0; j < chars.size(); ++j) {
            if (i == j) continue;
            d.push_back({distance(chars[i].center(), chars[j].center()) +
                             std::abs(chars[i].diagonal() - chars[j].diagonal()),
                         chars[j].id});
        }
        std::sort(d.begin(), d.end());
        for (int t = 0; t < std::min<int>(k, d.size()); ++t)
            pairs.insert({std::min(chars[i].id, d[t].second), std::max(chars[i].id, d[t].second)});
    }
    return pairs;
}

/// Two dense crossing lines, no shared char; returns chars and per-line ids.
struct CrossingScene {
    std::vector<CharCandidate> chars;
    std::set<int> line_a_ids;
    std::set<int> line_b_ids;
};

CrossingScene crossing_scene(double angle_a_rad, double crossing_rad) {
    CrossingScene out;
    const Point center{100, 100};
    auto add_line = [&](double angle, double phase, std::set<int>& ids) {
        const Point dir{std::cos(angle), std::sin(angle)};
        for (int i = 0; i < 9; ++i) {
            const double t = (i - 4) * 9.0 + phase;
            const int id = static_cast<int>(out.chars.size());
            out.chars.push_back(cand(id, center + t * dir, 8, 11, 0.95));
            ids.insert(id);
        }
    };
    add_line(angle_a_rad, 0.0, out.line_a_ids);
    add_line(angle_a_rad + crossing_rad, 4.5, out.line_b_ids);
    return out;
}

std::vector<std::set<int>> group_id_sets(const GroupingResult& r) {
    std::vector<std::set<int>> sets;
    for (const LineGroup& g : r.groups)
        sets.push_back(std::set<int>(g.char_ids.begin(), g.char_ids.end()));
    std::sort(sets.begin(), sets.end());
    return sets;
}

}  // namespace

TEST_CASE("build_pair_nodes: unary cost at unit normalized distance is zero") {
    // 6 x 8 boxes have diagonal 10; centers 10 apart -> d_norm = 1.
    const std::vector<CharCandidate> chars = {cand(0, {0, 0}, 6, 8, 1.0),
                                              cand(1, {10, 0}, 6, 8, 1.0)};
    const auto nodes = build_pair_nodes(chars, GroupingParams{});
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].unary_cost == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(nodes[0].left_char_id == 0);
    CHECK(nodes[0].right_char_id == 1);
    CHECK(nodes[0].direction.x == doctest::Approx(1.0));
    CHECK(nodes[0].midpoint.x == doctest::Approx(5.0));
}

TEST_CASE("build_pair_nodes: single char has no pairs") {
    CHECK(build_pair_nodes({cand(0, {5, 5}, 4, 4, 0.9)}, GroupingParams{}).empty());
    CHECK(build_pair_nodes({}, GroupingParams{}).empty());
}

TEST_CASE("build_pair_nodes: pair set equals brute-force combined k-NN") {
    TestRng rng(61);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<CharCandidate> chars;
        // Two loose rows of varying char sizes.
        int id = 0;
        for (int row = 0; row < 2; ++row)
            for (int i = 0; i < 4; ++i)
                chars.push_back(cand(id++, {10.0 + 12 * i + rng.uniform(-2, 2),
                                            20.0 + 30 * row + rng.uniform(-2, 2)},
                                     rng.uniform(4, 10), rng.uniform(6, 12),
                                     rng.uniform(0.5, 1.0)));
        GroupingParams params;
        params.k = rng.uniform_int(1, 4);
        const auto nodes = build_pair_nodes(chars, params);
        std::set<std::pair<int, int>> got;
        for (const PairNode& n : nodes)
            got.insert({std::min(n.left_char_id, n.right_char_id),
                        std::max(n.left_char_id, n.right_char_id)});
        CHECK(got == combined_knn_oracle(chars, params.k));
    }
}

TEST_CASE("pairwise_cost: aligned, perpendicular, 60 degrees") {
    PairNode m, n;
    m.left_char_id = 0;
    m.right_char_id = 1;
    n.left_char_id = 1;
    n.right_char_id = 2;
    m.direction = {1, 0};
    n.direction = {1, 0};
    CHECK(pairwise_cost(m, n) == doctest::Approx(0.0));
    n.direction = {0, 1};
    CHECK(pairwise_cost(m, n) == doctest::Approx(1.0));
    n.direction = {0.5, std::sqrt(3.0) / 2.0};
    CHECK(pairwise_cost(m, n) == doctest::Approx(0.5));
    GroupingParams literal;
    literal.literal_cos_pairwise = true;
    CHECK(pairwise_cost(m, n, literal) == doctest::Approx(0.5));
}

TEST_CASE("pairwise_cost: non-adjacent pairs are an error") {
    PairNode m, n;
    m.left_char_id = 0;
    m.right_char_id = 1;
    n.left_char_id = 2;
    n.right_char_id = 3;
    m.direction = n.direction = {1, 0};
    CHECK_THROWS_AS(pairwise_cost(m, n), std::invalid_argument);
    // Sharing both chars is not adjacency either.
    n = m;
    CHECK_THROWS_AS(pairwise_cost(m, n), std::invalid_argument);
}

TEST_CASE("extract_groups: five collinear high-score chars form one ordered group") {
    const auto chars = straight_line_chars({10, 10}, 0.0, 5, 16.0, 20, 20, 1.0);
    const GroupingResult r = extract_groups(chars, GroupingParams{});
    REQUIRE(r.groups.size() == 1);
    CHECK(r.groups[0].char_ids == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(r.groups[0].total_cost < 0.0);
    CHECK(r.singleton_char_ids.empty());
}

TEST_CASE("extract_groups: all scores below the floor give zero groups") {
    const auto chars = straight_line_chars({10, 10}, 0.0, 5, 16.0, 20, 20, 0.4);
    const GroupingResult r = extract_groups(chars, GroupingParams{});
    CHECK(r.groups.empty());
    CHECK(r.singleton_char_ids.empty());  // not admitted at all
}

TEST_CASE("extract_groups: perpendicular crossing lines stay separate") {
    const CrossingScene scene = crossing_scene(0.0, 3.14159265358979323846 / 2.0);
    const GroupingResult r = extract_groups(scene.chars, GroupingParams{});
    REQUIRE(r.groups.size() == 2);
    for (const LineGroup& g : r.groups) {
        const std::set<int> ids(g.char_ids.begin(), g.char_ids.end());
        const bool pure_a =
            std::includes(scene.line_a_ids.begin(), scene.line_a_ids.end(), ids.begin(), ids.end());
        const bool pure_b =
            std::includes(scene.line_b_ids.begin(), scene.line_b_ids.end(), ids.begin(), ids.end());
        CHECK((pure_a || pure_b));
        CHECK(g.char_ids.size() == 9);
    }
}

TEST_CASE("extract_groups: each char in at most one group; costs negative") {
    TestRng rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CharCandidate> chars;
        int id = 0;
        const int n_lines = rng.uniform_int(1, 3);
        for (int l = 0; l < n_lines; ++l) {
            const double angle = rng.uniform(-0.4, 0.4);
            const int n = rng.uniform_int(3, 8);
            const auto line = straight_line_chars({rng.uniform(0, 40), 30.0 + 45.0 * l}, angle, n,
                                                  14.0, 9, 13, rng.uniform(0.7, 1.0), id);
            id += n;
            chars.insert(chars.end(), line.begin(), line.end());
        }
        for (int d = 0; d < 3; ++d)
            chars.push_back(cand(id++, {rng.uniform(0, 200), rng.uniform(0, 160)}, 9, 13,
                                 rng.uniform(0.0, 1.0)));

        const GroupingResult r = extract_groups(chars, GroupingParams{});
        std::set<int> seen;
        for (const LineGroup& g : r.groups) {
            CHECK(g.total_cost < 0.0);
            CHECK(g.char_ids.size() == g.node_indices.size() + 1);
            for (int cid : g.char_ids) CHECK(seen.insert(cid).second);
            // Consecutive chars share an actual pair node.
            for (size_t i = 0; i < g.node_indices.size(); ++i) {
                const PairNode& n = r.nodes[g.node_indices[i]];
                CHECK(n.left_char_id == g.char_ids[i]);
                CHECK(n.right_char_id == g.char_ids[i + 1]);
            }
        }
        for (int sid : r.singleton_char_ids) CHECK(!seen.count(sid));
    }
}

TEST_CASE("extract_groups: memberships invariant under translation and rotation") {
    TestRng rng(81);
    for (int trial = 0; trial < 15; ++trial) {
        const double cross = rng.uniform(1.0, 1.57);
        const CrossingScene scene = crossing_scene(rng.uniform(-0.3, 0.3), cross);
        const GroupingResult base = extract_groups(scene.chars, GroupingParams{});

        const double theta = 37.0 * 3.14159265358979323846 / 180.0;
        const double tx = rng.uniform(-30, 30), ty = rng.uniform(-30, 30);
        std::vector<CharCandidate> moved = scene.chars;
        for (CharCandidate& c : moved) {
            const Point p = c.center();
            const Point q{p.x * std::cos(theta) - p.y * std::sin(theta) + tx,
                          p.x * std::sin(theta) + p.y * std::cos(theta) + ty};
            const double w = c.box.width(), h = c.box.height();
            c.box = {q.x - w / 2, q.y - h / 2, q.x + w / 2, q.y + h / 2};
        }
        const GroupingResult rotated = extract_groups(moved, GroupingParams{});
        CHECK(group_id_sets(base) == group_id_sets(rotated));
        CHECK(base.singleton_char_ids == rotated.singleton_char_ids);
    }
}
