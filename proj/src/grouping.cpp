#include "textflow/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace textflow {

bool PairNode::shares_char(const PairNode& other) const {
    int shared = 0;
    if (left_char_id == other.left_char_id || left_char_id == other.right_char_id) ++shared;
    if (right_char_id == other.left_char_id || right_char_id == other.right_char_id) ++shared;
    return shared == 1;
}

namespace {

Point unit_or_default(Point d) {
    const double len = norm(d);
    if (len < 1e-12) return {1.0, 0.0};
    return {d.x / len, d.y / len};
}

/// Principal axis of the pair displacement directions (sign-free second
/// moment), used only to seed the orientation propagation.
Point dominant_direction(const std::vector<Point>& dirs) {
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (const Point& d : dirs) {
        mxx += d.x * d.x;
        myy += d.y * d.y;
        mxy += d.x * d.y;
    }
    const double angle = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
    Point u{std::cos(angle), std::sin(angle)};
    if (u.x < 0.0 || (u.x == 0.0 && u.y < 0.0)) u = {-u.x, -u.y};
    return u;
}

}  // namespace

std::vector<PairNode> build_pair_nodes(const std::vector<CharCandidate>& chars,
                                       const GroupingParams& params) {
    const size_t n = chars.size();
    std::vector<PairNode> nodes;
    if (n < 2) return nodes;

    // k-NN pairs under center distance + diagonal difference.
    std::set<std::pair<int, int>> pair_ids;
    std::map<int, const CharCandidate*> by_id;
    for (const CharCandidate& c : chars) by_id[c.id] = &c;
    for (size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, size_t>> by_metric;
        by_metric.reserve(n - 1);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = distance(chars[i].center(), chars[j].center()) +
                             std::abs(chars[i].diagonal() - chars[j].diagonal());
            by_metric.emplace_back(d, j);
        }
        std::sort(by_metric.begin(), by_metric.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return chars[a.second].id < chars[b.second].id;
        });
        const size_t take = std::min<size_t>(std::max(params.k, 0), by_metric.size());
        for (size_t t = 0; t < take; ++t) {
            const int other = chars[by_metric[t].second].id;
            pair_ids.insert({std::min(chars[i].id, other), std::max(chars[i].id, other)});
        }
    }

    nodes.reserve(pair_ids.size());
    for (const auto& [lo, hi] : pair_ids) {
        const CharCandidate& a = *by_id.at(lo);
        const CharCandidate& b = *by_id.at(hi);
        PairNode node;
        node.left_char_id = lo;
        node.right_char_id = hi;
        node.midpoint = 0.5 * (a.center() + b.center());
        node.direction = unit_or_default(b.center() - a.center());
        const double mean_diag = 0.5 * (a.diagonal() + b.diagonal());
        const double d_norm =
            mean_diag > 0.0 ? distance(a.center(), b.center()) / mean_diag : 0.0;
        node.unary_cost = -params.alpha * 0.5 * (a.score + b.score) + params.beta * d_norm;
        nodes.push_back(node);
    }

    // Orient pairs into reading order. A single global axis cannot order
    // lines running perpendicular to it, so orientation is propagated over
    // the pair adjacency graph in maximum-alignment order (Prim-style over
    // |dot| of directions): a line's parallel pairs lock each other's
    // orientation before any weakly aligned junction pair contributes.
    // Each node receives a chain coordinate (accumulated midpoint
    // displacement along the parent direction), giving a total order that
    // is covariant under rigid motion. The dominant axis only seeds
    // components.
    std::vector<Point> dirs;
    dirs.reserve(nodes.size());
    for (const PairNode& p : nodes) dirs.push_back(p.direction);
    const Point u = dominant_direction(dirs);
    const Point u_perp{u.y, -u.x};

    std::vector<std::vector<size_t>> adj(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j)
            if (nodes[i].shares_char(nodes[j])) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }

    std::vector<char> visited(nodes.size(), 0);
    // (alignment, parent, child); largest alignment first, then indices.
    using Frontier = std::tuple<double, size_t, size_t>;
    auto frontier_less = [](const Frontier& a, const Frontier& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
        return std::get<2>(a) > std::get<2>(b);
    };
    for (size_t seed = 0; seed < nodes.size(); ++seed) {
        if (visited[seed]) continue;
        double along = dot(nodes[seed].direction, u);
        if (std::abs(along) < 1e-12) along = dot(nodes[seed].direction, u_perp);
        if (along < 0.0) {
            std::swap(nodes[seed].left_char_id, nodes[seed].right_char_id);
            nodes[seed].direction = {-nodes[seed].direction.x, -nodes[seed].direction.y};
        }
        nodes[seed].chain_coord = 0.0;
        visited[seed] = 1;
        std::priority_queue<Frontier, std::vector<Frontier>, decltype(frontier_less)> frontier(
            frontier_less);
        auto push_neighbors = [&](size_t at) {
            for (size_t next : adj[at])
                if (!visited[next])
                    frontier.push({std::abs(dot(nodes[next].direction, nodes[at].direction)), at,
                                   next});
        };
        push_neighbors(seed);
        while (!frontier.empty()) {
            const auto [alignment, at, next] = frontier.top();
            frontier.pop();
            if (visited[next]) continue;
            if (dot(nodes[next].direction, nodes[at].direction) < 0.0) {
                std::swap(nodes[next].left_char_id, nodes[next].right_char_id);
                nodes[next].direction = {-nodes[next].direction.x, -nodes[next].direction.y};
            }
            nodes[next].chain_coord =
                nodes[at].chain_coord +
                dot(nodes[next].midpoint - nodes[at].midpoint, nodes[at].direction);
            visited[next] = 1;
            push_neighbors(next);
        }
    }
    return nodes;
}

double pairwise_cost(const PairNode& m, const PairNode& n, const GroupingParams& params) {
    if (!m.shares_char(n))
        throw std::invalid_argument("pairwise_cost: pair nodes must share exactly one char");
    const double c = std::clamp(dot(m.direction, n.direction), -1.0, 1.0);
    return params.literal_cos_pairwise ? c : 1.0 - c;
}

GroupingResult extract_groups(const std::vector<CharCandidate>& chars,
                              const GroupingParams& params) {
    GroupingResult result;
    std::vector<CharCandidate> admitted;
    for (const CharCandidate& c : chars)
        if (c.score >= params.score_floor) admitted.push_back(c);

    result.nodes = build_pair_nodes(admitted, params);
    const std::vector<PairNode>& nodes = result.nodes;

    // Reading-order DAG: an edge m->n needs m.right == n.left and m before n
    // under the (chain_coord, index) total order, which makes it acyclic.
    std::vector<size_t> order(nodes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (nodes[a].chain_coord != nodes[b].chain_coord)
            return nodes[a].chain_coord < nodes[b].chain_coord;
        return a < b;
    });
    std::vector<size_t> rank(nodes.size());
    for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    std::vector<std::vector<size_t>> incoming(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        for (size_t j = 0; j < nodes.size(); ++j) {
            if (i == j || nodes[i].right_char_id != nodes[j].left_char_id) continue;
            if (!nodes[i].shares_char(nodes[j])) continue;
            if (rank[i] < rank[j]) incoming[j].push_back(i);
        }
    }

    std::set<int> used_chars;
    std::vector<char> node_used(nodes.size(), 0);
    const double inf = std::numeric_limits<double>::infinity();

    while (true) {
        std::vector<double> dp(nodes.size(), inf);
        std::vector<int> parent(nodes.size(), -1);
        for (size_t r = 0; r < order.size(); ++r) {
            const size_t at = order[r];
            if (node_used[at] || used_chars.count(nodes[at].left_char_id) ||
                used_chars.count(nodes[at].right_char_id))
                continue;
            double best = params.entry_exit_cost;  // start a new path here
            int best_parent = -1;
            for (size_t from : incoming[at]) {
                if (dp[from] == inf) continue;
                const double via = dp[from] + pairwise_cost(nodes[from], nodes[at], params);
                if (via < best) {
                    best = via;
                    best_parent = static_cast<int>(from);
                }
            }
            dp[at] = best + nodes[at].unary_cost;
            parent[at] = best_parent;
        }

        double best_total = inf;
        int best_end = -1;
        for (size_t r = 0; r < order.size(); ++r) {
            const size_t at = order[r];
            if (dp[at] == inf) continue;
            const double total = dp[at] + params.entry_exit_cost;
            if (total < best_total) {
                best_total = total;
                best_end = static_cast<int>(at);
            }
        }
        if (best_end < 0 || best_total >= 0.0) break;

        std::vector<int> path_nodes;
        for (int at = best_end; at >= 0; at = parent[at]) path_nodes.push_back(at);
        std::reverse(path_nodes.begin(), path_nodes.end());

        LineGroup group;
        group.total_cost = best_total;
        group.node_indices = path_nodes;
        group.char_ids.push_back(nodes[path_nodes.front()].left_char_id);
        for (int ni : path_nodes) group.char_ids.push_back(nodes[ni].right_char_id);
        for (int id : group.char_ids) used_chars.insert(id);
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (used_chars.count(nodes[i].left_char_id) ||
                used_chars.count(nodes[i].right_char_id))
                node_used[i] = 1;
        }
        result.groups.push_back(std::move(group));
    }

    for (const CharCandidate& c : admitted)
        if (!used_chars.count(c.id)) result.singleton_char_ids.push_back(c.id);
    std::sort(result.singleton_char_ids.begin(), result.singleton_char_ids.end());
    return result;
}

std::string groups_to_json(const GroupingResult& result) {
    nlohmann::json doc = nlohmann::json::object();
    nlohmann::json groups = nlohmann::json::array();
    for (size_t g = 0; g < result.groups.size(); ++g) {
        groups.push_back({{"group_id", g},
                          {"char_ids", result.groups[g].char_ids},
                          {"total_cost", result.groups[g].total_cost}});
    }
    doc["groups"] = std::move(groups);
    doc["singletons"] = result.singleton_char_ids;
    return doc.dump(2) + "\n";
}

}  // namespace textflow
