#include "textflow/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace textflow {

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {  // upper
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Quad min_area_rect(const std::vector<Point>& pts) {
    const std::vector<Point> hull = convex_hull(pts);
    if (hull.empty()) return Quad({Point{}, Point{}, Point{}, Point{}});
    if (hull.size() == 1) {
        const Point p = hull[0];
        return Quad({p, p, p, p});
    }
    if (hull.size() == 2) {
        return Quad({hull[0], hull[1], hull[1], hull[0]});
    }
    double best_area = std::numeric_limits<double>::infinity();
    Quad best({hull[0], hull[0], hull[0], hull[0]});
    // The minimum-area enclosing rectangle has a side flush with a hull edge.
    for (size_t i = 0; i < hull.size(); ++i) {
        const Point e = hull[(i + 1) % hull.size()] - hull[i];
        const double len = norm(e);
        if (len == 0.0) continue;
        const Point u{e.x / len, e.y / len};
        const Point v{-u.y, u.x};
        double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
        double lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v;
        for (const Point& p : hull) {
            const double pu = dot(p, u);
            const double pv = dot(p, v);
            lo_u = std::min(lo_u, pu);
            hi_u = std::max(hi_u, pu);
            lo_v = std::min(lo_v, pv);
            hi_v = std::max(hi_v, pv);
        }
        const double area = (hi_u - lo_u) * (hi_v - lo_v);
        if (area < best_area) {
            best_area = area;
            auto corner = [&](double cu, double cv) { return Point{cu * u.x + cv * v.x, cu * u.y + cv * v.y}; };
            best = Quad({corner(lo_u, lo_v), corner(hi_u, lo_v), corner(hi_u, hi_v),
                         corner(lo_u, hi_v)});
        }
    }
    return best;
}

double convex_intersection_area(const std::vector<Point>& subject,
                                const std::vector<Point>& clip) {
    // Sutherland-Hodgman. Clip polygon must be convex, wound clockwise on
    // screen (positive shoelace in y-down coordinates).
    std::vector<Point> poly = subject;
    const size_t m = clip.size();
    for (size_t i = 0; i < m && !poly.empty(); ++i) {
        const Point a = clip[i];
        const Point b = clip[(i + 1) % m];
        const Point edge = b - a;
        auto inside = [&](Point p) { return cross(edge, p - a) >= -1e-12; };
        std::vector<Point> out;
        out.reserve(poly.size() + 4);
        for (size_t j = 0; j < poly.size(); ++j) {
            const Point cur = poly[j];
            const Point prev = poly[(j + poly.size() - 1) % poly.size()];
            const bool cur_in = inside(cur);
            const bool prev_in = inside(prev);
            if (cur_in != prev_in) {
                const double denom = cross(edge, cur - prev);
                if (denom != 0.0) {
                    const double t = cross(edge, a - prev) / denom;
                    out.push_back(prev + t * (cur - prev));
                }
            }
            if (cur_in) out.push_back(cur);
        }
        poly.swap(out);
    }
    double a2 = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const Point& u = poly[i];
        const Point& v = poly[(i + 1) % poly.size()];
        a2 += u.x * v.y - v.x * u.y;
    }
    return 0.5 * std::abs(a2);
}

MaskScore mask_score(const std::vector<CharCandidate>& selection, const WordAnnotation& anno,
                     const MaskScoreParams& params) {
    if (selection.empty()) throw std::invalid_argument("mask_score: empty selection");

    MaskScore out;

    // Coverage term.
    if (anno.is_quad()) {
        std::vector<Point> corners;
        corners.reserve(selection.size() * 4);
        for (const CharCandidate& c : selection)
            for (const Point& p : c.box.corners()) corners.push_back(p);
        const Quad rect = min_area_rect(corners);
        const std::vector<Point> subject(rect.pts.begin(), rect.pts.end());
        const std::vector<Point> clip(anno.quad().pts.begin(), anno.quad().pts.end());
        const double inter = convex_intersection_area(subject, clip);
        out.s1 = std::clamp(inter / anno.quad().area(), 0.0, 1.0);
    } else {
        AABox chars_box = selection[0].box;
        for (const CharCandidate& c : selection) {
            chars_box.xmin = std::min(chars_box.xmin, c.box.xmin);
            chars_box.ymin = std::min(chars_box.ymin, c.box.ymin);
            chars_box.xmax = std::max(chars_box.xmax, c.box.xmax);
            chars_box.ymax = std::max(chars_box.ymax, c.box.ymax);
        }
        out.s1 = std::clamp(chars_box.area() / anno.box().area(), 0.0, 1.0);
    }

    // Collinearity term. One or two centers are trivially collinear.
    if (selection.size() <= 2) {
        out.s2 = 1.0;
    } else {
        std::vector<Point> centers;
        centers.reserve(selection.size());
        for (const CharCandidate& c : selection) centers.push_back(c.center());
        const EigenPair eig = covariance_eigens(centers);
        out.s2 = eig.lambda1 < 1e-12 ? 1.0 : 1.0 - eig.lambda2 / eig.lambda1;
    }

    out.s = params.w * out.s1 + (1.0 - params.w) * out.s2;
    if (anno.char_count) {
        const double n = static_cast<double>(selection.size());
        const double count = static_cast<double>(*anno.char_count);
        // Saturating penalty keeps s within [-count_term_weight, 1].
        out.s -= params.count_term_weight * std::min(1.0, std::abs(n - count) / count);
    }
    return out;
}

CharGraph build_char_graph(const std::vector<CharCandidate>& cands, int k) {
    CharGraph g;
    const size_t n = cands.size();
    g.nodes.reserve(n);
    for (const CharCandidate& c : cands) g.nodes.push_back(c.id);
    std::sort(g.nodes.begin(), g.nodes.end());
    if (n < 2) return g;

    std::set<std::pair<int, int>> pair_ids;
    std::map<std::pair<int, int>, double> pair_dist;
    for (size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, size_t>> by_dist;
        by_dist.reserve(n - 1);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            by_dist.emplace_back(distance(cands[i].center(), cands[j].center()), j);
        }
        const size_t take = std::min<size_t>(std::max(k, 0), by_dist.size());
        std::sort(by_dist.begin(), by_dist.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return cands[a.second].id < cands[b.second].id;
        });
        for (size_t t = 0; t < take; ++t) {
            const size_t j = by_dist[t].second;
            const int lo = std::min(cands[i].id, cands[j].id);
            const int hi = std::max(cands[i].id, cands[j].id);
            if (pair_ids.insert({lo, hi}).second) pair_dist[{lo, hi}] = by_dist[t].first;
        }
    }

    double mean = 0.0;
    for (const auto& [ids, d] : pair_dist) mean += d;
    if (!pair_dist.empty()) mean /= static_cast<double>(pair_dist.size());
    g.mean_knn_dist = mean;

    std::map<int, double> score_by_id;
    for (const CharCandidate& c : cands) score_by_id[c.id] = c.score;
    for (const auto& [ids, d] : pair_dist) {
        GraphEdge e;
        e.a = ids.first;
        e.b = ids.second;
        e.dist = d;
        const double decay = mean > 0.0 ? std::exp(-d / mean) : 1.0;
        e.weight = decay * (score_by_id[e.a] + score_by_id[e.b]);
        g.edges.push_back(e);
    }
    // std::map iteration already gives (a, b) order.
    return g;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), size_t{0}); }
    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

private:
    std::vector<size_t> parent_;
};

}  // namespace

std::vector<GraphEdge> maximum_spanning_tree(const CharGraph& graph) {
    std::map<int, size_t> index;
    for (size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i]] = i;
    std::vector<GraphEdge> edges = graph.edges;
    std::sort(edges.begin(), edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    UnionFind uf(graph.nodes.size());
    std::vector<GraphEdge> tree;
    for (const GraphEdge& e : edges) {
        if (uf.unite(index.at(e.a), index.at(e.b))) tree.push_back(e);
    }
    std::sort(tree.begin(), tree.end(), [](const GraphEdge& x, const GraphEdge& y) {
        return x.a < y.a || (x.a == y.a && x.b < y.b);
    });
    return tree;
}

namespace {

// Ids reachable from `start` in the current set without crossing edge `skip`.
std::set<int> side_of_split(const std::set<int>& current, const std::vector<GraphEdge>& tree,
                            size_t skip, int start) {
    std::set<int> seen{start};
    std::vector<int> stack{start};
    while (!stack.empty()) {
        const int at = stack.back();
        stack.pop_back();
        for (size_t i = 0; i < tree.size(); ++i) {
            if (i == skip) continue;
            const GraphEdge& e = tree[i];
            if (!current.count(e.a) || !current.count(e.b)) continue;
            int next = -1;
            if (e.a == at) next = e.b;
            else if (e.b == at) next = e.a;
            if (next >= 0 && seen.insert(next).second) stack.push_back(next);
        }
    }
    return seen;
}

}  // namespace

CharMask greedy_partition(const std::vector<GraphEdge>& tree,
                          const std::vector<CharCandidate>& cands, const WordAnnotation& anno,
                          const MaskScoreParams& params) {
    CharMask mask;
    if (cands.empty()) return mask;

    std::map<int, const CharCandidate*> by_id;
    for (const CharCandidate& c : cands) by_id[c.id] = &c;

    auto score_of = [&](const std::set<int>& ids) {
        std::vector<CharCandidate> sel;
        sel.reserve(ids.size());
        for (int id : ids) sel.push_back(*by_id.at(id));
        return mask_score(sel, anno, params);
    };

    std::set<int> current;
    for (const CharCandidate& c : cands) current.insert(c.id);
    MaskScore cur_score = score_of(current);

    while (current.size() > 1) {
        bool improved = false;
        std::set<int> best_group;
        MaskScore best_score;
        for (size_t ei = 0; ei < tree.size(); ++ei) {
            const GraphEdge& e = tree[ei];
            if (!current.count(e.a) || !current.count(e.b)) continue;
            const std::set<int> side_a = side_of_split(current, tree, ei, e.a);
            std::set<int> side_b;
            for (int id : current)
                if (!side_a.count(id)) side_b.insert(id);
            if (side_b.empty()) continue;  // edge not a cut of the current set
            const MaskScore sa = score_of(side_a);
            const MaskScore sb = score_of(side_b);
            // The higher-scoring side survives the split.
            const std::set<int>* chosen = &side_a;
            const MaskScore* chosen_score = &sa;
            if (sb.s > sa.s ||
                (sb.s == sa.s && (side_b.size() > side_a.size() ||
                                  (side_b.size() == side_a.size() &&
                                   *side_b.begin() < *side_a.begin())))) {
                chosen = &side_b;
                chosen_score = &sb;
            }
            if (!improved || chosen_score->s > best_score.s) {
                best_group = *chosen;
                best_score = *chosen_score;
                improved = true;
            }
        }
        if (!improved || best_score.s <= cur_score.s) break;
        current = best_group;
        cur_score = best_score;
    }

    mask.selected_ids.assign(current.begin(), current.end());
    mask.s = cur_score.s;
    mask.s1 = cur_score.s1;
    mask.s2 = cur_score.s2;
    return mask;
}

double loss_weight(const CharMask& mask) { return mask.empty() ? 0.0 : mask.s; }

std::vector<CharMask> generate_masks(const Scene& scene, const MaskScoreParams& params) {
    std::vector<CharMask> masks;
    masks.reserve(scene.words.size());
    for (size_t w = 0; w < scene.words.size(); ++w) {
        const WordAnnotation& anno = scene.words[w];
        std::vector<CharCandidate> inside;
        for (const CharCandidate& c : scene.candidates) {
            if (c.score >= params.score_floor && anno.contains(c.center()))
                inside.push_back(c);
        }
        CharMask mask;
        if (!inside.empty()) {
            const CharGraph graph = build_char_graph(inside, params.knn_k);
            const std::vector<GraphEdge> tree = maximum_spanning_tree(graph);
            mask = greedy_partition(tree, inside, anno, params);
        }
        mask.word_index = static_cast<int>(w);
        masks.push_back(std::move(mask));
    }
    return masks;
}

std::string masks_to_json(const std::vector<CharMask>& masks) {
    nlohmann::json doc = nlohmann::json::array();
    for (const CharMask& m : masks) {
        doc.push_back({{"word_index", m.word_index},
                       {"selected_ids", m.selected_ids},
                       {"s", m.s},
                       {"s1", m.s1},
                       {"s2", m.s2}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace textflow
