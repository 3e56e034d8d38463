#include "textflow/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace textflow {

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }

double AABox::diagonal() const { return std::hypot(width(), height()); }

std::array<Point, 4> AABox::corners() const {
    return {Point{xmin, ymin}, Point{xmax, ymin}, Point{xmax, ymax}, Point{xmin, ymax}};
}

AABox bounding_box(const std::vector<Point>& pts) {
    AABox b;
    if (pts.empty()) return b;
    b.xmin = b.xmax = pts[0].x;
    b.ymin = b.ymax = pts[0].y;
    for (const Point& p : pts) {
        b.xmin = std::min(b.xmin, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.xmax = std::max(b.xmax, p.x);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

namespace {

double shoelace2(const std::array<Point, 4>& p) {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point& u = p[i];
        const Point& v = p[(i + 1) & 3];
        a += u.x * v.y - v.x * u.y;
    }
    return a;
}

}  // namespace

Quad::Quad(const std::array<Point, 4>& corners) : pts(corners) {
    // Reverse the cycle if wound counter-clockwise on screen.
    if (shoelace2(pts) < 0.0) std::swap(pts[1], pts[3]);
    // Rotate so the vertex nearest the top-left corner comes first.
    int start = 0;
    for (int i = 1; i < 4; ++i) {
        const double ki = pts[i].x + pts[i].y;
        const double ks = pts[start].x + pts[start].y;
        if (ki < ks || (ki == ks && pts[i].y < pts[start].y)) start = i;
    }
    if (start != 0) {
        std::array<Point, 4> r;
        for (int i = 0; i < 4; ++i) r[i] = pts[(start + i) & 3];
        pts = r;
    }
}

double Quad::area() const { return 0.5 * std::abs(shoelace2(pts)); }

AABox Quad::bounds() const {
    return bounding_box(std::vector<Point>(pts.begin(), pts.end()));
}

bool Quad::axis_aligned(double eps) const {
    for (int i = 0; i < 4; ++i) {
        const Point d = pts[(i + 1) & 3] - pts[i];
        if (std::abs(d.x) > eps && std::abs(d.y) > eps) return false;
    }
    return true;
}

bool point_in_quad(const Quad& q, Point p, double eps) {
    // Boundary check first so edge points are inside regardless of parity.
    for (int i = 0; i < 4; ++i) {
        const Point a = q.pts[i];
        const Point b = q.pts[(i + 1) & 3];
        const Point ab = b - a;
        const Point ap = p - a;
        const double len2 = dot(ab, ab);
        if (len2 == 0.0) continue;
        const double t = std::clamp(dot(ap, ab) / len2, 0.0, 1.0);
        if (distance(p, a + t * ab) <= eps) return true;
    }
    bool inside = false;
    for (int i = 0, j = 3; i < 4; j = i++) {
        const Point a = q.pts[i];
        const Point b = q.pts[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double iou(const AABox& a, const AABox& b) {
    const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

EigenPair covariance_eigens(const std::vector<Point>& points) {
    const size_t n = points.size();
    if (n == 0) return {0.0, 0.0};
    double mx = 0.0, my = 0.0;
    for (const Point& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cxx = 0.0, cyy = 0.0, cxy = 0.0;
    for (const Point& p : points) {
        const double dx = p.x - mx;
        const double dy = p.y - my;
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    cxx /= static_cast<double>(n);
    cyy /= static_cast<double>(n);
    cxy /= static_cast<double>(n);
    // Roots of lambda^2 - tr*lambda + det = 0.
    const double tr = cxx + cyy;
    const double det = cxx * cyy - cxy * cxy;
    double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) disc = 0.0;  // PSD up to rounding
    const double root = std::sqrt(disc);
    double l1 = 0.5 * (tr + root);
    double l2 = 0.5 * (tr - root);
    if (l1 < 0.0) l1 = 0.0;
    if (l2 < 0.0) l2 = 0.0;
    return {l1, l2};
}

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold) {
    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return candidates[a].score > candidates[b].score;
    });
    std::vector<ScoredBox> kept;
    for (size_t idx : order) {
        bool suppressed = false;
        for (const ScoredBox& k : kept) {
            if (iou(candidates[idx].box, k.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(candidates[idx]);
    }
    return kept;
}

}  // namespace textflow
