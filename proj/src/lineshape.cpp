#include "textflow/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace textflow {

const char* to_string(LineModelKind kind) {
    switch (kind) {
        case LineModelKind::order0: return "order0";
        case LineModelKind::order1: return "order1";
        case LineModelKind::piecewise: return "piecewise";
    }
    return "?";
}

double CenterLine::distance(Point p) const { return std::abs(signed_distance(p)); }

Point CenterLine::foot(Point p) const {
    const double d = signed_distance(p);
    return {p.x - d * a, p.y - d * b};
}

namespace {

Point mean_center(const std::vector<CharCandidate>& chars) {
    Point m;
    for (const CharCandidate& c : chars) m = m + c.center();
    const double n = static_cast<double>(chars.size());
    return {m.x / n, m.y / n};
}

CenterLine normalize_sign(CenterLine l) {
    if (l.a < 0.0 || (l.a == 0.0 && l.b < 0.0)) {
        l.a = -l.a;
        l.b = -l.b;
        l.c = -l.c;
    }
    return l;
}

/// TLS line through the given centers: principal axis of their covariance.
/// Degenerate spreads fall back to a horizontal line through the mean.
CenterLine tls_line(const std::vector<Point>& centers) {
    double mx = 0.0, my = 0.0;
    for (const Point& p : centers) {
        mx += p.x;
        my += p.y;
    }
    const double n = static_cast<double>(centers.size());
    mx /= n;
    my /= n;
    double cxx = 0.0, cyy = 0.0, cxy = 0.0;
    for (const Point& p : centers) {
        cxx += (p.x - mx) * (p.x - mx);
        cyy += (p.y - my) * (p.y - my);
        cxy += (p.x - mx) * (p.y - my);
    }
    CenterLine l;
    if (cxx + cyy < 1e-24) {
        l = {0.0, 1.0, -my};
    } else {
        const double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
        const Point dir{std::cos(angle), std::sin(angle)};
        l.a = -dir.y;
        l.b = dir.x;
        l.c = -(l.a * mx + l.b * my);
    }
    return normalize_sign(l);
}

double single_line_height(const std::vector<CharCandidate>& chars, const CenterLine& l) {
    double worst = 0.0;
    for (const CharCandidate& c : chars)
        for (const Point& corner : c.box.corners()) worst = std::max(worst, l.distance(corner));
    return 2.0 * worst;
}

}  // namespace

LineModel fit_order0(const std::vector<CharCandidate>& chars) {
    if (chars.empty()) throw std::invalid_argument("fit_order0: no chars");
    const Point m = mean_center(chars);
    const CenterLine horizontal{0.0, 1.0, -m.y};
    const CenterLine vertical{1.0, 0.0, -m.x};
    const double hh = single_line_height(chars, horizontal);
    const double hv = single_line_height(chars, vertical);
    LineModel model;
    model.kind = LineModelKind::order0;
    model.lines = {hh <= hv ? horizontal : vertical};
    model.height = std::min(hh, hv);
    return model;
}

LineModel fit_order1(const std::vector<CharCandidate>& chars) {
    if (chars.empty()) throw std::invalid_argument("fit_order1: no chars");
    if (chars.size() == 1) return fit_order0(chars);
    std::vector<Point> centers;
    centers.reserve(chars.size());
    for (const CharCandidate& c : chars) centers.push_back(c.center());
    LineModel model;
    model.kind = LineModelKind::order1;
    model.lines = {tls_line(centers)};
    model.height = single_line_height(chars, model.lines[0]);
    return model;
}

LineModel fit_piecewise(const std::vector<CharCandidate>& chars) {
    if (chars.empty()) throw std::invalid_argument("fit_piecewise: no chars");
    if (chars.size() == 1) return fit_order0(chars);
    const int n = static_cast<int>(chars.size());
    const int k = std::min(n, 11);

    LineModel model;
    model.kind = LineModelKind::piecewise;
    model.lines.reserve(n);
    for (int i = 0; i < n; ++i) {
        // k nearest chars by chain-order distance; ties go to the left.
        int lo = i, hi = i;
        while (hi - lo + 1 < k) {
            const int dl = lo > 0 ? i - (lo - 1) : -1;
            const int dr = hi < n - 1 ? (hi + 1) - i : -1;
            if (dl >= 0 && (dr < 0 || dl <= dr)) --lo;
            else ++hi;
        }
        std::vector<Point> window;
        window.reserve(k);
        for (int j = lo; j <= hi; ++j) window.push_back(chars[j].center());
        model.lines.push_back(tls_line(window));
    }

    // Validity span of each segment along the chain: half-gaps to neighbors.
    std::vector<double> s(n, 0.0);
    for (int i = 1; i < n; ++i)
        s[i] = s[i - 1] + distance(chars[i - 1].center(), chars[i].center());
    model.segment_spans.resize(n);
    for (int i = 0; i < n; ++i) {
        const double lo = i == 0 ? s.front() : 0.5 * (s[i - 1] + s[i]);
        const double hi = i == n - 1 ? s.back() : 0.5 * (s[i] + s[i + 1]);
        model.segment_spans[i] = {lo, hi};
    }
    model.height = model_height(chars, model);
    return model;
}

double model_height(const std::vector<CharCandidate>& chars, const LineModel& model) {
    double worst = 0.0;
    for (const CharCandidate& c : chars) {
        for (const Point& corner : c.box.corners()) {
            double nearest = model.lines[0].distance(corner);
            for (size_t li = 1; li < model.lines.size(); ++li)
                nearest = std::min(nearest, model.lines[li].distance(corner));
            worst = std::max(worst, nearest);
        }
    }
    return 2.0 * worst;
}

ModelSelection select_model(const std::vector<CharCandidate>& chars) {
    if (chars.empty()) throw std::invalid_argument("select_model: no chars");
    const LineModel m0 = fit_order0(chars);
    const LineModel m1 = fit_order1(chars);
    const LineModel mp = fit_piecewise(chars);
    ModelSelection sel;
    sel.h_order0 = model_height(chars, m0);
    sel.h_order1 = model_height(chars, m1);
    sel.h_piecewise = model_height(chars, mp);
    const double c0 = sel.h_order0 * kModelPenalty0;
    const double c1 = sel.h_order1 * kModelPenalty1;
    const double cp = sel.h_piecewise * kModelPenaltyPiecewise;
    if (c0 <= c1 && c0 <= cp) sel.chosen = m0;
    else if (c1 <= cp) sel.chosen = m1;
    else sel.chosen = mp;
    return sel;
}

TextPolygon text_polygon(const std::vector<CharCandidate>& chars, const LineModel& model) {
    if (chars.empty()) throw std::invalid_argument("text_polygon: no chars");
    const size_t n = chars.size();
    const double half = 0.5 * model.height;

    std::vector<Point> tops(n), bottoms(n);
    for (size_t i = 0; i < n; ++i) {
        const CenterLine& line = model.local_line(i);
        const Point q = line.foot(chars[i].center());
        // Local forward direction from the chain; central difference inside.
        Point forward;
        if (n == 1) {
            forward = {1.0, 0.0};
        } else {
            const size_t prev = i == 0 ? 0 : i - 1;
            const size_t next = i == n - 1 ? n - 1 : i + 1;
            forward = chars[next].center() - chars[prev].center();
        }
        Point t = line.direction();
        if (dot(t, forward) < 0.0) t = {-t.x, -t.y};
        const Point up{t.y, -t.x};  // screen-up for left-to-right text
        tops[i] = q + half * up;
        bottoms[i] = q - half * up;
    }

    TextPolygon poly;
    poly.points.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) poly.points.push_back(tops[i]);
    for (size_t i = n; i-- > 0;) poly.points.push_back(bottoms[i]);

    // Flag self-intersection (extreme curvature) rather than repairing it.
    auto proper_cross = [](Point a, Point b, Point c, Point d) {
        const double d1 = cross(b - a, c - a);
        const double d2 = cross(b - a, d - a);
        const double d3 = cross(d - c, a - c);
        const double d4 = cross(d - c, b - c);
        return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
    };
    const size_t m = poly.points.size();
    for (size_t i = 0; i < m && !poly.self_intersecting; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            if (j == i || (j + 1) % m == i || (i + 1) % m == j || i == (j + 1) % m) continue;
            if (i == 0 && j == m - 1) continue;
            if (proper_cross(poly.points[i], poly.points[(i + 1) % m], poly.points[j],
                             poly.points[(j + 1) % m])) {
                poly.self_intersecting = true;
                break;
            }
        }
    }
    return poly;
}

std::vector<CharCandidate> order_by_principal_axis(std::vector<CharCandidate> chars) {
    if (chars.size() < 2) return chars;
    std::vector<Point> centers;
    centers.reserve(chars.size());
    for (const CharCandidate& c : chars) centers.push_back(c.center());
    const CenterLine axis = tls_line(centers);
    const Point d = axis.direction();
    std::stable_sort(chars.begin(), chars.end(), [&](const CharCandidate& a, const CharCandidate& b) {
        return dot(a.center(), d) < dot(b.center(), d);
    });
    return chars;
}

std::string lines_to_json(const std::vector<LineModel>& models,
                          const std::vector<TextPolygon>& polygons,
                          const std::vector<std::vector<int>>& group_char_ids) {
    nlohmann::json doc = nlohmann::json::array();
    for (size_t g = 0; g < models.size(); ++g) {
        nlohmann::json lines = nlohmann::json::array();
        for (const CenterLine& l : models[g].lines)
            lines.push_back(nlohmann::json::array({l.a, l.b, l.c}));
        nlohmann::json poly = nlohmann::json::array();
        for (const Point& p : polygons[g].points) poly.push_back(nlohmann::json::array({p.x, p.y}));
        doc.push_back({{"group_id", g},
                       {"kind", to_string(models[g].kind)},
                       {"lines", std::move(lines)},
                       {"h", models[g].height},
                       {"polygon", std::move(poly)},
                       {"char_ids", group_char_ids[g]},
                       {"self_intersecting", polygons[g].self_intersecting}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace textflow
