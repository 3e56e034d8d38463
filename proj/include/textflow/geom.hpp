#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace textflow {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point p);
double distance(Point a, Point b);

/// Axis-aligned box, image coordinates (x right, y down).
struct AABox {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    double diagonal() const;
    Point center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool valid() const { return xmax >= xmin && ymax >= ymin; }
    bool contains(Point p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    std::array<Point, 4> corners() const;
};

AABox bounding_box(const std::vector<Point>& pts);

/// Simple quadrangle. Winding is normalized on construction: clockwise on
/// screen (positive shoelace area in y-down coordinates), first vertex the
/// one nearest the top-left.
struct Quad {
    std::array<Point, 4> pts;

    Quad() = default;
    explicit Quad(const std::array<Point, 4>& corners);

    double area() const;
    AABox bounds() const;
    bool axis_aligned(double eps = 1e-9) const;
};

/// Even-odd test; boundary points count as inside.
bool point_in_quad(const Quad& q, Point p, double eps = 1e-9);

/// Eigenvalues of a 2x2 covariance matrix, lambda1 >= lambda2 >= 0.
struct EigenPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

double iou(const AABox& a, const AABox& b);

/// Sample covariance (1/n) of the points, closed-form eigenvalues.
/// Empty input gives (0, 0).
EigenPair covariance_eigens(const std::vector<Point>& points);

struct ScoredBox {
    AABox box;
    double score = 0.0;
    int id = 0;
};

/// Greedy score-descending suppression. Ties broken by lower input index.
/// Output sorted by descending score.
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold);

}  // namespace textflow
