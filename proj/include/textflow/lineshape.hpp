#pragma once

#include <string>
#include <vector>

#include "textflow/geom.hpp"
#include "textflow/ingest.hpp"

namespace textflow {

enum class LineModelKind { order0, order1, piecewise };

const char* to_string(LineModelKind kind);

/// Line a*x + b*y + c = 0 with a^2 + b^2 = 1.
struct CenterLine {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;

    double signed_distance(Point p) const { return a * p.x + b * p.y + c; }
    double distance(Point p) const;
    Point foot(Point p) const;       // projection of p onto the line
    Point direction() const { return {b, -a}; }
};

/// Center-line model of a text line: one line for order0/order1, one local
/// segment per character for piecewise, plus the height value.
struct LineModel {
    LineModelKind kind = LineModelKind::order0;
    std::vector<CenterLine> lines;
    double height = 0.0;
    std::vector<std::pair<double, double>> segment_spans;  // piecewise only

    const CenterLine& local_line(size_t char_index) const {
        return kind == LineModelKind::piecewise ? lines[char_index] : lines[0];
    }
};

struct ModelSelection {
    LineModel chosen;
    double h_order0 = 0.0;
    double h_order1 = 0.0;
    double h_piecewise = 0.0;
};

/// Model complexity penalties for order0 / order1 / piecewise.
constexpr double kModelPenalty0 = 1.0;
constexpr double kModelPenalty1 = 1.2;
constexpr double kModelPenaltyPiecewise = 1.4;

/// 2n control points: n top points in chain order, then the n bottom points
/// reversed, forming a closed strip polygon.
struct TextPolygon {
    std::vector<Point> points;
    bool self_intersecting = false;

    size_t char_count() const { return points.size() / 2; }
    Point top(size_t i) const { return points[i]; }
    Point bottom(size_t i) const { return points[points.size() - 1 - i]; }
};

/// Horizontal-or-vertical line through the mean center, whichever gives the
/// smaller height.
LineModel fit_order0(const std::vector<CharCandidate>& chars);

/// Total-least-squares line through the centers (principal axis).
LineModel fit_order1(const std::vector<CharCandidate>& chars);

/// Per-character local TLS segment over its min(n, 11) chain neighbors.
/// Chars must be in chain order.
LineModel fit_piecewise(const std::vector<CharCandidate>& chars);

/// h = 2 * max over character corners of (min over center lines of distance).
double model_height(const std::vector<CharCandidate>& chars, const LineModel& model);

/// Fit all three models and pick argmin of height * penalty; ties go to the
/// simpler model.
ModelSelection select_model(const std::vector<CharCandidate>& chars);

TextPolygon text_polygon(const std::vector<CharCandidate>& chars, const LineModel& model);

/// Chain order for ungrouped input: projection onto the order1 axis.
std::vector<CharCandidate> order_by_principal_axis(std::vector<CharCandidate> chars);

std::string lines_to_json(const std::vector<LineModel>& models,
                          const std::vector<TextPolygon>& polygons,
                          const std::vector<std::vector<int>>& group_char_ids);

}  // namespace textflow
