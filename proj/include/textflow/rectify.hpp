#pragma once

#include <array>
#include <string>
#include <vector>

#include "textflow/geom.hpp"
#include "textflow/lineshape.hpp"
#include "textflow/raster.hpp"

namespace textflow {

/// Interpolating thin-plate-spline warp: affine part plus radial kernel
/// U(r) = r^2 log(r^2) terms anchored at the source control points.
struct TpsTransform {
    std::vector<Point> sources;
    std::array<double, 3> affine_x{};  // x' = [0] + [1]*x + [2]*y
    std::array<double, 3> affine_y{};
    std::vector<double> weights_x;
    std::vector<double> weights_y;

    Point apply(Point p) const;
};

/// Solves the standard bordered TPS system so that every source control
/// point maps exactly to its target. Throws std::invalid_argument on size
/// mismatch or < 3 points and std::runtime_error when the system is
/// singular (collinear or duplicate control points).
TpsTransform tps_fit(const std::vector<Point>& sources, const std::vector<Point>& targets);

constexpr int kStripHeight = 32;

struct RectifiedStrip {
    RasterImage raster;           // height kStripHeight
    TextPolygon source_polygon;
    TpsTransform strip_to_source;
    double center_line_length = 0.0;
};

/// Warps the text polygon to an H x W strip, W = round(H * length / h).
/// Strip control points sit on the boundary at cumulative-arc-length x.
RectifiedStrip rectify_strip(const RasterImage& image, const TextPolygon& polygon,
                             const LineModel& model);

struct WordPartition {
    std::vector<std::pair<int, int>> intervals;       // inclusive column ranges
    std::vector<std::array<Point, 2>> cuts;           // source-space separators
    std::vector<std::array<Point, 4>> word_quads;     // source-space word regions
};

struct PartitionParams {
    double min_gap_frac = 0.5;          // of strip height, minimum separator run
    double density_threshold = 0.15;    // of the peak column density
};

/// Column ink-density profile partition: sufficiently long low-density runs
/// separate words; separator midpoints map back to source-space cut lines.
WordPartition partition_words(const RectifiedStrip& strip, const PartitionParams& params);

std::string partition_to_json(const std::vector<WordPartition>& parts,
                              const std::vector<int>& group_ids);

}  // namespace textflow
