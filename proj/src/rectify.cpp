#include "textflow/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace textflow {

namespace {

double tps_kernel(double r2) {
    if (r2 <= 0.0) return 0.0;
    return r2 * std::log(r2);
}

/// Gaussian elimination with partial pivoting, in place. Throws when a
/// pivot collapses (singular system).
std::vector<double> solve_dense(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const size_t n = m.size();
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tiny = std::max(scale, 1.0) * 1e-12;

    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < tiny)
            throw std::runtime_error(
                "tps_fit: singular system (collinear or duplicate control points)");
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (size_t c = r + 1; c < n; ++c) acc -= m[r][c] * x[c];
        x[r] = acc / m[r][r];
    }
    return x;
}

}  // namespace

Point TpsTransform::apply(Point p) const {
    double x = affine_x[0] + affine_x[1] * p.x + affine_x[2] * p.y;
    double y = affine_y[0] + affine_y[1] * p.x + affine_y[2] * p.y;
    for (size_t i = 0; i < sources.size(); ++i) {
        const double dx = p.x - sources[i].x;
        const double dy = p.y - sources[i].y;
        const double u = tps_kernel(dx * dx + dy * dy);
        x += weights_x[i] * u;
        y += weights_y[i] * u;
    }
    return {x, y};
}

TpsTransform tps_fit(const std::vector<Point>& sources, const std::vector<Point>& targets) {
    if (sources.size() != targets.size())
        throw std::invalid_argument("tps_fit: source/target size mismatch");
    const size_t m = sources.size();
    if (m < 3) throw std::invalid_argument("tps_fit: needs at least 3 control points");

    // Bordered system: [K P; P^T 0] [w; a] = [v; 0].
    const size_t n = m + 3;
    std::vector<std::vector<double>> sys(n, std::vector<double>(n, 0.0));
    std::vector<double> rhs_x(n, 0.0), rhs_y(n, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            const double dx = sources[i].x - sources[j].x;
            const double dy = sources[i].y - sources[j].y;
            sys[i][j] = tps_kernel(dx * dx + dy * dy);
        }
        sys[i][m] = sys[m][i] = 1.0;
        sys[i][m + 1] = sys[m + 1][i] = sources[i].x;
        sys[i][m + 2] = sys[m + 2][i] = sources[i].y;
        rhs_x[i] = targets[i].x;
        rhs_y[i] = targets[i].y;
    }

    const std::vector<double> sol_x = solve_dense(sys, rhs_x);
    const std::vector<double> sol_y = solve_dense(sys, rhs_y);

    TpsTransform t;
    t.sources = sources;
    t.weights_x.assign(sol_x.begin(), sol_x.begin() + m);
    t.weights_y.assign(sol_y.begin(), sol_y.begin() + m);
    t.affine_x = {sol_x[m], sol_x[m + 1], sol_x[m + 2]};
    t.affine_y = {sol_y[m], sol_y[m + 1], sol_y[m + 2]};
    return t;
}

RectifiedStrip rectify_strip(const RasterImage& image, const TextPolygon& polygon,
                             const LineModel& model) {
    const size_t n = polygon.char_count();
    if (n < 2) throw std::invalid_argument("rectify_strip: degenerate polygon (< 2 chars)");
    if (model.height <= 0.0) throw std::invalid_argument("rectify_strip: non-positive height");

    // Cumulative arc length along the center polyline (control-point midpoints).
    std::vector<Point> centers(n);
    for (size_t i = 0; i < n; ++i) centers[i] = 0.5 * (polygon.top(i) + polygon.bottom(i));
    std::vector<double> s(n, 0.0);
    for (size_t i = 1; i < n; ++i) s[i] = s[i - 1] + distance(centers[i - 1], centers[i]);
    const double length = s.back();
    if (length <= 0.0) throw std::invalid_argument("rectify_strip: zero-length center line");

    const double h = model.height;
    const int width = std::max(1, static_cast<int>(std::lround(kStripHeight * length / h)));

    std::vector<Point> strip_pts, source_pts;
    strip_pts.reserve(2 * n);
    source_pts.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
        strip_pts.push_back({s[i] / length * width, 0.0});
        source_pts.push_back(polygon.top(i));
    }
    for (size_t i = 0; i < n; ++i) {
        strip_pts.push_back({s[i] / length * width, static_cast<double>(kStripHeight)});
        source_pts.push_back(polygon.bottom(i));
    }

    RectifiedStrip strip;
    strip.source_polygon = polygon;
    strip.center_line_length = length;
    strip.strip_to_source = tps_fit(strip_pts, source_pts);
    strip.raster = RasterImage(width, kStripHeight);
    for (int py = 0; py < kStripHeight; ++py) {
        for (int px = 0; px < width; ++px) {
            const Point src = strip.strip_to_source.apply({px + 0.5, py + 0.5});
            const double v = image.sample(src.x, src.y);
            strip.raster.set(px, py, static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l)));
        }
    }
    return strip;
}

WordPartition partition_words(const RectifiedStrip& strip, const PartitionParams& params) {
    WordPartition out;
    const RasterImage& img = strip.raster;
    std::vector<double> density(img.width, 0.0);
    for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (int y = 0; y < img.height; ++y) acc += img.at(x, y);
        density[x] = acc / img.height;
    }
    const double peak = *std::max_element(density.begin(), density.end());
    if (peak <= 0.0) return out;  // blank strip
    const double threshold = params.density_threshold * peak;
    const int min_run = static_cast<int>(std::ceil(params.min_gap_frac * img.height));

    // Low-density runs of sufficient length separate words.
    std::vector<std::pair<int, int>> separators;
    int run_start = -1;
    for (int x = 0; x <= img.width; ++x) {
        const bool low = x < img.width && density[x] < threshold;
        if (low && run_start < 0) run_start = x;
        if (!low && run_start >= 0) {
            if (x - run_start >= min_run) separators.emplace_back(run_start, x - 1);
            run_start = -1;
        }
    }

    // Word intervals between separators, trimmed to their inked extent.
    int cursor = 0;
    auto flush_span = [&](int lo, int hi) {
        int first = -1, last = -1;
        for (int x = lo; x <= hi; ++x) {
            if (density[x] >= threshold) {
                if (first < 0) first = x;
                last = x;
            }
        }
        if (first >= 0) out.intervals.emplace_back(first, last);
    };
    for (const auto& [lo, hi] : separators) {
        if (cursor <= lo - 1) flush_span(cursor, lo - 1);
        cursor = hi + 1;
    }
    if (cursor <= img.width - 1) flush_span(cursor, img.width - 1);

    const double H = static_cast<double>(img.height);
    for (const auto& [lo, hi] : separators) {
        const double mid = 0.5 * (lo + hi + 1);
        out.cuts.push_back({strip.strip_to_source.apply({mid, 0.0}),
                            strip.strip_to_source.apply({mid, H})});
    }
    for (const auto& [lo, hi] : out.intervals) {
        const double l = lo;
        const double r = hi + 1;
        out.word_quads.push_back({strip.strip_to_source.apply({l, 0.0}),
                                  strip.strip_to_source.apply({r, 0.0}),
                                  strip.strip_to_source.apply({r, H}),
                                  strip.strip_to_source.apply({l, H})});
    }
    return out;
}

std::string partition_to_json(const std::vector<WordPartition>& parts,
                              const std::vector<int>& group_ids) {
    nlohmann::json doc = nlohmann::json::array();
    for (size_t i = 0; i < parts.size(); ++i) {
        nlohmann::json intervals = nlohmann::json::array();
        for (const auto& [lo, hi] : parts[i].intervals)
            intervals.push_back(nlohmann::json::array({lo, hi}));
        nlohmann::json quads = nlohmann::json::array();
        for (const auto& q : parts[i].word_quads) {
            nlohmann::json quad = nlohmann::json::array();
            for (const Point& p : q) quad.push_back(nlohmann::json::array({p.x, p.y}));
            quads.push_back(std::move(quad));
        }
        nlohmann::json cuts = nlohmann::json::array();
        for (const auto& c : parts[i].cuts)
            cuts.push_back(nlohmann::json::array(
                {nlohmann::json::array({c[0].x, c[0].y}), nlohmann::json::array({c[1].x, c[1].y})}));
        doc.push_back({{"group_id", group_ids[i]},
                       {"intervals", std::move(intervals)},
                       {"word_quads", std::move(quads)},
                       {"cuts", std::move(cuts)}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace textflow
