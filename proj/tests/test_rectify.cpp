#include "textflow/rectify.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "textflow/lineshape.hpp"
#include "textflow/util.hpp"

using namespace textflow;
using tftest::TestRng;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Point> random_points(TestRng& rng, int n, double lo = 0.0, double hi = 100.0) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi)});
    return pts;
}

/// Independent TPS solve using Eigen's pivoted LU on the same bordered
/// system; returns mapped positions for the probe points.
std::vector<Point> tps_oracle_apply(const std::vector<Point>& sources,
                                    const std::vector<Point>& targets,
                                    const std::vector<Point>& probes) {
    const int m = static_cast<int>(sources.size());
    auto kernel = [](double r2) { return r2 <= 0.0 ? 0.0 : r2 * std::log(r2); };
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 3, m + 3);
    Eigen::VectorXd rx(m + 3), ry(m + 3);
    rx.setZero();
    ry.setZero();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double dx = sources[i].x - sources[j].x;
            const double dy = sources[i].y - sources[j].y;
            sys(i, j) = kernel(dx * dx + dy * dy);
        }
        sys(i, m) = sys(m, i) = 1.0;
        sys(i, m + 1) = sys(m + 1, i) = sources[i].x;
        sys(i, m + 2) = sys(m + 2, i) = sources[i].y;
        rx(i) = targets[i].x;
        ry(i) = targets[i].y;
    }
    const Eigen::VectorXd sx = sys.fullPivLu().solve(rx);
    const Eigen::VectorXd sy = sys.fullPivLu().solve(ry);
    std::vector<Point> out;
    for (const Point& p : probes) {
        double x = sx(m) + sx(m + 1) * p.x + sx(m + 2) * p.y;
        double y = sy(m) + sy(m + 1) * p.x + sy(m + 2) * p.y;
        for (int i = 0; i < m; ++i) {
            const double dx = p.x - sources[i].x;
            const double dy = p.y - sources[i].y;
            x += sx(i) * kernel(dx * dx + dy * dy);
            y += sy(i) * kernel(dx * dx + dy * dy);
        }
        out.push_back({x, y});
    }
    return out;
}

void check_side_conditions(const TpsTransform& t, double tol = 1e-8) {
    double s1 = 0, sx = 0, sy = 0, t1 = 0, tx = 0, ty = 0;
    for (size_t i = 0; i < t.sources.size(); ++i) {
        s1 += t.weights_x[i];
        sx += t.weights_x[i] * t.sources[i].x;
        sy += t.weights_x[i] * t.sources[i].y;
        t1 += t.weights_y[i];
        tx += t.weights_y[i] * t.sources[i].x;
        ty += t.weights_y[i] * t.sources[i].y;
    }
    CHECK(std::abs(s1) <= tol);
    CHECK(std::abs(sx) <= tol);
    CHECK(std::abs(sy) <= tol);
    CHECK(std::abs(t1) <= tol);
    CHECK(std::abs(tx) <= tol);
    CHECK(std::abs(ty) <= tol);
}

/// Smooth procedural pattern in "text space" used to render test images.
double pattern(double u, double v) {
    return 127.5 + 60.0 * std::sin(u * 0.31) * std::cos(v * 0.47) +
           50.0 * std::sin(u * 0.11 + v * 0.13);
}

}  // namespace

TEST_CASE("tps_fit: identity correspondence gives identity affine, zero weights") {
    const std::vector<Point> pts = {{0, 0}, {10, 0}, {10, 8}, {0, 8}, {5, 3}};
    const TpsTransform t = tps_fit(pts, pts);
    CHECK(t.affine_x[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(t.affine_x[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.affine_x[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(t.affine_y[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(t.affine_y[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(t.affine_y[2] == doctest::Approx(1.0).epsilon(1e-9));
    for (double w : t.weights_x) CHECK(std::abs(w) <= 1e-9);
    for (double w : t.weights_y) CHECK(std::abs(w) <= 1e-9);
}

TEST_CASE("tps_fit: affine reproduction") {
    TestRng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Point> src = random_points(rng, 6);
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-30, 30);
        const double d = rng.uniform(-2, 2), e = rng.uniform(-2, 2), f = rng.uniform(-30, 30);
        std::vector<Point> dst;
        for (const Point& p : src) dst.push_back({a * p.x + b * p.y + c, d * p.x + e * p.y + f});
        TpsTransform t;
        try {
            t = tps_fit(src, dst);
        } catch (const std::runtime_error&) {
            continue;  // rare near-collinear draw
        }
        for (double w : t.weights_x) CHECK(std::abs(w) <= 1e-8);
        for (double w : t.weights_y) CHECK(std::abs(w) <= 1e-8);
        for (int probe = 0; probe < 5; ++probe) {
            const Point p{rng.uniform(-20, 120), rng.uniform(-20, 120)};
            const Point q = t.apply(p);
            CHECK(q.x == doctest::Approx(a * p.x + b * p.y + c).scale(100).epsilon(1e-6));
            CHECK(q.y == doctest::Approx(d * p.x + e * p.y + f).scale(100).epsilon(1e-6));
        }
    }
}

TEST_CASE("tps_fit: random correspondences interpolate exactly and match Eigen oracle") {
    TestRng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Point> src = random_points(rng, 8);
        const std::vector<Point> dst = random_points(rng, 8);
        TpsTransform t;
        try {
            t = tps_fit(src, dst);
        } catch (const std::runtime_error&) {
            continue;
        }
        for (size_t i = 0; i < src.size(); ++i) {
            const Point q = t.apply(src[i]);
            CHECK(std::abs(q.x - dst[i].x) <= 1e-6);
            CHECK(std::abs(q.y - dst[i].y) <= 1e-6);
        }
        check_side_conditions(t);

        const std::vector<Point> probes = random_points(rng, 6, -10, 110);
        const std::vector<Point> oracle = tps_oracle_apply(src, dst, probes);
        for (size_t i = 0; i < probes.size(); ++i) {
            const Point q = t.apply(probes[i]);
            CHECK(q.x == doctest::Approx(oracle[i].x).scale(100).epsilon(1e-6));
            CHECK(q.y == doctest::Approx(oracle[i].y).scale(100).epsilon(1e-6));
        }
    }
}

TEST_CASE("tps_fit: degenerate control points are rejected") {
    CHECK_THROWS_AS(tps_fit({{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(tps_fit({{0, 0}, {1, 1}, {2, 2}, {3, 3}},
                            {{0, 0}, {1, 0}, {2, 0}, {3, 1}}),
                    std::runtime_error);  // collinear sources
    CHECK_THROWS_AS(tps_fit({{0, 0}, {0, 0}, {2, 1}, {3, 5}},
                            {{0, 0}, {1, 0}, {2, 0}, {3, 1}}),
                    std::runtime_error);  // duplicate source
    CHECK_THROWS_AS(tps_fit({{0, 0}, {1, 0}}, {{0, 0}, {1, 0}, {2, 2}}), std::invalid_argument);
}

TEST_CASE("rectify_strip: axis-aligned strip is a pure scale") {
    // Source: pattern-filled band of height 64 -> strip scales by 1/2.
    RasterImage img(300, 120);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.set(x, y, static_cast<uint8_t>(std::clamp(pattern(x, y), 0.0, 255.0)));

    // Polygon equivalent to chars on the line y = 60 with h = 64.
    const int n = 5;
    TextPolygon poly;
    LineModel model;
    model.kind = LineModelKind::order1;
    model.lines = {{0.0, 1.0, -60.0}};
    model.height = 64.0;
    for (int i = 0; i < n; ++i) poly.points.push_back({20.0 + 60.0 * i, 60.0 - 32.0});
    for (int i = n - 1; i >= 0; --i) poly.points.push_back({20.0 + 60.0 * i, 60.0 + 32.0});

    const RectifiedStrip strip = rectify_strip(img, poly, model);
    CHECK(strip.raster.height == 32);
    CHECK(strip.raster.width == 120);  // 32 * 240 / 64

    double worst = 0.0;
    for (int py = 0; py < strip.raster.height; ++py) {
        for (int px = 0; px < strip.raster.width; ++px) {
            const double sx = 20.0 + 2.0 * (px + 0.5);
            const double sy = 28.0 + 2.0 * (py + 0.5);
            const double direct = img.sample(sx, sy);
            worst = std::max(worst, std::abs(direct - strip.raster.at(px, py)));
        }
    }
    CHECK(worst <= 1.0);
}

TEST_CASE("rectify_strip: 30-degree rotated strip matches the unrotated one") {
    const double theta = kPi / 6.0;
    const double cos_t = std::cos(theta), sin_t = std::sin(theta);
    // Upright image: pattern drawn directly. Rotated image: same pattern
    // sampled through the inverse rotation about (0, 0) plus offset.
    RasterImage upright(320, 120);
    for (int y = 0; y < upright.height; ++y)
        for (int x = 0; x < upright.width; ++x)
            upright.set(x, y, static_cast<uint8_t>(std::clamp(pattern(x, y), 0.0, 255.0)));

    RasterImage rotated(420, 320);
    for (int y = 0; y < rotated.height; ++y) {
        for (int x = 0; x < rotated.width; ++x) {
            // Pixel center in rotated space -> pattern coordinates.
            const double cx = x + 0.5, cy = y + 0.5;
            const double u = cos_t * cx + sin_t * cy;
            const double v = -sin_t * cx + cos_t * cy;
            rotated.set(x, y, static_cast<uint8_t>(std::clamp(pattern(u, v), 0.0, 255.0)));
        }
    }

    const int n = 6;
    const double y_line = 60.0, h = 40.0;
    LineModel upright_model;
    upright_model.kind = LineModelKind::order1;
    upright_model.lines = {{0.0, 1.0, -y_line}};
    upright_model.height = h;
    TextPolygon upright_poly;
    for (int i = 0; i < n; ++i) upright_poly.points.push_back({30.0 + 50.0 * i, y_line - h / 2});
    for (int i = n - 1; i >= 0; --i)
        upright_poly.points.push_back({30.0 + 50.0 * i, y_line + h / 2});

    auto rotate = [&](Point p) {
        return Point{cos_t * p.x - sin_t * p.y, sin_t * p.x + cos_t * p.y};
    };
    LineModel rot_model = upright_model;
    // Line through rotated points with normal rotated accordingly.
    rot_model.lines = {{-sin_t * 0.0 + cos_t * 0.0, 0.0, 0.0}};
    {
        const Point normal = rotate({0.0, 1.0});
        const Point on_line = rotate({0.0, y_line});
        rot_model.lines[0] = {normal.x, normal.y,
                              -(normal.x * on_line.x + normal.y * on_line.y)};
    }
    TextPolygon rot_poly;
    for (const Point& p : upright_poly.points) rot_poly.points.push_back(rotate(p));

    const RectifiedStrip a = rectify_strip(upright, upright_poly, upright_model);
    const RectifiedStrip b = rectify_strip(rotated, rot_poly, rot_model);
    REQUIRE(a.raster.width == b.raster.width);
    double mad = 0.0;
    int count = 0;
    for (int py = 0; py < 32; ++py) {
        for (int px = 0; px < a.raster.width; ++px) {
            mad += std::abs(static_cast<double>(a.raster.at(px, py)) - b.raster.at(px, py));
            ++count;
        }
    }
    mad /= count;
    CHECK(mad <= 2.0);
}

TEST_CASE("rectify_strip: degenerate polygons are rejected") {
    RasterImage img(50, 50);
    LineModel model;
    model.lines = {{0, 1, -10}};
    model.height = 8.0;
    TextPolygon poly;
    poly.points = {{0, 6}, {0, 14}};  // single char
    CHECK_THROWS_AS(rectify_strip(img, poly, model), std::invalid_argument);
    model.height = 0.0;
    TextPolygon poly2;
    poly2.points = {{0, 6}, {10, 6}, {10, 14}, {0, 14}};
    CHECK_THROWS_AS(rectify_strip(img, poly2, model), std::invalid_argument);
}

namespace {

RectifiedStrip make_strip(int width, const std::vector<std::pair<int, int>>& ink_runs) {
    RectifiedStrip strip;
    strip.raster = RasterImage(width, kStripHeight, 0);
    for (const auto& [lo, hi] : ink_runs)
        for (int x = lo; x <= hi; ++x)
            for (int y = 8; y < 24; ++y) strip.raster.set(x, y, 255);
    // Identity-like transform so cuts and quads are well-defined.
    const std::vector<Point> pts = {{0, 0}, {static_cast<double>(width), 0},
                                    {static_cast<double>(width), 32}, {0, 32}};
    strip.strip_to_source = tps_fit(pts, pts);
    return strip;
}

}  // namespace

TEST_CASE("partition_words: blank middle third gives two words") {
    const RectifiedStrip strip = make_strip(90, {{0, 29}, {60, 89}});
    const WordPartition p = partition_words(strip, PartitionParams{});
    REQUIRE(p.intervals.size() == 2);
    CHECK(p.intervals[0] == std::pair<int, int>{0, 29});
    CHECK(p.intervals[1] == std::pair<int, int>{60, 89});
    REQUIRE(p.cuts.size() == 1);
    CHECK(p.cuts[0][0].x == doctest::Approx(45.0).epsilon(0.05));
    REQUIRE(p.word_quads.size() == 2);
    CHECK(p.word_quads[0][0].x == doctest::Approx(0.0).scale(1).epsilon(1e-6));
}

TEST_CASE("partition_words: no sub-threshold run gives one interval") {
    const RectifiedStrip strip = make_strip(80, {{0, 79}});
    const WordPartition p = partition_words(strip, PartitionParams{});
    REQUIRE(p.intervals.size() == 1);
    CHECK(p.intervals[0] == std::pair<int, int>{0, 79});
    CHECK(p.cuts.empty());
}

TEST_CASE("partition_words: short gaps do not separate") {
    // 10-column gap < min_gap_frac * 32 = 16.
    const RectifiedStrip strip = make_strip(80, {{0, 34}, {45, 79}});
    const WordPartition p = partition_words(strip, PartitionParams{});
    CHECK(p.intervals.size() == 1);
}

TEST_CASE("partition_words: blank strip gives nothing") {
    const RectifiedStrip strip = make_strip(60, {});
    const WordPartition p = partition_words(strip, PartitionParams{});
    CHECK(p.intervals.empty());
    CHECK(p.cuts.empty());
}

TEST_CASE("partition_words: intervals disjoint, ordered, covering inked columns") {
    TestRng rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<int, int>> runs;
        int x = rng.uniform_int(0, 10);
        const int width = 300;
        while (x < width - 12) {
            const int len = rng.uniform_int(4, 60);
            const int hi = std::min(width - 1, x + len);
            runs.push_back({x, hi});
            x = hi + 1 + rng.uniform_int(2, 40);
        }
        const RectifiedStrip strip = make_strip(width, runs);
        const WordPartition p = partition_words(strip, PartitionParams{});
        for (size_t i = 1; i < p.intervals.size(); ++i)
            CHECK(p.intervals[i - 1].second < p.intervals[i].first);
        // Every inked column lies inside some interval.
        for (const auto& [lo, hi] : runs) {
            for (int col = lo; col <= hi; ++col) {
                bool covered = false;
                for (const auto& [a, b] : p.intervals)
                    if (col >= a && col <= b) covered = true;
                CHECK(covered);
            }
        }
    }
}

TEST_CASE("pgm: round trip and header parsing") {
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "textflow_pgm_test.pgm";
    RasterImage img(17, 9);
    for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<uint8_t>(i * 7);
    write_pgm(img, tmp.string());
    const RasterImage back = read_pgm(tmp.string());
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
    fs::remove(tmp);

    CHECK_THROWS_AS(read_pgm((fs::temp_directory_path() / "missing.pgm").string()), ParseError);
}
