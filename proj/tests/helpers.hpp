#pragma once

// Shared fixtures for the test suites: deterministic generators and small
// builders. Oracles that check a specific module live in that module's test
// file, not here.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "textflow/geom.hpp"
#include "textflow/ingest.hpp"

namespace tftest {

using textflow::AABox;
using textflow::CharCandidate;
using textflow::Point;

class TestRng {
public:
    explicit TestRng(uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53);
    }
    int uniform_int(int lo, int hi) { return lo + static_cast<int>(uniform(0.0, hi - lo + 1)); }
    double normal() {
        double u1 = uniform(1e-12, 1.0);
        const double u2 = uniform(0.0, 1.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 eng_;
};

inline AABox box_at(Point center, double w, double h) {
    return {center.x - w / 2, center.y - h / 2, center.x + w / 2, center.y + h / 2};
}

inline CharCandidate cand(int id, Point center, double w, double h, double score) {
    CharCandidate c;
    c.box = box_at(center, w, h);
    c.score = score;
    c.id = id;
    return c;
}

/// Equally spaced chars along a straight line at the given angle.
inline std::vector<CharCandidate> straight_line_chars(Point start, double angle_rad, int n,
                                                      double spacing, double w, double h,
                                                      double score, int first_id = 0) {
    std::vector<CharCandidate> out;
    const Point dir{std::cos(angle_rad), std::sin(angle_rad)};
    for (int i = 0; i < n; ++i)
        out.push_back(cand(first_id + i, start + (i * spacing) * dir, w, h, score));
    return out;
}

}  // namespace tftest
