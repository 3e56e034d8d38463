#include "textflow/raster.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "textflow/util.hpp"

namespace textflow {

double RasterImage::sample(double x, double y) const {
    const double fx = x - 0.5;
    const double fy = y - 0.5;
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0;
    const double ay = fy - y0;
    auto px = [&](int xi, int yi) -> double {
        if (xi < 0 || xi >= width || yi < 0 || yi >= height) return 0.0;
        return static_cast<double>(at(xi, yi));
    };
    return (1.0 - ax) * (1.0 - ay) * px(x0, y0) + ax * (1.0 - ay) * px(x0 + 1, y0) +
           (1.0 - ax) * ay * px(x0, y0 + 1) + ax * ay * px(x0 + 1, y0 + 1);
}

namespace {

int read_pnm_int(std::istream& in, const std::string& path) {
    // Skips whitespace and '#' comment lines between header tokens.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw ParseError(path + ": malformed PGM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

RasterImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw ParseError(path + ": not a binary PGM (P5)");
    const int w = read_pnm_int(in, path);
    const int h = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (w <= 0 || h <= 0) throw ParseError(path + ": bad PGM dimensions");
    if (maxval != 255) throw ParseError(path + ": only maxval 255 supported");
    RasterImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw ParseError(path + ": truncated PGM payload");
    return img;
}

void write_pgm(const RasterImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw ParseError(path + ": write failed");
}

}  // namespace textflow
