#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace textflow {

/// Grayscale raster, row-major, one byte per pixel.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    RasterImage() = default;
    RasterImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    void set(int x, int y, uint8_t v) {
        if (x >= 0 && x < width && y >= 0 && y < height)
            pixels[static_cast<size_t>(y) * width + x] = v;
    }

    /// Bilinear sample at pixel-center convention: pixel (i, j) sits at
    /// (i + 0.5, j + 0.5). Out-of-image area reads as 0.
    double sample(double x, double y) const;
};

/// Binary PGM (P5), maxval 255.
RasterImage read_pgm(const std::string& path);
void write_pgm(const RasterImage& img, const std::string& path);

}  // namespace textflow
