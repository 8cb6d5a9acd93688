#pragma once

// Shared helpers for the unit suites: random images, brute-force oracles,
// and scratch directories.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "signsynth.hpp"

namespace fx {

using namespace signsynth;

inline RasterImage random_image(Rng& rng, int w, int h, bool random_alpha = true) {
    RasterImage img(w, h);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    if (!random_alpha) {
        auto px = img.pixels();
        for (std::size_t i = 3; i < px.size(); i += 4) px[i] = 255;
    }
    return img;
}

/// Opaque mid-tone texture; no channel reaches 0 or 255.
inline RasterImage textured(int w, int h, std::uint64_t seed = 1) {
    Rng rng(RngKey{seed, 0, Stage::Effect});
    RasterImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set_pixel(x, y,
                          {static_cast<std::uint8_t>(40 + (x * 7 + y * 3) % 120 + rng.uniform_int(0, 20)),
                           static_cast<std::uint8_t>(60 + (x * 5) % 100 + rng.uniform_int(0, 20)),
                           static_cast<std::uint8_t>(50 + (y * 11) % 110 + rng.uniform_int(0, 20)), 255});
    return img;
}

/// Opaque disc on a transparent canvas, `margin` pixels of clear border.
inline RasterImage disc_sprite(int size, int margin, Rgba color = {200, 30, 40, 255}) {
    RasterImage img(size, size);
    const double c = size / 2.0, r = size / 2.0 - margin;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x + 0.5 - c, y + 0.5 - c) <= r) img.set_pixel(x, y, color);
    return img;
}

/// Reference bbox: the definition, scanned pixel by pixel.
inline std::optional<PixelRect> scan_bbox(const RasterImage& img) {
    int x0 = img.width(), y0 = img.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img.alpha(x, y) > 0) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return std::nullopt;
    return PixelRect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// Crossing-number test for a point against a closed polygon.
inline bool point_in_polygon(double px, double py, const std::vector<Point2>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > py) != (b.y > py)) {
            const double xi = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (px < xi) in = !in;
        }
    }
    return in;
}

inline double luminance_sum(const RasterImage& img) {
    double s = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const Rgba p = img.pixel(x, y);
            s += 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
        }
    return s;
}

/// Alpha-weighted coverage computed directly from the composited obstacle:
/// resize, apply opacity, and sum alpha over the box.
inline double coverage_oracle(const PixelRect& box, const ObstacleAsset& ob, const OcclusionParams& p) {
    const RasterImage sized = resize_bilinear(ob.cutout, p.width, p.height);
    double sum = 0;
    for (int y = box.y; y < box.bottom(); ++y)
        for (int x = box.x; x < box.right(); ++x) {
            const int ox = x - p.x, oy = y - p.y;
            if (ox < 0 || oy < 0 || ox >= sized.width() || oy >= sized.height()) continue;
            sum += std::round(sized.alpha(ox, oy) * p.opacity);
        }
    return sum / (255.0 * static_cast<double>(box.area()));
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "signsynth") {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                (tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    const Bytes b = read_file(p);
    return std::string(b.begin(), b.end());
}

}  // namespace fx
