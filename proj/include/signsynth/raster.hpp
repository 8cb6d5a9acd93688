#pragma once

// RGBA8 raster primitives shared by every stage: the image carrier,
// straight-alpha "over" compositing, bilinear resampling and alpha support
// boxes. All arithmetic runs in double and is quantized once per output with
// round-half-away-from-zero.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signsynth/error.hpp"

namespace signsynth {

inline constexpr int kMaxDimension = 1 << 16;

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;

    friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Round half away from zero and clamp into [0, 255].
inline std::uint8_t quantize(double v) {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::round(v));
}

struct PixelPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Axis-aligned pixel rectangle, top-left plus extents.
struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    long long area() const { return static_cast<long long>(w) * h; }
    bool empty() const { return w <= 0 || h <= 0; }

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

inline PixelRect intersect(const PixelRect& a, const PixelRect& b) {
    const int x0 = std::max(a.x, b.x);
    const int y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.right(), b.right());
    const int y1 = std::min(a.bottom(), b.bottom());
    if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
    return {x0, y0, x1 - x0, y1 - y0};
}

/// Detection label geometry: class index in [0,5] plus a pixel rectangle.
struct BBox {
    int class_index = 0;
    PixelRect rect;

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Row-major RGBA8 image. Width and height are always >= 1.
class RasterImage {
public:
    RasterImage() : RasterImage(1, 1) {}

    RasterImage(int width, int height, Rgba fill = {}) : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw ArgumentError("image dimensions must be >= 1, got " + std::to_string(width) +
                                "x" + std::to_string(height));
        if (width > kMaxDimension || height > kMaxDimension)
            throw ArgumentError("image dimension exceeds 65536");
        pixels_.resize(static_cast<std::size_t>(width) * height * 4);
        for (std::size_t i = 0; i < pixels_.size(); i += 4) {
            pixels_[i] = fill.r;
            pixels_[i + 1] = fill.g;
            pixels_[i + 2] = fill.b;
            pixels_[i + 3] = fill.a;
        }
    }

    RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
        : RasterImage(width, height) {
        if (pixels.size() != pixels_.size())
            throw ArgumentError("pixel buffer length does not match width*height*4");
        pixels_ = std::move(pixels);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    PixelRect bounds() const { return {0, 0, width_, height_}; }

    std::span<std::uint8_t> pixels() { return pixels_; }
    std::span<const std::uint8_t> pixels() const { return pixels_; }

    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 4;
    }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Rgba pixel(int x, int y) const {
        const auto i = index(x, y);
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2], pixels_[i + 3]};
    }
    void set_pixel(int x, int y, Rgba c) {
        const auto i = index(x, y);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
        pixels_[i + 3] = c.a;
    }
    std::uint8_t alpha(int x, int y) const { return pixels_[index(x, y) + 3]; }

    bool fully_opaque() const {
        for (std::size_t i = 3; i < pixels_.size(); i += 4)
            if (pixels_[i] != 255) return false;
        return true;
    }
    bool fully_transparent() const {
        for (std::size_t i = 3; i < pixels_.size(); i += 4)
            if (pixels_[i] != 0) return false;
        return true;
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

namespace detail {

/// Four-plane double buffer used when a stage needs several arithmetic
/// steps before its single quantization.
struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // interleaved RGBA

    FloatImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 4) {}

    explicit FloatImage(const RasterImage& img)
        : width(img.width()), height(img.height()), data(img.pixels().begin(), img.pixels().end()) {}

    double* at(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 4]; }
    const double* at(int x, int y) const {
        return &data[(static_cast<std::size_t>(y) * width + x) * 4];
    }

    RasterImage quantized() const {
        std::vector<std::uint8_t> out(data.size());
        std::transform(data.begin(), data.end(), out.begin(), quantize);
        return RasterImage(width, height, std::move(out));
    }
};

inline int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

/// Bilinear sample of all four straight channels; (fx, fy) in pixel-index
/// space (pixel i has its center at i). Out-of-range taps clamp to the edge.
inline std::array<double, 4> sample_clamped(const RasterImage& img, double fx, double fy) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0;
    const double ty = fy - y0;
    const int xa = clamp_index(x0, img.width()), xb = clamp_index(x0 + 1, img.width());
    const int ya = clamp_index(y0, img.height()), yb = clamp_index(y0 + 1, img.height());
    const auto px = img.pixels();
    const auto p00 = img.index(xa, ya), p10 = img.index(xb, ya);
    const auto p01 = img.index(xa, yb), p11 = img.index(xb, yb);
    std::array<double, 4> out{};
    for (int c = 0; c < 4; ++c) {
        const double top = px[p00 + c] * (1.0 - tx) + px[p10 + c] * tx;
        const double bot = px[p01 + c] * (1.0 - tx) + px[p11 + c] * tx;
        out[c] = top * (1.0 - ty) + bot * ty;
    }
    return out;
}

/// Bilinear sample treating everything outside the image as transparent.
/// Colour is alpha-weighted so transparent neighbours do not darken edges.
inline std::array<double, 4> sample_transparent(const RasterImage& img, double fx, double fy) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0;
    const double ty = fy - y0;
    const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    double rgb[3] = {0, 0, 0};
    double alpha = 0;
    const auto px = img.pixels();
    for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0 || !img.contains(xs[k], ys[k])) continue;
        const auto i = img.index(xs[k], ys[k]);
        const double wa = weights[k] * px[i + 3];
        rgb[0] += wa * px[i];
        rgb[1] += wa * px[i + 1];
        rgb[2] += wa * px[i + 2];
        alpha += wa;
    }
    if (alpha <= 0.0) return {0, 0, 0, 0};
    return {rgb[0] / alpha, rgb[1] / alpha, rgb[2] / alpha, alpha};
}

}  // namespace detail

/// Straight-alpha over, clipped to `bg`. Pixels of `fg` falling outside `bg`
/// are ignored. Result colour = (Cf*af + Cb*ab*(1-af)) / aout.
inline RasterImage blend_over_clipped(const RasterImage& fg, const RasterImage& bg, PixelPoint offset) {
    RasterImage out = bg;
    const PixelRect dst = intersect(bg.bounds(), {offset.x, offset.y, fg.width(), fg.height()});
    if (dst.empty()) return out;
    auto op = out.pixels();
    const auto fp = fg.pixels();
    for (int y = dst.y; y < dst.bottom(); ++y) {
        for (int x = dst.x; x < dst.right(); ++x) {
            const auto fi = fg.index(x - offset.x, y - offset.y);
            const auto bi = out.index(x, y);
            const double af = fp[fi + 3] / 255.0;
            if (af == 0.0) continue;
            const double ab = op[bi + 3] / 255.0;
            const double aout = af + ab * (1.0 - af);
            for (int c = 0; c < 3; ++c) {
                const double v = (fp[fi + c] * af + op[bi + c] * ab * (1.0 - af)) / aout;
                op[bi + c] = quantize(v);
            }
            op[bi + 3] = quantize(aout * 255.0);
        }
    }
    return out;
}

/// Composite `fg` over `bg` at `offset`; `fg` must lie fully inside `bg`.
/// With an opaque background this reduces to out = a*fg + (1-a)*bg per channel
/// and the output alpha stays 255.
inline RasterImage alpha_over(const RasterImage& fg, const RasterImage& bg, PixelPoint offset) {
    if (offset.x < 0 || offset.y < 0 || offset.x + fg.width() > bg.width() ||
        offset.y + fg.height() > bg.height())
        throw PlacementError("sprite " + std::to_string(fg.width()) + "x" +
                             std::to_string(fg.height()) + " at (" + std::to_string(offset.x) +
                             "," + std::to_string(offset.y) + ") does not fit in " +
                             std::to_string(bg.width()) + "x" + std::to_string(bg.height()));
    return blend_over_clipped(fg, bg, offset);
}

/// Bilinear resize with pixel-center alignment and edge-clamped taps.
inline RasterImage resize_bilinear(const RasterImage& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1)
        throw ArgumentError("resize target must be >= 1x1, got " + std::to_string(new_w) + "x" +
                            std::to_string(new_h));
    if (new_w == img.width() && new_h == img.height()) return img;
    RasterImage out(new_w, new_h);
    const double sx = static_cast<double>(img.width()) / new_w;
    const double sy = static_cast<double>(img.height()) / new_h;
    auto op = out.pixels();
    for (int y = 0; y < new_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < new_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const auto s = detail::sample_clamped(img, fx, fy);
            const auto i = out.index(x, y);
            for (int c = 0; c < 4; ++c) op[i + c] = quantize(s[c]);
        }
    }
    return out;
}

/// Smallest rectangle holding every pixel with alpha > 0, or nullopt.
inline std::optional<PixelRect> tight_alpha_bbox(const RasterImage& img) {
    int x0 = img.width(), y0 = img.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.alpha(x, y) == 0) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return PixelRect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// Copy of the window `r`, which must lie inside the image.
inline RasterImage crop_window(const RasterImage& img, const PixelRect& r) {
    if (r.empty() || r.x < 0 || r.y < 0 || r.right() > img.width() || r.bottom() > img.height())
        throw ArgumentError("crop window outside image");
    RasterImage out(r.w, r.h);
    const auto src = img.pixels();
    auto dst = out.pixels();
    for (int y = 0; y < r.h; ++y) {
        const auto s = img.index(r.x, r.y + y);
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(s), static_cast<std::size_t>(r.w) * 4,
                    dst.begin() + static_cast<std::ptrdiff_t>(out.index(0, y)));
    }
    return out;
}

}  // namespace signsynth
