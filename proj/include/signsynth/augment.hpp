#pragma once

// Sign augmentation: the geometric, colour and deformation operators applied
// to sign sprites, plus variant sampling and rendering.
//
// Every sign yields 11 variants: index 0 is the untouched sprite, indices
// 1-5 apply one geometric op each (rotate, shear, scale, crop, translate),
// indices 6-10 one colour op each (brightness, noise, gaussian blur, linear
// contrast, median blur). Each non-original variant is then passed through
// one deformation drawn uniformly from {none, piecewise affine, perspective,
// JPEG}. Deformations compose onto a variant; they do not add variants.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signsynth/error.hpp"
#include "signsynth/homography.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/raster.hpp"
#include "signsynth/rng.hpp"

namespace signsynth {

// ---------------------------------------------------------------------------
// Sign classes and assets

enum class SignClass : int {
    Informational = 0,
    Priority = 1,
    Prohibitory = 2,
    Regulatory = 3,
    Service = 4,
    Warning = 5,
};

inline constexpr int kNumClasses = 6;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "informational", "priority", "prohibitory", "regulatory", "service", "warning"};

inline std::string_view class_name(SignClass c) { return kClassNames[static_cast<int>(c)]; }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

inline std::optional<SignClass> parse_sign_class(std::string_view name) {
    const std::string lower = to_lower(name);
    for (int i = 0; i < kNumClasses; ++i)
        if (kClassNames[i] == lower) return static_cast<SignClass>(i);
    return std::nullopt;
}

struct SignAsset {
    std::string id;
    SignClass cls = SignClass::Informational;
    RasterImage image;
};

inline void validate_sign(const SignAsset& sign) {
    if (sign.image.fully_transparent())
        throw AssetError("sign '" + sign.id + "' has no pixel with alpha > 0");
}

// ---------------------------------------------------------------------------
// Parameter limits

/// Hard limits accepted by the operators.
namespace limits {
inline constexpr double kRotateDeg = 25.0;
inline constexpr double kShearDeg = 16.0;
inline constexpr double kScaleMin = 0.80, kScaleMax = 1.20;
inline constexpr double kCropMax = 0.30;
inline constexpr double kTranslateMax = 0.10;
inline constexpr double kBrightnessMin = 0.50, kBrightnessMax = 2.00;
inline constexpr int kNoiseMax = 80;
inline constexpr double kSigmaMax = 10.0;
inline constexpr double kContrastMin = 0.25, kContrastMax = 1.00;
inline constexpr double kStrengthMax = 1.0;
inline constexpr int kJpegStrengthMax = 85;
}  // namespace limits

namespace detail {

inline void require_range(double v, double lo, double hi, const char* what) {
    if (!(v >= lo && v <= hi))
        throw ParameterError(std::string(what) + " " + std::to_string(v) + " outside [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Geometric operators

/// Rotation about the image centre. The canvas grows to the rotated extent
/// and uncovered pixels are transparent. Positive angles turn counter-clockwise
/// on screen.
inline RasterImage rotate(const RasterImage& img, double angle_deg) {
    detail::require_range(angle_deg, -limits::kRotateDeg, limits::kRotateDeg, "rotation angle");
    if (angle_deg == 0.0) return img;
    const double th = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    const double W = img.width(), H = img.height();
    const int out_w = static_cast<int>(std::ceil(W * std::abs(c) + H * std::abs(s) - 1e-9));
    const int out_h = static_cast<int>(std::ceil(W * std::abs(s) + H * std::abs(c) - 1e-9));
    RasterImage out(out_w, out_h);
    auto op = out.pixels();
    for (int y = 0; y < out_h; ++y) {
        const double py = y + 0.5 - out_h / 2.0;
        for (int x = 0; x < out_w; ++x) {
            const double px = x + 0.5 - out_w / 2.0;
            const double sx = c * px - s * py + W / 2.0 - 0.5;
            const double sy = s * px + c * py + H / 2.0 - 0.5;
            const auto v = detail::sample_transparent(img, sx, sy);
            const auto i = out.index(x, y);
            for (int k = 0; k < 4; ++k) op[i + k] = quantize(v[k]);
        }
    }
    return out;
}

/// Horizontal shear about the centre: x' = x + tan(angle) * y. The canvas
/// widens to fit and uncovered pixels are transparent.
inline RasterImage shear(const RasterImage& img, double shear_deg) {
    detail::require_range(shear_deg, -limits::kShearDeg, limits::kShearDeg, "shear angle");
    if (shear_deg == 0.0) return img;
    const double t = std::tan(shear_deg * std::numbers::pi / 180.0);
    const double W = img.width(), H = img.height();
    const int out_w = static_cast<int>(std::ceil(W + std::abs(t) * H - 1e-9));
    const int out_h = img.height();
    RasterImage out(out_w, out_h);
    auto op = out.pixels();
    for (int y = 0; y < out_h; ++y) {
        const double py = y + 0.5 - H / 2.0;
        for (int x = 0; x < out_w; ++x) {
            const double px = x + 0.5 - out_w / 2.0;
            const double sx = px - t * py + W / 2.0 - 0.5;
            const auto v = detail::sample_transparent(img, sx, y);
            const auto i = out.index(x, y);
            for (int k = 0; k < 4; ++k) op[i + k] = quantize(v[k]);
        }
    }
    return out;
}

/// Uniform resize by `factor`; each side becomes round(side * factor), min 1.
inline RasterImage scale(const RasterImage& img, double factor) {
    detail::require_range(factor, limits::kScaleMin, limits::kScaleMax, "scale factor");
    const int w = std::max(1, static_cast<int>(std::lround(img.width() * factor)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height() * factor)));
    return resize_bilinear(img, w, h);
}

/// Remove round(fraction * side) pixels from each side independently.
inline RasterImage crop(const RasterImage& img, double left_f, double right_f, double top_f,
                        double bottom_f) {
    detail::require_range(left_f, 0.0, limits::kCropMax, "crop left");
    detail::require_range(right_f, 0.0, limits::kCropMax, "crop right");
    detail::require_range(top_f, 0.0, limits::kCropMax, "crop top");
    detail::require_range(bottom_f, 0.0, limits::kCropMax, "crop bottom");
    const int l = static_cast<int>(std::lround(left_f * img.width()));
    const int r = static_cast<int>(std::lround(right_f * img.width()));
    const int t = static_cast<int>(std::lround(top_f * img.height()));
    const int b = static_cast<int>(std::lround(bottom_f * img.height()));
    const int w = std::max(1, img.width() - l - r);
    const int h = std::max(1, img.height() - t - b);
    return crop_window(img, {std::min(l, img.width() - 1), std::min(t, img.height() - 1), w, h});
}

/// Shift content by round(fraction * side) pixels inside a same-size canvas.
inline RasterImage translate(const RasterImage& img, double dx_f, double dy_f) {
    detail::require_range(dx_f, -limits::kTranslateMax, limits::kTranslateMax, "translate x");
    detail::require_range(dy_f, -limits::kTranslateMax, limits::kTranslateMax, "translate y");
    const int dx = static_cast<int>(std::lround(dx_f * img.width()));
    const int dy = static_cast<int>(std::lround(dy_f * img.height()));
    if (dx == 0 && dy == 0) return img;
    RasterImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img.contains(x - dx, y - dy)) out.set_pixel(x, y, img.pixel(x - dx, y - dy));
    return out;
}

// ---------------------------------------------------------------------------
// Colour operators

/// Multiply RGB by `factor` with clamping; alpha untouched.
inline RasterImage brightness(const RasterImage& img, double factor) {
    detail::require_range(factor, limits::kBrightnessMin, limits::kBrightnessMax, "brightness");
    if (factor == 1.0) return img;
    RasterImage out = img;
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); i += 4)
        for (int c = 0; c < 3; ++c) px[i + c] = quantize(px[i + c] * factor);
    return out;
}

/// Add independent integer noise uniform in [-amplitude, amplitude] to every
/// RGB sample (row-major, R then G then B), clamping to [0,255].
inline RasterImage add_uniform_noise(const RasterImage& img, int amplitude, Rng& rng) {
    if (amplitude < 1 || amplitude > limits::kNoiseMax)
        throw ParameterError("noise amplitude " + std::to_string(amplitude) + " outside [1, 80]");
    RasterImage out = img;
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); i += 4)
        for (int c = 0; c < 3; ++c)
            px[i + c] = quantize(px[i + c] + static_cast<double>(rng.uniform_int(-amplitude, amplitude)));
    return out;
}

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

namespace detail {

inline void blur_float(FloatImage& f, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    FloatImage tmp(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double acc[4] = {0, 0, 0, 0};
            for (int j = -r; j <= r; ++j) {
                const double* s = f.at(clamp_index(x + j, f.width), y);
                for (int c = 0; c < 4; ++c) acc[c] += k[j + r] * s[c];
            }
            std::copy_n(acc, 4, tmp.at(x, y));
        }
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double acc[4] = {0, 0, 0, 0};
            for (int j = -r; j <= r; ++j) {
                const double* s = tmp.at(x, clamp_index(y + j, f.height));
                for (int c = 0; c < 4; ++c) acc[c] += k[j + r] * s[c];
            }
            std::copy_n(acc, 4, f.at(x, y));
        }
}

}  // namespace detail

/// Separable Gaussian blur over all four channels with edge clamping.
inline RasterImage gaussian_blur(const RasterImage& img, double sigma) {
    detail::require_range(sigma, 1e-12, limits::kSigmaMax, "gaussian sigma");
    detail::FloatImage f(img);
    detail::blur_float(f, sigma);
    return f.quantized();
}

/// out = round(128 + alpha * (in - 128)) on RGB.
inline RasterImage linear_contrast(const RasterImage& img, double alpha) {
    detail::require_range(alpha, limits::kContrastMin, limits::kContrastMax, "contrast alpha");
    if (alpha == 1.0) return img;
    RasterImage out = img;
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); i += 4)
        for (int c = 0; c < 3; ++c) px[i + c] = quantize(128.0 + alpha * (px[i + c] - 128.0));
    return out;
}

/// k x k median per RGB channel, edge-clamped window, k in {3, 5}.
inline RasterImage median_blur(const RasterImage& img, int k) {
    if (k != 3 && k != 5) throw ParameterError("median kernel must be 3 or 5");
    const int r = k / 2;
    RasterImage out = img;
    auto op = out.pixels();
    const auto ip = img.pixels();
    std::vector<std::uint8_t> window(static_cast<std::size_t>(k) * k);
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                std::size_t n = 0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx)
                        window[n++] = ip[img.index(detail::clamp_index(x + dx, img.width()),
                                                   detail::clamp_index(y + dy, img.height())) + c];
                std::nth_element(window.begin(), mid, window.end());
                op[out.index(x, y) + c] = *mid;
            }
    return out;
}

// ---------------------------------------------------------------------------
// Deformations

/// Piecewise-affine warp over a 4x4 control grid. The four interior points
/// move by uniform offsets in [-d, d] per axis with d = strength * min(W,H) / 20;
/// border points stay fixed. Each grid cell is split into two triangles and
/// every output pixel is inverse-mapped through its triangle.
inline RasterImage piecewise_affine(const RasterImage& img, double strength, Rng& rng) {
    detail::require_range(strength, 0.0, limits::kStrengthMax, "piecewise-affine strength");
    if (strength == 0.0) return img;
    const double W = img.width(), H = img.height();
    const double d = strength * std::min(W, H) / 20.0;
    Point2 src[4][4], dst[4][4];
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) src[j][i] = dst[j][i] = {i * W / 3.0, j * H / 3.0};
    for (int j = 1; j <= 2; ++j)
        for (int i = 1; i <= 2; ++i) {
            dst[j][i].x += rng.uniform(-d, d);
            dst[j][i].y += rng.uniform(-d, d);
        }

    RasterImage out(img.width(), img.height());
    std::vector<std::uint8_t> done(static_cast<std::size_t>(img.width()) * img.height(), 0);
    auto op = out.pixels();
    auto fill_triangle = [&](Point2 a, Point2 b, Point2 c, Point2 sa, Point2 sb, Point2 sc) {
        const double det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
        if (std::abs(det) < 1e-12) return;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))) - 1);
        const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))) - 1);
        const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const std::size_t id = static_cast<std::size_t>(y) * img.width() + x;
                if (done[id]) continue;
                const double px = x + 0.5, py = y + 0.5;
                const double l0 = ((b.y - c.y) * (px - c.x) + (c.x - b.x) * (py - c.y)) / det;
                const double l1 = ((c.y - a.y) * (px - c.x) + (a.x - c.x) * (py - c.y)) / det;
                const double l2 = 1.0 - l0 - l1;
                constexpr double eps = -1e-9;
                if (l0 < eps || l1 < eps || l2 < eps) continue;
                const double sx = l0 * sa.x + l1 * sb.x + l2 * sc.x;
                const double sy = l0 * sa.y + l1 * sb.y + l2 * sc.y;
                const auto v = detail::sample_transparent(img, sx - 0.5, sy - 0.5);
                const auto i = out.index(x, y);
                for (int k = 0; k < 4; ++k) op[i + k] = quantize(v[k]);
                done[id] = 1;
            }
    };
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            fill_triangle(dst[j][i], dst[j][i + 1], dst[j + 1][i + 1], src[j][i], src[j][i + 1],
                          src[j + 1][i + 1]);
            fill_triangle(dst[j][i], dst[j + 1][i + 1], dst[j + 1][i], src[j][i],
                          src[j + 1][i + 1], src[j + 1][i]);
        }
    // Numerically uncovered pixel centres fall back to the identity sample.
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (!done[static_cast<std::size_t>(y) * img.width() + x]) out.set_pixel(x, y, img.pixel(x, y));
    return out;
}

/// Four image corners (0,0), (W,0), (W,H), (0,H) in continuous coordinates.
inline std::array<Point2, 4> image_corners(int w, int h) {
    return {Point2{0, 0}, Point2{static_cast<double>(w), 0},
            Point2{static_cast<double>(w), static_cast<double>(h)},
            Point2{0, static_cast<double>(h)}};
}

/// Target corners for a perspective warp: each corner moved by uniform
/// offsets in [-d, d] per axis, d = strength * min(W,H) / 10, corners in
/// order TL, TR, BR, BL with x drawn before y.
inline std::array<Point2, 4> sample_perspective_corners(int w, int h, double strength, Rng& rng) {
    const double d = strength * std::min(w, h) / 10.0;
    auto corners = image_corners(w, h);
    for (auto& p : corners) {
        p.x += rng.uniform(-d, d);
        p.y += rng.uniform(-d, d);
    }
    return corners;
}

/// Warp `img` by the homography taking its corners to `targets`, same canvas,
/// inverse-mapped bilinear sampling, transparent outside the source.
inline RasterImage warp_to_corners(const RasterImage& img, const std::array<Point2, 4>& targets) {
    const Homography inv = solve_homography(image_corners(img.width(), img.height()), targets).inverse();
    RasterImage out(img.width(), img.height());
    auto op = out.pixels();
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const Point2 s = inv.apply({x + 0.5, y + 0.5});
            const auto v = detail::sample_transparent(img, s.x - 0.5, s.y - 0.5);
            const auto i = out.index(x, y);
            for (int k = 0; k < 4; ++k) op[i + k] = quantize(v[k]);
        }
    return out;
}

inline RasterImage perspective_warp(const RasterImage& img, double strength, Rng& rng) {
    detail::require_range(strength, 0.0, limits::kStrengthMax, "perspective strength");
    if (strength == 0.0) return img;
    return warp_to_corners(img, sample_perspective_corners(img.width(), img.height(), strength, rng));
}

/// Encode RGB as baseline JPEG at quality 100 - strength and decode it back.
/// Alpha passes through untouched.
inline RasterImage jpeg_roundtrip(const RasterImage& img, int strength) {
    if (strength < 0 || strength > limits::kJpegStrengthMax)
        throw ParameterError("JPEG strength " + std::to_string(strength) + " outside [0, 85]");
    RasterImage decoded = decode_jpeg(encode_jpeg(img, 100 - strength));
    auto dp = decoded.pixels();
    const auto ip = img.pixels();
    for (std::size_t i = 3; i < dp.size(); i += 4) dp[i] = ip[i];
    return decoded;
}

// ---------------------------------------------------------------------------
// Variants

enum class VariantKind : int {
    Original = 0,
    Rotate,
    Shear,
    Scale,
    Crop,
    Translate,
    Brightness,
    Noise,
    GaussianBlur,
    LinearContrast,
    MedianBlur,
};

inline constexpr std::array<std::string_view, 11> kVariantKindNames = {
    "original", "rotate", "shear", "scale", "crop", "translate",
    "brightness", "noise", "gaussian_blur", "linear_contrast", "median_blur"};

inline std::string_view variant_kind_name(VariantKind k) { return kVariantKindNames[static_cast<int>(k)]; }

enum class Deformation : int { None = 0, PiecewiseAffine, Perspective, JpegCompression };

inline constexpr std::array<std::string_view, 4> kDeformationNames = {"none", "piecewise_affine",
                                                                       "perspective", "jpeg"};

inline std::string_view deformation_name(Deformation d) { return kDeformationNames[static_cast<int>(d)]; }

/// Sampled parameters of one variant. Only the fields belonging to `kind`
/// and `deformation` are meaningful; the rest keep their identity values.
struct VariantParams {
    VariantKind kind = VariantKind::Original;
    double angle_deg = 0;           // rotate
    double shear_deg = 0;           // shear
    double scale = 1;               // scale
    double crop_left = 0, crop_right = 0, crop_top = 0, crop_bottom = 0;
    double translate_x = 0, translate_y = 0;
    double brightness = 1;
    int noise_amplitude = 0;
    double blur_sigma = 0;
    double contrast = 1;
    int median_kernel = 3;

    Deformation deformation = Deformation::None;
    double deform_strength = 0;  // piecewise affine / perspective
    int jpeg_strength = 0;

    /// Seeds the noise field and the random deformation geometry.
    std::uint64_t effect_seed = 0;

    friend bool operator==(const VariantParams&, const VariantParams&) = default;
};

/// Sampling ranges. Defaults are the published augmentation tables; each
/// range may be narrowed (or, for the unit-less blur and strength values,
/// re-mapped) through configuration.
struct AugmentRanges {
    double rotate_min = -25, rotate_max = 25;
    double shear_min = -16, shear_max = 16;
    double scale_min = 0.80, scale_max = 1.20;
    double crop_max = 0.30;
    double translate_max = 0.10;
    double brightness_min = 0.50, brightness_max = 2.00;
    int noise_max = 80;
    double blur_sigma_max = 3.0;
    double contrast_min = 0.25, contrast_max = 1.00;
    std::vector<int> median_kernels = {3, 5};
    double piecewise_strength_max = 0.9;
    double perspective_strength_max = 0.9;
    int jpeg_strength_max = 85;
};

/// Throws ConfigError when a range leaves the operators' hard limits.
inline void validate_ranges(const AugmentRanges& r) {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("augment range invalid: ") + what);
    };
    check(r.rotate_min <= r.rotate_max && r.rotate_min >= -limits::kRotateDeg &&
              r.rotate_max <= limits::kRotateDeg,
          "rotate_deg must lie in [-25, 25]");
    check(r.shear_min <= r.shear_max && r.shear_min >= -limits::kShearDeg && r.shear_max <= limits::kShearDeg,
          "shear_deg must lie in [-16, 16]");
    check(r.scale_min <= r.scale_max && r.scale_min >= limits::kScaleMin && r.scale_max <= limits::kScaleMax,
          "scale must lie in [0.8, 1.2]");
    check(r.crop_max >= 0 && r.crop_max <= limits::kCropMax, "crop_max must lie in [0, 0.3]");
    check(r.translate_max >= 0 && r.translate_max <= limits::kTranslateMax,
          "translate_max must lie in [0, 0.1]");
    check(r.brightness_min <= r.brightness_max && r.brightness_min >= limits::kBrightnessMin &&
              r.brightness_max <= limits::kBrightnessMax,
          "brightness must lie in [0.5, 2.0]");
    check(r.noise_max >= 1 && r.noise_max <= limits::kNoiseMax, "noise_max must lie in [1, 80]");
    check(r.blur_sigma_max > 0 && r.blur_sigma_max <= limits::kSigmaMax, "blur_sigma_max must lie in (0, 10]");
    check(r.contrast_min <= r.contrast_max && r.contrast_min >= limits::kContrastMin &&
              r.contrast_max <= limits::kContrastMax,
          "contrast must lie in [0.25, 1.0]");
    check(!r.median_kernels.empty() &&
              std::all_of(r.median_kernels.begin(), r.median_kernels.end(),
                          [](int k) { return k == 3 || k == 5; }),
          "median_kernels must be a non-empty subset of {3, 5}");
    check(r.piecewise_strength_max > 0 && r.piecewise_strength_max <= limits::kStrengthMax,
          "piecewise_strength_max must lie in (0, 1]");
    check(r.perspective_strength_max > 0 && r.perspective_strength_max <= limits::kStrengthMax,
          "perspective_strength_max must lie in (0, 1]");
    check(r.jpeg_strength_max >= 0 && r.jpeg_strength_max <= limits::kJpegStrengthMax,
          "jpeg_strength_max must lie in [0, 85]");
}

/// Kind used by variant `index`. Indices past 10 cycle through the ten
/// non-original kinds again (balance mode asks for more than 11 variants).
inline VariantKind variant_kind_for_index(int index) {
    if (index <= 0) return VariantKind::Original;
    return static_cast<VariantKind>((index - 1) % 10 + 1);
}

/// Draw the parameters of variant `index`. Order of draws: the kind's own
/// parameters in declaration order, the deformation kind, the deformation
/// strength (when it has one), then the effect seed. Index 0 draws nothing.
inline VariantParams sample_variant_params(int index, Rng& rng, const AugmentRanges& r = {}) {
    VariantParams p;
    p.kind = variant_kind_for_index(index);
    if (p.kind == VariantKind::Original) return p;
    switch (p.kind) {
        case VariantKind::Rotate: p.angle_deg = rng.uniform(r.rotate_min, r.rotate_max); break;
        case VariantKind::Shear: p.shear_deg = rng.uniform(r.shear_min, r.shear_max); break;
        case VariantKind::Scale: p.scale = rng.uniform(r.scale_min, r.scale_max); break;
        case VariantKind::Crop:
            p.crop_left = rng.uniform(0, r.crop_max);
            p.crop_right = rng.uniform(0, r.crop_max);
            p.crop_top = rng.uniform(0, r.crop_max);
            p.crop_bottom = rng.uniform(0, r.crop_max);
            break;
        case VariantKind::Translate:
            p.translate_x = rng.uniform(-r.translate_max, r.translate_max);
            p.translate_y = rng.uniform(-r.translate_max, r.translate_max);
            break;
        case VariantKind::Brightness: p.brightness = rng.uniform(r.brightness_min, r.brightness_max); break;
        case VariantKind::Noise: p.noise_amplitude = static_cast<int>(rng.uniform_int(1, r.noise_max)); break;
        case VariantKind::GaussianBlur: p.blur_sigma = rng.uniform_open_closed(r.blur_sigma_max); break;
        case VariantKind::LinearContrast: p.contrast = rng.uniform(r.contrast_min, r.contrast_max); break;
        case VariantKind::MedianBlur:
            p.median_kernel = r.median_kernels[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(r.median_kernels.size()) - 1))];
            break;
        case VariantKind::Original: break;
    }
    p.deformation = static_cast<Deformation>(rng.uniform_int(0, 3));
    switch (p.deformation) {
        case Deformation::PiecewiseAffine: p.deform_strength = rng.uniform_open_closed(r.piecewise_strength_max); break;
        case Deformation::Perspective: p.deform_strength = rng.uniform_open_closed(r.perspective_strength_max); break;
        case Deformation::JpegCompression: p.jpeg_strength = static_cast<int>(rng.uniform_int(0, r.jpeg_strength_max)); break;
        case Deformation::None: break;
    }
    p.effect_seed = rng.next_u64();
    return p;
}

/// Check every sampled value against `r`; throws ParameterError.
inline void check_variant_params(const VariantParams& p, const AugmentRanges& r = {}) {
    using detail::require_range;
    switch (p.kind) {
        case VariantKind::Rotate: require_range(p.angle_deg, r.rotate_min, r.rotate_max, "rotation angle"); break;
        case VariantKind::Shear: require_range(p.shear_deg, r.shear_min, r.shear_max, "shear angle"); break;
        case VariantKind::Scale: require_range(p.scale, r.scale_min, r.scale_max, "scale factor"); break;
        case VariantKind::Crop:
            for (double f : {p.crop_left, p.crop_right, p.crop_top, p.crop_bottom})
                require_range(f, 0, r.crop_max, "crop fraction");
            break;
        case VariantKind::Translate:
            require_range(p.translate_x, -r.translate_max, r.translate_max, "translate x");
            require_range(p.translate_y, -r.translate_max, r.translate_max, "translate y");
            break;
        case VariantKind::Brightness: require_range(p.brightness, r.brightness_min, r.brightness_max, "brightness"); break;
        case VariantKind::Noise: require_range(p.noise_amplitude, 1, r.noise_max, "noise amplitude"); break;
        case VariantKind::GaussianBlur:
            if (!(p.blur_sigma > 0 && p.blur_sigma <= r.blur_sigma_max)) throw ParameterError("blur sigma out of range");
            break;
        case VariantKind::LinearContrast: require_range(p.contrast, r.contrast_min, r.contrast_max, "contrast alpha"); break;
        case VariantKind::MedianBlur:
            if (std::find(r.median_kernels.begin(), r.median_kernels.end(), p.median_kernel) == r.median_kernels.end())
                throw ParameterError("median kernel not allowed");
            break;
        case VariantKind::Original: break;
    }
    switch (p.deformation) {
        case Deformation::PiecewiseAffine:
            if (!(p.deform_strength > 0 && p.deform_strength <= r.piecewise_strength_max))
                throw ParameterError("piecewise-affine strength out of range");
            break;
        case Deformation::Perspective:
            if (!(p.deform_strength > 0 && p.deform_strength <= r.perspective_strength_max))
                throw ParameterError("perspective strength out of range");
            break;
        case Deformation::JpegCompression:
            require_range(p.jpeg_strength, 0, r.jpeg_strength_max, "JPEG strength");
            break;
        case Deformation::None: break;
    }
}

/// Render a variant from its parameters: the kind's op, then the deformation.
inline RasterImage render_variant(const RasterImage& sprite, const VariantParams& p) {
    RasterImage out = [&] {
        switch (p.kind) {
            case VariantKind::Original: return sprite;
            case VariantKind::Rotate: return rotate(sprite, p.angle_deg);
            case VariantKind::Shear: return shear(sprite, p.shear_deg);
            case VariantKind::Scale: return scale(sprite, p.scale);
            case VariantKind::Crop: return crop(sprite, p.crop_left, p.crop_right, p.crop_top, p.crop_bottom);
            case VariantKind::Translate: return translate(sprite, p.translate_x, p.translate_y);
            case VariantKind::Brightness: return brightness(sprite, p.brightness);
            case VariantKind::Noise: {
                Rng rng(RngKey{p.effect_seed, 0, Stage::Effect});
                return add_uniform_noise(sprite, p.noise_amplitude, rng);
            }
            case VariantKind::GaussianBlur: return gaussian_blur(sprite, p.blur_sigma);
            case VariantKind::LinearContrast: return linear_contrast(sprite, p.contrast);
            case VariantKind::MedianBlur: return median_blur(sprite, p.median_kernel);
        }
        return sprite;
    }();
    Rng deform_rng(RngKey{p.effect_seed, 1, Stage::Effect});
    switch (p.deformation) {
        case Deformation::None: break;
        case Deformation::PiecewiseAffine: out = piecewise_affine(out, p.deform_strength, deform_rng); break;
        case Deformation::Perspective: out = perspective_warp(out, p.deform_strength, deform_rng); break;
        case Deformation::JpegCompression: out = jpeg_roundtrip(out, p.jpeg_strength); break;
    }
    return out;
}

inline constexpr int kVariantsPerSign = 11;

struct Variant {
    RasterImage image;
    VariantParams params;
};

/// The 11 variants of one sign, all parameters drawn from `rng` in variant
/// order.
inline std::vector<Variant> make_variants(const SignAsset& sign, Rng& rng, const AugmentRanges& ranges = {}) {
    validate_sign(sign);
    std::vector<Variant> out;
    out.reserve(kVariantsPerSign);
    for (int v = 0; v < kVariantsPerSign; ++v) {
        VariantParams p = sample_variant_params(v, rng, ranges);
        check_variant_params(p, ranges);
        out.push_back({render_variant(sign.image, p), p});
    }
    return out;
}

}  // namespace signsynth
