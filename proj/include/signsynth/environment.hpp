#pragma once

// Weather and lighting conditions applied to opaque scene composites. Every
// effect is photometric or an overlay: dimensions and labels never change.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <variant>

#include "signsynth/augment.hpp"
#include "signsynth/raster.hpp"
#include "signsynth/rng.hpp"

namespace signsynth {

enum class EnvKind : int { Rain = 0, Snow, Fog, SunFlare, Day, Night, Dawn };

inline constexpr int kNumEnvKinds = 7;

inline constexpr std::array<std::string_view, kNumEnvKinds> kEnvKindNames = {
    "rain", "snow", "fog", "sun_flare", "day", "night", "dawn"};

inline std::string_view env_kind_name(EnvKind k) { return kEnvKindNames[static_cast<int>(k)]; }

using Rgb = std::array<double, 3>;

struct RainParams {
    int streaks = 0;
    double slant_deg = 0;
    double length_min = 15, length_max = 35;
    double opacity = 0.35;
    Rgb color = {200, 200, 210};
    double blur_sigma = 0.7;
    std::uint64_t seed = 0;  // streak placement
    friend bool operator==(const RainParams&, const RainParams&) = default;
};

struct SnowParams {
    int flakes = 0;
    int radius_min = 1, radius_max = 3;
    double opacity = 0.8;
    double brightness = 1.1;
    std::uint64_t seed = 0;  // flake placement
    friend bool operator==(const SnowParams&, const SnowParams&) = default;
};

struct FogParams {
    double opacity = 0;
    Rgb color = {230, 230, 235};
    friend bool operator==(const FogParams&, const FogParams&) = default;
};

/// Flare centre as fractions of the scene size, radius as a fraction of width.
struct SunFlareParams {
    double center_x = 0.5, center_y = 0.1;
    double radius = 0;
    double peak = 180;
    friend bool operator==(const SunFlareParams&, const SunFlareParams&) = default;
};

struct DayParams {
    double brightness = 1.10;
    double red_shift = 6;
    double blue_shift = -6;
    friend bool operator==(const DayParams&, const DayParams&) = default;
};

struct NightParams {
    double gamma = 2.2;
    double blue_shift = 10;
    friend bool operator==(const NightParams&, const NightParams&) = default;
};

struct DawnParams {
    Rgb color = {255, 140, 60};
    double opacity = 0.18;
    double brightness = 0.95;
    friend bool operator==(const DawnParams&, const DawnParams&) = default;
};

/// One condition; the alternative index equals the EnvKind value.
struct EnvCondition {
    std::variant<RainParams, SnowParams, FogParams, SunFlareParams, DayParams, NightParams, DawnParams> params;

    EnvKind kind() const { return static_cast<EnvKind>(params.index()); }

    friend bool operator==(const EnvCondition&, const EnvCondition&) = default;
};

/// Sampling ranges and fixed coefficients for all seven conditions.
struct EnvSettings {
    struct Rain {
        int count_min = 80, count_max = 150;
        double length_min = 15, length_max = 35;
        double slant_min = -20, slant_max = 20;
        double opacity = 0.35;
        Rgb color = {200, 200, 210};
        double blur_sigma = 0.7;
    } rain;
    struct Snow {
        int count_min = 100, count_max = 200;
        int radius_min = 1, radius_max = 3;
        double opacity = 0.8;
        double brightness = 1.1;
    } snow;
    struct Fog {
        double opacity_min = 0.30, opacity_max = 0.60;
        Rgb color = {230, 230, 235};
    } fog;
    struct SunFlare {
        double radius_min = 0.10, radius_max = 0.25;
        double center_y_max = 1.0 / 3.0;
        double peak = 180;
    } sun_flare;
    DayParams day;
    NightParams night;
    DawnParams dawn;
};

inline void validate_env_settings(const EnvSettings& s) {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("env settings invalid: ") + what);
    };
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    check(s.rain.count_min >= 0 && s.rain.count_min <= s.rain.count_max, "env.rain.count_range");
    check(s.rain.length_min > 0 && s.rain.length_min <= s.rain.length_max, "env.rain.length_range");
    check(s.rain.slant_min <= s.rain.slant_max && std::abs(s.rain.slant_min) < 80 && std::abs(s.rain.slant_max) < 80,
          "env.rain.slant_range");
    check(unit(s.rain.opacity), "env.rain.opacity must lie in [0,1]");
    check(s.rain.blur_sigma >= 0 && s.rain.blur_sigma <= limits::kSigmaMax, "env.rain.blur_sigma");
    check(s.snow.count_min >= 0 && s.snow.count_min <= s.snow.count_max, "env.snow.count_range");
    check(s.snow.radius_min >= 1 && s.snow.radius_min <= s.snow.radius_max, "env.snow.radius_range");
    check(unit(s.snow.opacity), "env.snow.opacity must lie in [0,1]");
    check(s.snow.brightness > 0, "env.snow.brightness");
    check(unit(s.fog.opacity_min) && unit(s.fog.opacity_max) && s.fog.opacity_min <= s.fog.opacity_max,
          "env.fog.opacity_range must lie in [0,1]");
    check(s.sun_flare.radius_min >= 0 && s.sun_flare.radius_min <= s.sun_flare.radius_max, "env.sun_flare.radius_range");
    check(unit(s.sun_flare.center_y_max), "env.sun_flare.center_y_max");
    check(s.day.brightness > 0 && s.night.gamma > 0 && s.dawn.brightness > 0, "lighting coefficients must be > 0");
    check(unit(s.dawn.opacity), "env.dawn.opacity must lie in [0,1]");
}

/// Draw the parameters of one condition. Draw order per kind:
/// rain (streak count, slant, seed), snow (flake count, seed), fog (opacity),
/// sun flare (centre x, centre y, radius); lighting kinds draw nothing.
inline EnvCondition sample_condition(EnvKind kind, Rng& rng, const EnvSettings& s = {}) {
    switch (kind) {
        case EnvKind::Rain: {
            RainParams p;
            p.streaks = static_cast<int>(rng.uniform_int(s.rain.count_min, s.rain.count_max));
            p.slant_deg = rng.uniform(s.rain.slant_min, s.rain.slant_max);
            p.length_min = s.rain.length_min;
            p.length_max = s.rain.length_max;
            p.opacity = s.rain.opacity;
            p.color = s.rain.color;
            p.blur_sigma = s.rain.blur_sigma;
            p.seed = rng.next_u64();
            return {p};
        }
        case EnvKind::Snow: {
            SnowParams p;
            p.flakes = static_cast<int>(rng.uniform_int(s.snow.count_min, s.snow.count_max));
            p.radius_min = s.snow.radius_min;
            p.radius_max = s.snow.radius_max;
            p.opacity = s.snow.opacity;
            p.brightness = s.snow.brightness;
            p.seed = rng.next_u64();
            return {p};
        }
        case EnvKind::Fog: return {FogParams{rng.uniform(s.fog.opacity_min, s.fog.opacity_max), s.fog.color}};
        case EnvKind::SunFlare: {
            SunFlareParams p;
            p.center_x = rng.uniform(0.0, 1.0);
            p.center_y = rng.uniform(0.0, s.sun_flare.center_y_max);
            p.radius = rng.uniform(s.sun_flare.radius_min, s.sun_flare.radius_max);
            p.peak = s.sun_flare.peak;
            return {p};
        }
        case EnvKind::Day: return {s.day};
        case EnvKind::Night: return {s.night};
        case EnvKind::Dawn: return {s.dawn};
    }
    throw ArgumentError("unknown environment kind");
}

namespace detail {

inline void blend_rgb(double* px, const Rgb& color, double a) {
    for (int c = 0; c < 3; ++c) px[c] = px[c] * (1.0 - a) + color[c] * a;
}

inline RasterImage apply_rain(const RasterImage& img, const RainParams& p, Rng& rng) {
    if (p.streaks <= 0 || p.opacity <= 0) return img;
    FloatImage f(img);
    const double th = p.slant_deg * std::numbers::pi / 180.0;
    const double dxdy = std::tan(th);
    const double W = img.width(), H = img.height();
    for (int n = 0; n < p.streaks; ++n) {
        const double len = rng.uniform(p.length_min, p.length_max);
        const double x0 = rng.uniform(-len, W + len);
        const double y0 = rng.uniform(-len, H);
        const int rows = std::max(1, static_cast<int>(std::lround(len * std::cos(th))));
        // Wu-style span: one sample per row split across the two nearest columns.
        for (int k = 0; k < rows; ++k) {
            const int y = static_cast<int>(std::floor(y0)) + k;
            if (y < 0 || y >= img.height()) continue;
            const double x = x0 + k * dxdy - 0.5;
            const int xi = static_cast<int>(std::floor(x));
            const double frac = x - xi;
            const int cols[2] = {xi, xi + 1};
            const double cover[2] = {1.0 - frac, frac};
            for (int j = 0; j < 2; ++j) {
                if (cols[j] < 0 || cols[j] >= img.width() || cover[j] <= 0) continue;
                blend_rgb(f.at(cols[j], y), p.color, p.opacity * cover[j]);
            }
        }
    }
    if (p.blur_sigma > 0) blur_float(f, p.blur_sigma);
    return f.quantized();
}

inline RasterImage apply_snow(const RasterImage& img, const SnowParams& p, Rng& rng) {
    if (p.flakes <= 0) return img;
    FloatImage f(img);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            for (int c = 0; c < 3; ++c) f.at(x, y)[c] *= p.brightness;
    const Rgb white = {255, 255, 255};
    for (int n = 0; n < p.flakes; ++n) {
        const double cx = rng.uniform(0, img.width());
        const double cy = rng.uniform(0, img.height());
        const int r = static_cast<int>(rng.uniform_int(p.radius_min, p.radius_max));
        for (int y = static_cast<int>(cy) - r - 1; y <= static_cast<int>(cy) + r + 1; ++y)
            for (int x = static_cast<int>(cx) - r - 1; x <= static_cast<int>(cx) + r + 1; ++x) {
                if (!img.contains(x, y)) continue;
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                if (dx * dx + dy * dy <= static_cast<double>(r) * r) blend_rgb(f.at(x, y), white, p.opacity);
            }
    }
    return f.quantized();
}

template <typename PixelFn>
RasterImage map_rgb(const RasterImage& img, PixelFn fn) {
    FloatImage f(img);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) fn(f.at(x, y), x, y);
    return f.quantized();
}

}  // namespace detail

/// Apply `cond` to a scene; `rng` drives streak and flake placement.
inline RasterImage apply_condition(const RasterImage& img, const EnvCondition& cond, Rng& rng) {
    switch (cond.kind()) {
        case EnvKind::Rain: return detail::apply_rain(img, std::get<RainParams>(cond.params), rng);
        case EnvKind::Snow: return detail::apply_snow(img, std::get<SnowParams>(cond.params), rng);
        case EnvKind::Fog: {
            const auto& p = std::get<FogParams>(cond.params);
            if (p.opacity == 0.0) return img;
            return detail::map_rgb(img, [&](double* px, int, int) { detail::blend_rgb(px, p.color, p.opacity); });
        }
        case EnvKind::SunFlare: {
            const auto& p = std::get<SunFlareParams>(cond.params);
            const double R = p.radius * img.width();
            if (R <= 0.0 || p.peak == 0.0) return img;
            const double cx = p.center_x * img.width(), cy = p.center_y * img.height();
            return detail::map_rgb(img, [&](double* px, int x, int y) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                const double t = (dx * dx + dy * dy) / (R * R);
                if (t >= 1.0) return;
                const double add = p.peak * (1.0 - t);
                for (int c = 0; c < 3; ++c) px[c] += add;
            });
        }
        case EnvKind::Day: {
            const auto& p = std::get<DayParams>(cond.params);
            if (p.brightness == 1.0 && p.red_shift == 0.0 && p.blue_shift == 0.0) return img;
            return detail::map_rgb(img, [&](double* px, int, int) {
                for (int c = 0; c < 3; ++c) px[c] *= p.brightness;
                px[0] += p.red_shift;
                px[2] += p.blue_shift;
            });
        }
        case EnvKind::Night: {
            const auto& p = std::get<NightParams>(cond.params);
            if (p.gamma == 1.0 && p.blue_shift == 0.0) return img;
            return detail::map_rgb(img, [&](double* px, int, int) {
                for (int c = 0; c < 3; ++c) px[c] = 255.0 * std::pow(px[c] / 255.0, p.gamma);
                px[2] += p.blue_shift;
            });
        }
        case EnvKind::Dawn: {
            const auto& p = std::get<DawnParams>(cond.params);
            if (p.opacity == 0.0 && p.brightness == 1.0) return img;
            return detail::map_rgb(img, [&](double* px, int, int) {
                detail::blend_rgb(px, p.color, p.opacity);
                for (int c = 0; c < 3; ++c) px[c] *= p.brightness;
            });
        }
    }
    return img;
}

/// Seed stored in the condition, for kinds that place random elements.
inline std::uint64_t condition_seed(const EnvCondition& cond) {
    if (const auto* r = std::get_if<RainParams>(&cond.params)) return r->seed;
    if (const auto* s = std::get_if<SnowParams>(&cond.params)) return s->seed;
    return 0;
}

/// Apply `cond` using the placement stream derived from its stored seed.
inline RasterImage apply_condition(const RasterImage& img, const EnvCondition& cond) {
    Rng rng(RngKey{condition_seed(cond), 0, Stage::Effect});
    return apply_condition(img, cond, rng);
}

}  // namespace signsynth
