#pragma once

// Procedural demo corpus: sign sprites with anti-aliased edges, textured
// opaque backgrounds with annotated slots, obstacle cutouts, and a config
// tying them together.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "signsynth/augment.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/raster.hpp"
#include "signsynth/rng.hpp"

namespace signsynth::demo {

/// Coverage-sampled shape: `inside(u, v)` over [0,1]^2, 4x4 samples per
/// pixel; the fraction of samples inside becomes alpha.
inline RasterImage render_shape(int w, int h, const std::function<bool(double, double)>& inside,
                                const std::function<Rgba(double, double)>& color) {
    RasterImage img(w, h);
    constexpr int kSub = 4;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int hits = 0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const double u = (x + (sx + 0.5) / kSub) / w, v = (y + (sy + 0.5) / kSub) / h;
                    hits += inside(u, v) ? 1 : 0;
                }
            if (hits == 0) continue;
            Rgba c = color((x + 0.5) / w, (y + 0.5) / h);
            c.a = quantize(255.0 * hits / (kSub * kSub) * c.a / 255.0);
            img.set_pixel(x, y, c);
        }
    return img;
}

inline bool in_polygon(double u, double v, const std::vector<std::array<double, 2>>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a[1] > v) != (b[1] > v) && u < (b[0] - a[0]) * (v - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
    }
    return in;
}

inline std::vector<std::array<double, 2>> regular_polygon(int n, double r, double rot) {
    std::vector<std::array<double, 2>> p;
    for (int i = 0; i < n; ++i) {
        const double t = rot + 2 * std::numbers::pi * i / n;
        p.push_back({0.5 + r * std::cos(t), 0.5 + r * std::sin(t)});
    }
    return p;
}

/// A sign sprite whose shape and palette follow its class.
inline RasterImage sign_sprite(SignClass cls, int size, int variant = 0) {
    const double shade = 1.0 - 0.08 * (variant % 4);
    auto tone = [&](int r, int g, int b) {
        return Rgba{quantize(r * shade), quantize(g * shade), quantize(b * shade), 255};
    };
    auto ring = [&](double u, double v, double r_in, Rgba outer, Rgba inner) {
        const double d = std::hypot(u - 0.5, v - 0.5);
        if (d > r_in) return outer;
        // simple glyph: horizontal bar
        if (std::abs(v - 0.5) < 0.06 && std::abs(u - 0.5) < 0.25) return Rgba{30, 30, 30, 255};
        return inner;
    };
    switch (cls) {
        case SignClass::Prohibitory:
            return render_shape(
                size, size, [](double u, double v) { return std::hypot(u - 0.5, v - 0.5) < 0.46; },
                [&](double u, double v) { return ring(u, v, 0.34, tone(200, 20, 30), tone(245, 245, 245)); });
        case SignClass::Warning: {
            const std::vector<std::array<double, 2>> tri = {{0.5, 0.06}, {0.96, 0.9}, {0.04, 0.9}};
            const std::vector<std::array<double, 2>> in = {{0.5, 0.26}, {0.78, 0.78}, {0.22, 0.78}};
            return render_shape(
                size, size, [&](double u, double v) { return in_polygon(u, v, tri); },
                [&](double u, double v) { return in_polygon(u, v, in) ? tone(250, 235, 80) : tone(200, 20, 30); });
        }
        case SignClass::Priority: {
            const auto dia = regular_polygon(4, 0.47, 0);
            const auto in = regular_polygon(4, 0.32, 0);
            return render_shape(
                size, size, [&](double u, double v) { return in_polygon(u, v, dia); },
                [&](double u, double v) { return in_polygon(u, v, in) ? tone(250, 200, 20) : tone(245, 245, 245); });
        }
        case SignClass::Regulatory:
            return render_shape(
                size, size, [](double u, double v) { return std::hypot(u - 0.5, v - 0.5) < 0.46; },
                [&](double u, double v) { return ring(u, v, 0.38, tone(245, 245, 245), tone(30, 90, 200)); });
        case SignClass::Service:
            return render_shape(
                size, size, [](double u, double v) { return u > 0.08 && u < 0.92 && v > 0.04 && v < 0.96; },
                [&](double u, double v) {
                    if (u > 0.25 && u < 0.75 && v > 0.3 && v < 0.7) return tone(245, 245, 245);
                    return tone(30, 90, 200);
                });
        case SignClass::Informational:
            return render_shape(
                size, size, [](double u, double v) { return u > 0.04 && u < 0.96 && v > 0.14 && v < 0.86; },
                [&](double u, double v) {
                    if (std::abs(v - 0.5) < 0.08 && u > 0.2 && u < 0.8) return tone(245, 245, 245);
                    return tone(20, 120, 60);
                });
    }
    return RasterImage(size, size);
}

/// Opaque street-like scene: sky gradient, road, and deterministic texture.
inline RasterImage background(int w, int h, std::uint64_t seed) {
    RasterImage img(w, h);
    Rng rng(RngKey{seed, 0, Stage::Effect});
    const double hue = rng.uniform(0.0, 1.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double t = static_cast<double>(y) / h;
            double r, g, b;
            if (t < 0.55) {
                r = 110 + 80 * t + 30 * hue;
                g = 150 + 60 * t;
                b = 220 - 40 * t;
            } else {
                const double stripe = (std::abs(x - w / 2) < 3 && (y / 8) % 2 == 0) ? 120 : 0;
                r = 70 + stripe;
                g = 72 + stripe;
                b = 75 + stripe;
            }
            const double n = rng.uniform(-12.0, 12.0);
            img.set_pixel(x, y, {quantize(r + n), quantize(g + n), quantize(b + n), 255});
        }
    return img;
}

inline RasterImage car_cutout(int w, int h, Rgba body) {
    return render_shape(
        w, h,
        [](double u, double v) {
            const bool cabin = v > 0.05 && v < 0.5 && u > 0.22 && u < 0.78;
            const bool hull = v >= 0.4 && v < 0.85 && u > 0.02 && u < 0.98;
            const bool wheel = std::hypot((u - 0.25) * 2, v - 0.82) < 0.16 || std::hypot((u - 0.75) * 2, v - 0.82) < 0.16;
            return cabin || hull || wheel;
        },
        [&](double u, double v) {
            if (v > 0.1 && v < 0.42 && u > 0.28 && u < 0.72) return Rgba{150, 190, 220, 255};
            if (v > 0.7) return Rgba{25, 25, 25, 255};
            return body;
        });
}

inline RasterImage person_cutout(int w, int h) {
    return render_shape(
        w, h,
        [](double u, double v) {
            const bool head = std::hypot((u - 0.5) * 0.6, v - 0.1) < 0.08;
            const bool torso = std::hypot((u - 0.5) * 0.55, (v - 0.45) * 0.45) < 0.12;
            const bool legs = v > 0.55 && v < 0.98 && (std::abs(u - 0.35) < 0.12 || std::abs(u - 0.65) < 0.12);
            return head || torso || legs;
        },
        [](double, double v) { return v < 0.2 ? Rgba{220, 180, 150, 255} : Rgba{60, 60, 140, 255}; });
}

struct CorpusSpec {
    int signs = 3;
    int backgrounds = 2;
    int sign_size = 64;
    int background_w = 320, background_h = 240;
    std::uint64_t seed = 1;
};

/// Write a complete corpus plus `config.json` into `dir`.
inline void write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "signs");
    fs::create_directories(dir / "backgrounds");
    fs::create_directories(dir / "obstacles");

    static constexpr SignClass kOrder[kNumClasses] = {SignClass::Prohibitory, SignClass::Warning,
                                                      SignClass::Regulatory,  SignClass::Priority,
                                                      SignClass::Service,     SignClass::Informational};
    std::string signs_csv = "file,class\n";
    for (int i = 0; i < spec.signs; ++i) {
        const SignClass cls = kOrder[i % kNumClasses];
        const std::string name = "sign_" + std::to_string(i) + ".png";
        save_png(dir / "signs" / name, sign_sprite(cls, spec.sign_size, i / kNumClasses));
        signs_csv += name + "," + std::string(class_name(cls)) + "\n";
    }
    write_file(dir / "signs" / "signs.csv", signs_csv);

    std::string placements = "background,x,y,w,h\n";
    const int W = spec.background_w, H = spec.background_h;
    for (int i = 0; i < spec.backgrounds; ++i) {
        const std::string name = "scene_" + std::to_string(i) + ".png";
        save_png(dir / "backgrounds" / name, background(W, H, spec.seed * 1000 + static_cast<std::uint64_t>(i)));
        const int s = std::max(16, std::min(W, H) / 5);
        placements += name + "," + std::to_string(W * 2 / 3 - i * 7 % 20) + "," + std::to_string(H / 6) + "," +
                      std::to_string(s) + "," + std::to_string(s) + "\n";
        placements += name + "," + std::to_string(W / 8) + "," + std::to_string(H / 5) + "," +
                      std::to_string(s * 4 / 5) + "," + std::to_string(s * 4 / 5) + "\n";
    }
    write_file(dir / "backgrounds" / "placements.csv", placements);

    save_png(dir / "obstacles" / "car_0.png", car_cutout(96, 48, {180, 30, 30, 255}));
    save_png(dir / "obstacles" / "truck_0.png", car_cutout(120, 70, {230, 230, 230, 255}));
    save_png(dir / "obstacles" / "person_0.png", person_cutout(32, 80));
    write_file(dir / "obstacles" / "cutouts.csv",
               "file,category,source_image\ncar_0.png,car,demo\ntruck_0.png,truck,demo\nperson_0.png,person,demo\n");

    write_file(dir / "config.json",
               "{\n"
               "  \"signs\": {\"dir\": \"signs\"},\n"
               "  \"backgrounds\": {\"dir\": \"backgrounds\"},\n"
               "  \"obstacles\": {\"dir\": \"obstacles\"},\n"
               "  \"output\": {\"dir\": \"out\"},\n"
               "  \"seed\": " + std::to_string(spec.seed) + "\n"
               "}\n");
}

}  // namespace signsynth::demo
