#pragma once

// Obstacle-based occlusion: COCO instance ingestion, polygon masks, cutout
// extraction, and coverage-constrained placement of obstacles over signs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "signsynth/augment.hpp"
#include "signsynth/csv.hpp"
#include "signsynth/error.hpp"
#include "signsynth/homography.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/raster.hpp"
#include "signsynth/rng.hpp"

namespace signsynth {

enum class ObstacleCategory : int { Car = 0, Truck, Bus, Person };

inline constexpr std::array<std::string_view, 4> kObstacleCategoryNames = {"car", "truck", "bus", "person"};

inline std::string_view obstacle_category_name(ObstacleCategory c) {
    return kObstacleCategoryNames[static_cast<int>(c)];
}

inline std::optional<ObstacleCategory> parse_obstacle_category(std::string_view name) {
    const std::string lower = to_lower(name);
    for (std::size_t i = 0; i < kObstacleCategoryNames.size(); ++i)
        if (kObstacleCategoryNames[i] == lower) return static_cast<ObstacleCategory>(i);
    return std::nullopt;
}

struct ObstacleAsset {
    std::string id;
    ObstacleCategory category = ObstacleCategory::Car;
    RasterImage cutout;
};

inline void validate_obstacle(const ObstacleAsset& o) {
    if (o.cutout.fully_transparent()) throw AssetError("obstacle '" + o.id + "' has no visible pixel");
}

// ---------------------------------------------------------------------------
// COCO ingestion

using Polygon = std::vector<Point2>;

struct CocoInstance {
    std::int64_t annotation_id = 0;
    std::int64_t image_id = 0;
    std::string file_name;
    ObstacleCategory category = ObstacleCategory::Car;
    std::vector<Polygon> polygons;
};

/// Map requested category names onto the four supported obstacle kinds.
inline std::vector<ObstacleCategory> parse_category_list(const std::vector<std::string>& names) {
    std::vector<ObstacleCategory> out;
    for (const auto& n : names) {
        const auto c = parse_obstacle_category(n);
        if (!c) throw ConfigError("unknown obstacle category '" + n + "'; valid names: car, truck, bus, person");
        if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
    }
    if (out.empty()) throw ConfigError("no obstacle categories requested; valid names: car, truck, bus, person");
    return out;
}

/// Polygon instances of the requested categories from a COCO instances
/// document. Crowd annotations and RLE segmentations are skipped; polygons
/// with fewer than three vertices are dropped.
inline std::vector<CocoInstance> parse_coco_instances(std::string_view annotation_text,
                                                      const std::vector<std::string>& categories) {
    using nlohmann::json;
    const auto wanted = parse_category_list(categories);

    json doc;
    try {
        doc = json::parse(annotation_text.begin(), annotation_text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed COCO JSON at byte ") + std::to_string(e.byte) + ": " + e.what(),
                         e.byte);
    }
    if (!doc.is_object()) throw ParseError("COCO document must be a JSON object");
    for (const char* key : {"images", "annotations", "categories"})
        if (!doc.contains(key) || !doc[key].is_array())
            throw ParseError(std::string("COCO document lacks a top-level '") + key + "' array");

    try {
        std::map<std::int64_t, ObstacleCategory> cat_by_id;
        for (const auto& c : doc["categories"]) {
            const auto kind = parse_obstacle_category(c.at("name").get<std::string>());
            if (kind && std::find(wanted.begin(), wanted.end(), *kind) != wanted.end())
                cat_by_id[c.at("id").get<std::int64_t>()] = *kind;
        }
        std::map<std::int64_t, std::string> file_by_id;
        for (const auto& im : doc["images"])
            file_by_id[im.at("id").get<std::int64_t>()] = im.at("file_name").get<std::string>();

        std::vector<CocoInstance> out;
        for (const auto& ann : doc["annotations"]) {
            const auto cat = cat_by_id.find(ann.at("category_id").get<std::int64_t>());
            if (cat == cat_by_id.end()) continue;
            if (ann.value("iscrowd", 0) != 0) continue;
            const auto& seg = ann.at("segmentation");
            if (!seg.is_array()) continue;  // RLE
            CocoInstance inst;
            inst.annotation_id = ann.at("id").get<std::int64_t>();
            inst.image_id = ann.at("image_id").get<std::int64_t>();
            const auto file = file_by_id.find(inst.image_id);
            if (file == file_by_id.end())
                throw ParseError("annotation " + std::to_string(inst.annotation_id) + " references unknown image id " +
                                 std::to_string(inst.image_id));
            inst.file_name = file->second;
            inst.category = cat->second;
            for (const auto& flat : seg) {
                if (!flat.is_array()) continue;
                Polygon poly;
                for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
                    poly.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
                if (poly.size() >= 3) inst.polygons.push_back(std::move(poly));
            }
            if (!inst.polygons.empty()) out.push_back(std::move(inst));
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid COCO structure: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Masks and cutouts

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }
};

/// Even-odd scanline fill. A pixel is inside when its centre is: an edge
/// counts on row y when it straddles y+0.5 half-open, and the centre is
/// inside when an odd number of those crossings lie strictly to its right.
inline Mask rasterize_polygon(const Polygon& polygon, int w, int h) {
    if (polygon.size() < 3) throw ArgumentError("polygon needs at least 3 vertices");
    if (w < 1 || h < 1) throw ArgumentError("mask dimensions must be >= 1");
    Mask mask(w, h);
    std::vector<double> xs;
    const std::size_t n = polygon.size();
    for (int y = 0; y < h; ++y) {
        const double yc = y + 0.5;
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = polygon[i], b = polygon[(i + 1) % n];
            if ((a.y <= yc) == (b.y <= yc)) continue;
            xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        if (xs.empty()) continue;
        std::sort(xs.begin(), xs.end());
        for (int x = 0; x < w; ++x) {
            const double xc = x + 0.5;
            const auto right = xs.end() - std::upper_bound(xs.begin(), xs.end(), xc);
            if (right % 2 == 1) mask.set(x, y);
        }
    }
    return mask;
}

/// Union of the even-odd fills of several polygons.
inline Mask rasterize_polygons(const std::vector<Polygon>& polygons, int w, int h) {
    Mask mask(w, h);
    for (const auto& p : polygons) {
        const Mask m = rasterize_polygon(p, w, h);
        for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] |= m.bits[i];
    }
    return mask;
}

/// RGB copied under the mask with alpha 255, alpha 0 elsewhere, cropped to
/// the tight mask box.
inline RasterImage extract_cutout(const RasterImage& image, const Mask& mask) {
    if (mask.width != image.width() || mask.height != image.height())
        throw ArgumentError("mask size does not match image size");
    RasterImage full(image.width(), image.height());
    bool any = false;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            if (!mask.get(x, y)) continue;
            Rgba c = image.pixel(x, y);
            c.a = 255;
            full.set_pixel(x, y, c);
            any = true;
        }
    if (!any) throw ExtractionError("mask selects no pixel");
    return crop_window(full, *tight_alpha_bbox(full));
}

// ---------------------------------------------------------------------------
// Occlusion sampling and overlay

struct OcclusionSettings {
    double coverage_min = 0.10, coverage_max = 0.50;
    double opacity_min = 0.70, opacity_max = 1.00;
    double scale_min = 0.30, scale_max = 0.80;
    int max_attempts = 100;
};

inline void validate_occlusion_settings(const OcclusionSettings& s) {
    if (!(s.coverage_min > 0 && s.coverage_min < s.coverage_max && s.coverage_max < 1))
        throw ConfigError("occlusion.coverage_window must satisfy 0 < lo < hi < 1");
    if (!(s.opacity_min >= 0 && s.opacity_min <= s.opacity_max && s.opacity_max <= 1))
        throw ConfigError("occlusion.opacity_range must lie in [0,1]");
    if (!(s.scale_min > 0 && s.scale_min <= s.scale_max)) throw ConfigError("occlusion.scale_range invalid");
    if (s.max_attempts < 1) throw ConfigError("occlusion.max_attempts must be >= 1");
}

struct OcclusionParams {
    std::string obstacle_id;
    double scale = 0;    // obstacle width as a fraction of the sign box width
    int x = 0, y = 0;    // top-left of the scaled obstacle in the scene
    int width = 0, height = 0;
    double opacity = 1;
    double coverage = 0;  // achieved alpha-weighted fraction of the sign box
    int attempts = 0;
    bool fallback = false;

    friend bool operator==(const OcclusionParams&, const OcclusionParams&) = default;
};

/// Obstacle resized to `scale * box_width` wide, aspect preserved.
inline RasterImage scaled_obstacle(const ObstacleAsset& obstacle, double scale, int box_width) {
    const int w = static_cast<int>(std::lround(scale * box_width));
    const int h = static_cast<int>(std::lround(static_cast<double>(w) * obstacle.cutout.height() / obstacle.cutout.width()));
    if (w < 2 || h < 2)
        throw AssetError("obstacle '" + obstacle.id + "' is smaller than 2x2 after scaling (" + std::to_string(w) +
                         "x" + std::to_string(h) + ")");
    return resize_bilinear(obstacle.cutout, w, h);
}

/// Alpha an obstacle pixel contributes once its opacity is applied.
inline std::uint8_t effective_alpha(std::uint8_t a, double opacity) { return quantize(a * opacity); }

/// Alpha-weighted fraction of `box` hidden by `obstacle` placed at `pos`.
inline double occlusion_coverage(const PixelRect& box, const RasterImage& obstacle, PixelPoint pos, double opacity) {
    const PixelRect hit = intersect(box, {pos.x, pos.y, obstacle.width(), obstacle.height()});
    if (hit.empty() || box.empty()) return 0.0;
    long long sum = 0;
    for (int y = hit.y; y < hit.bottom(); ++y)
        for (int x = hit.x; x < hit.right(); ++x) sum += effective_alpha(obstacle.alpha(x - pos.x, y - pos.y), opacity);
    return static_cast<double>(sum) / (255.0 * static_cast<double>(box.area()));
}

/// Rejection-sample scale, opacity and position (in that order per attempt)
/// until the achieved coverage of `sign_box` lies inside the window. After
/// `max_attempts` failures the obstacle is centred on the box at full
/// opacity with the smallest scale (0.01 steps from scale_min) that reaches
/// the lower bound.
inline OcclusionParams sample_occlusion(const PixelRect& sign_box, const ObstacleAsset& obstacle, Rng& rng,
                                        const OcclusionSettings& s = {}) {
    if (!(s.coverage_min > 0 && s.coverage_min < s.coverage_max && s.coverage_max < 1))
        throw ArgumentError("coverage window must satisfy 0 < lo < hi < 1");
    if (sign_box.empty()) throw ArgumentError("sign box is empty");
    OcclusionParams p;
    p.obstacle_id = obstacle.id;
    for (int attempt = 1; attempt <= s.max_attempts; ++attempt) {
        const double scale = rng.uniform(s.scale_min, s.scale_max);
        const double opacity = rng.uniform(s.opacity_min, s.opacity_max);
        const RasterImage ob = scaled_obstacle(obstacle, scale, sign_box.w);
        const int x = static_cast<int>(rng.uniform_int(sign_box.x - ob.width() + 1, sign_box.right() - 1));
        const int y = static_cast<int>(rng.uniform_int(sign_box.y - ob.height() + 1, sign_box.bottom() - 1));
        const double cov = occlusion_coverage(sign_box, ob, {x, y}, opacity);
        if (cov >= s.coverage_min && cov <= s.coverage_max) {
            p.scale = scale;
            p.x = x;
            p.y = y;
            p.width = ob.width();
            p.height = ob.height();
            p.opacity = opacity;
            p.coverage = cov;
            p.attempts = attempt;
            return p;
        }
    }
    p.fallback = true;
    p.attempts = s.max_attempts;
    p.opacity = s.opacity_max;
    constexpr double kScaleCap = 4.0;
    for (int step = 0;; ++step) {
        const double scale = s.scale_min + 0.01 * step;
        if (scale > kScaleCap) break;
        const int w = static_cast<int>(std::lround(scale * sign_box.w));
        const int h = static_cast<int>(std::lround(static_cast<double>(w) * obstacle.cutout.height() /
                                                   obstacle.cutout.width()));
        if (w < 2 || h < 2) continue;
        const RasterImage ob = scaled_obstacle(obstacle, scale, sign_box.w);
        const int x = sign_box.x + (sign_box.w - ob.width()) / 2;
        const int y = sign_box.y + (sign_box.h - ob.height()) / 2;
        const double cov = occlusion_coverage(sign_box, ob, {x, y}, p.opacity);
        if (cov < s.coverage_min) continue;
        if (cov > s.coverage_max) break;
        p.scale = scale;
        p.x = x;
        p.y = y;
        p.width = ob.width();
        p.height = ob.height();
        p.coverage = cov;
        return p;
    }
    throw AssetError("obstacle '" + obstacle.id + "' cannot reach the coverage window on a " +
                     std::to_string(sign_box.w) + "x" + std::to_string(sign_box.h) + " sign box");
}

/// Resize the obstacle to the sampled extent, scale its alpha by the
/// opacity, and blend it over the scene (clipped at the scene border).
inline RasterImage overlay_obstacle(const RasterImage& scene, const ObstacleAsset& obstacle, const OcclusionParams& p) {
    if (p.width < 1 || p.height < 1) throw ArgumentError("occlusion extent must be >= 1x1");
    RasterImage ob = resize_bilinear(obstacle.cutout, p.width, p.height);
    auto px = ob.pixels();
    for (std::size_t i = 3; i < px.size(); i += 4) px[i] = effective_alpha(px[i], p.opacity);
    return blend_over_clipped(ob, scene, {p.x, p.y});
}

// ---------------------------------------------------------------------------
// Obstacle pools on disk

struct CutoutRecord {
    std::string file;
    ObstacleCategory category = ObstacleCategory::Car;
    std::string source_image;
};

inline std::vector<CutoutRecord> parse_cutouts_csv(std::string_view text, const std::string& source = "cutouts.csv") {
    std::vector<CutoutRecord> out;
    for (const auto& row : parse_csv_with_header(text, {"file", "category", "source_image"}, source)) {
        const auto cat = parse_obstacle_category(row.fields[1]);
        if (!cat)
            throw ParseError(source + ":" + std::to_string(row.line) + ": unknown category '" + row.fields[1] +
                             "'; valid names: car, truck, bus, person");
        if (row.fields[0].empty()) throw ParseError(source + ":" + std::to_string(row.line) + ": empty file name");
        out.push_back({row.fields[0], *cat, row.fields[2]});
    }
    return out;
}

inline std::string format_cutouts_csv(const std::vector<CutoutRecord>& rows) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string out = "file,category,source_image\n";
    for (const auto& r : rows)
        out += quote(r.file) + "," + std::string(obstacle_category_name(r.category)) + "," + quote(r.source_image) + "\n";
    return out;
}

/// Load the pool listed in `<dir>/cutouts.csv`.
inline std::vector<ObstacleAsset> load_obstacles(const std::filesystem::path& dir) {
    const auto csv = dir / "cutouts.csv";
    if (!std::filesystem::exists(csv)) throw ConfigError("obstacle manifest not found: " + csv.string());
    const Bytes text = read_file(csv);
    std::vector<ObstacleAsset> out;
    for (const auto& r : parse_cutouts_csv(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()),
                                           csv.string())) {
        const auto path = dir / r.file;
        if (!std::filesystem::exists(path)) throw ConfigError("obstacle cutout not found: " + path.string());
        ObstacleAsset o{r.file, r.category, load_image(path)};
        validate_obstacle(o);
        out.push_back(std::move(o));
    }
    return out;
}

/// Cut every matching COCO instance out of its source image and write the
/// PNG cutouts plus `cutouts.csv` into `out_dir`. Instances whose cutout is
/// smaller than `min_side` on either axis are skipped.
inline std::vector<CutoutRecord> extract_obstacles(const std::filesystem::path& coco_path,
                                                   const std::filesystem::path& images_dir,
                                                   const std::filesystem::path& out_dir,
                                                   const std::vector<std::string>& categories, int min_side = 2) {
    if (!std::filesystem::exists(coco_path)) throw ConfigError("COCO file not found: " + coco_path.string());
    if (!std::filesystem::is_directory(images_dir)) throw ConfigError("image directory not found: " + images_dir.string());
    const Bytes text = read_file(coco_path);
    const auto instances =
        parse_coco_instances(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()), categories);
    std::filesystem::create_directories(out_dir);
    std::vector<CutoutRecord> rows;
    std::map<std::string, RasterImage> cache;
    for (const auto& inst : instances) {
        auto it = cache.find(inst.file_name);
        if (it == cache.end()) {
            const auto path = images_dir / inst.file_name;
            if (!std::filesystem::exists(path)) throw ConfigError("COCO image not found: " + path.string());
            it = cache.emplace(inst.file_name, load_image(path)).first;
        }
        const RasterImage& src = it->second;
        const Mask mask = rasterize_polygons(inst.polygons, src.width(), src.height());
        if (mask.count() == 0) continue;
        const RasterImage cut = extract_cutout(src, mask);
        if (cut.width() < min_side || cut.height() < min_side) continue;
        const std::string stem = std::filesystem::path(inst.file_name).stem().string();
        const std::string name = stem + "_" + std::to_string(inst.annotation_id) + ".png";
        save_png(out_dir / name, cut);
        rows.push_back({name, inst.category, inst.file_name});
    }
    write_file(out_dir / "cutouts.csv", format_cutouts_csv(rows));
    return rows;
}

}  // namespace signsynth
