#pragma once

// Plan execution. Work is split into composites (one sign variant on one
// background); each composite fans out into its condition and occlusion
// records. Workers pull composites from a shared counter and results are
// appended to the manifest in record order, so the output bytes do not
// depend on the number of workers.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <sstream>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "signsynth/augment.hpp"
#include "signsynth/compose.hpp"
#include "signsynth/config.hpp"
#include "signsynth/environment.hpp"
#include "signsynth/error.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/occlusion.hpp"
#include "signsynth/plan.hpp"

namespace signsynth {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kJpegExportQuality = 95;

struct LoadedAssets {
    std::vector<SignAsset> signs;
    std::vector<BackgroundAsset> backgrounds;
    std::vector<ObstacleAsset> obstacles;
};

inline LoadedAssets load_assets(const Catalog& cat) {
    LoadedAssets a;
    for (const auto& s : cat.signs) {
        SignAsset sign{s.id, s.cls, load_image(s.file)};
        validate_sign(sign);
        a.signs.push_back(std::move(sign));
    }
    for (const auto& b : cat.backgrounds) {
        BackgroundAsset bg{b.id, load_image(b.file), b.placements};
        validate_background(bg);
        a.backgrounds.push_back(std::move(bg));
    }
    for (const auto& o : cat.obstacles) {
        ObstacleAsset ob{o.id, o.category, load_image(o.file)};
        validate_obstacle(ob);
        a.obstacles.push_back(std::move(ob));
    }
    return a;
}

/// Run `fn(i)` for i in [0, n) on up to `jobs` threads. The exception of the
/// lowest failing index is rethrown after all workers stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr error;
    auto work = [&] {
        for (;;) {
            if (stop.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    error = std::current_exception();
                }
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Manifest fields

inline nlohmann::ordered_json variant_json(const PlanRecord& r) {
    using nlohmann::ordered_json;
    const auto& p = r.variant;
    ordered_json j;
    j["index"] = r.variant_index;
    j["kind"] = variant_kind_name(p.kind);
    switch (p.kind) {
        case VariantKind::Original: break;
        case VariantKind::Rotate: j["angle_deg"] = p.angle_deg; break;
        case VariantKind::Shear: j["shear_deg"] = p.shear_deg; break;
        case VariantKind::Scale: j["factor"] = p.scale; break;
        case VariantKind::Crop: j["crop"] = {p.crop_left, p.crop_right, p.crop_top, p.crop_bottom}; break;
        case VariantKind::Translate: j["translate"] = {p.translate_x, p.translate_y}; break;
        case VariantKind::Brightness: j["factor"] = p.brightness; break;
        case VariantKind::Noise: j["amplitude"] = p.noise_amplitude; break;
        case VariantKind::GaussianBlur: j["sigma"] = p.blur_sigma; break;
        case VariantKind::LinearContrast: j["alpha"] = p.contrast; break;
        case VariantKind::MedianBlur: j["kernel"] = p.median_kernel; break;
    }
    ordered_json d;
    d["kind"] = deformation_name(p.deformation);
    if (p.deformation == Deformation::PiecewiseAffine || p.deformation == Deformation::Perspective)
        d["strength"] = p.deform_strength;
    else if (p.deformation == Deformation::JpegCompression)
        d["strength"] = p.jpeg_strength;
    j["deformation"] = d;
    j["effect_seed"] = p.effect_seed;
    return j;
}

inline nlohmann::ordered_json env_json(const std::optional<EnvCondition>& cond) {
    using nlohmann::ordered_json;
    if (!cond) return nullptr;
    auto rgb = [](const Rgb& c) { return ordered_json::array({c[0], c[1], c[2]}); };
    ordered_json j;
    j["kind"] = env_kind_name(cond->kind());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RainParams>) {
                j["streaks"] = p.streaks;
                j["slant_deg"] = p.slant_deg;
                j["length_range"] = {p.length_min, p.length_max};
                j["opacity"] = p.opacity;
                j["color"] = rgb(p.color);
                j["blur_sigma"] = p.blur_sigma;
                j["seed"] = p.seed;
            } else if constexpr (std::is_same_v<T, SnowParams>) {
                j["flakes"] = p.flakes;
                j["radius_range"] = {p.radius_min, p.radius_max};
                j["opacity"] = p.opacity;
                j["brightness"] = p.brightness;
                j["seed"] = p.seed;
            } else if constexpr (std::is_same_v<T, FogParams>) {
                j["opacity"] = p.opacity;
                j["color"] = rgb(p.color);
            } else if constexpr (std::is_same_v<T, SunFlareParams>) {
                j["center"] = {p.center_x, p.center_y};
                j["radius"] = p.radius;
                j["peak"] = p.peak;
            } else if constexpr (std::is_same_v<T, DayParams>) {
                j["brightness"] = p.brightness;
                j["red_shift"] = p.red_shift;
                j["blue_shift"] = p.blue_shift;
            } else if constexpr (std::is_same_v<T, NightParams>) {
                j["gamma"] = p.gamma;
                j["blue_shift"] = p.blue_shift;
            } else {
                j["color"] = rgb(p.color);
                j["opacity"] = p.opacity;
                j["brightness"] = p.brightness;
            }
        },
        cond->params);
    return j;
}

inline nlohmann::ordered_json occlusion_json(const PlanRecord& r, const OcclusionParams& p, ObstacleCategory cat) {
    nlohmann::ordered_json j;
    j["slot"] = r.occlusion_slot;
    j["obstacle_id"] = p.obstacle_id;
    j["category"] = obstacle_category_name(cat);
    j["scale"] = p.scale;
    j["position"] = {p.x, p.y};
    j["size"] = {p.width, p.height};
    j["opacity"] = p.opacity;
    j["coverage"] = p.coverage;
    j["attempts"] = p.attempts;
    j["fallback"] = p.fallback;
    return j;
}

inline std::string format_unit(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// `<class> <cx> <cy> <w> <h>\n`, normalized and printed with 6 decimals.
inline std::string yolo_label(const BBox& box, int scene_w, int scene_h) {
    const auto& r = box.rect;
    return std::to_string(box.class_index) + " " + format_unit((r.x + r.w / 2.0) / scene_w) + " " +
           format_unit((r.y + r.h / 2.0) / scene_h) + " " + format_unit(static_cast<double>(r.w) / scene_w) + " " +
           format_unit(static_cast<double>(r.h) / scene_h) + "\n";
}

inline std::string record_stem(std::uint64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08llu", static_cast<unsigned long long>(id));
    return buf;
}

// ---------------------------------------------------------------------------
// Output directory

/// Entries owned by a run inside the output directory.
inline const std::vector<std::string>& managed_entries() {
    static const std::vector<std::string> names = {"images", "labels", "manifest.jsonl", "dataset.json"};
    return names;
}

/// Create `dir`, or clear the managed entries of an existing non-empty one
/// when `force` is set.
inline void prepare_output_dir(const std::filesystem::path& dir, bool force) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw ConfigError("output path is not a directory: " + dir.string());
        if (!fs::is_empty(dir)) {
            if (!force) throw ConfigError("output directory is not empty: " + dir.string() + " (use --force)");
            for (const auto& name : managed_entries()) fs::remove_all(dir / name, ec);
            if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
        }
    }
    fs::create_directories(dir / "images", ec);
    if (!ec) fs::create_directories(dir / "labels", ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Execution

struct Rejection {
    std::uint64_t record_id = 0;
    std::string reason;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> limit;
    std::ostream* log = nullptr;  // rejected records are reported here
};

struct RunResult {
    std::uint64_t planned = 0;    // plan size
    std::uint64_t attempted = 0;  // records inside the limit
    std::uint64_t written = 0;
    std::vector<Rejection> rejected;
    std::string manifest_hash;
};

namespace detail {

struct RecordOutput {
    std::uint64_t record_id = 0;
    std::string line;  // manifest line; empty when rejected
    std::string reason;
};

class Executor {
public:
    Executor(const Plan& plan, const LoadedAssets& assets, const std::filesystem::path& out)
        : plan_(plan), assets_(assets), out_(out) {
        const auto& cfg = plan.config();
        jpeg_ = cfg.image_format == "jpeg";
        if (assets.signs.size() != plan.catalog().signs.size() ||
            assets.backgrounds.size() != plan.catalog().backgrounds.size() ||
            assets.obstacles.size() != plan.catalog().obstacles.size())
            throw ArgumentError("loaded assets do not match the plan catalog");
    }

    RasterImage render_variant_image(std::uint64_t ordinal) const {
        const auto [s, v] = plan_.variant_position(ordinal);
        return render_variant(assets_.signs[s].image, plan_.variant_params(ordinal, v));
    }

    /// Records [first, last) of composite `c`, rendered and written.
    std::vector<RecordOutput> run_composite(std::uint64_t first, std::uint64_t last, const RasterImage& variant) const {
        std::vector<RecordOutput> out;
        const PlanRecord head = plan_.record(first);
        const auto& bg = assets_.backgrounds[head.background_index];
        std::optional<CompositeResult> comp;
        std::string reject;
        try {
            comp = composite(bg.image, variant, head.placement, static_cast<int>(head.cls));
        } catch (const NoBBoxError& e) {
            reject = e.what();
        }
        std::optional<RasterImage> env_scene;
        std::optional<EnvCondition> env_for;
        for (std::uint64_t id = first; id < last; ++id) {
            const PlanRecord r = id == first ? head : plan_.record(id);
            if (!comp) {
                out.push_back({id, "", reject});
                continue;
            }
            if (!env_scene || env_for != r.env) {
                env_scene = r.env ? apply_condition(comp->image, *r.env) : comp->image;
                env_for = r.env;
            }
            RasterImage scene = *env_scene;
            std::optional<std::pair<OcclusionParams, ObstacleCategory>> occ;
            if (r.occlusion) {
                const auto& obstacle = assets_.obstacles[r.occlusion->obstacle_index];
                try {
                    Rng rng = occlusion_geometry_rng(*r.occlusion, assets_.obstacles.size());
                    const auto params = sample_occlusion(comp->bbox.rect, obstacle, rng, plan_.config().occlusion);
                    scene = overlay_obstacle(scene, obstacle, params);
                    occ.emplace(params, obstacle.category);
                } catch (const AssetError& e) {
                    out.push_back({id, "", std::string("occlusion failed: ") + e.what()});
                    continue;
                }
            }
            out.push_back({id, write_record(r, scene, comp->bbox, occ), ""});
        }
        return out;
    }

private:
    std::string write_record(const PlanRecord& r, const RasterImage& scene, const BBox& box,
                             const std::optional<std::pair<OcclusionParams, ObstacleCategory>>& occ) const {
        const std::string stem = record_stem(r.record_id);
        const std::string image_rel = "images/" + stem + (jpeg_ ? ".jpg" : ".png");
        const std::string label_rel = "labels/" + stem + ".txt";
        const std::string label = yolo_label(box, scene.width(), scene.height());
        try {
            const Bytes data = jpeg_ ? encode_jpeg(scene, kJpegExportQuality) : encode_png(scene);
            write_file(out_ / image_rel, data.data(), data.size());
            write_file(out_ / label_rel, label);
        } catch (const std::exception& e) {
            throw IoError("record " + std::to_string(r.record_id) + ": " + e.what());
        }
        nlohmann::ordered_json j;
        j["record_id"] = r.record_id;
        j["image"] = image_rel;
        j["label"] = label_rel;
        j["class_index"] = static_cast<int>(r.cls);
        j["class_name"] = class_name(r.cls);
        j["bbox_px"] = {box.rect.x, box.rect.y, box.rect.w, box.rect.h};
        nlohmann::ordered_json yolo = nlohmann::ordered_json::array();
        std::size_t pos = label.find(' ');
        for (int i = 0; i < 4; ++i) {
            const std::size_t end = label.find_first_of(" \n", pos + 1);
            yolo.push_back(std::stod(label.substr(pos + 1, end - pos - 1)));
            pos = end;
        }
        j["bbox_yolo"] = yolo;
        j["sign_id"] = r.sign_id;
        j["variant"] = variant_json(r);
        j["background_id"] = r.background_id;
        j["placement"] = {r.placement.x, r.placement.y, r.placement.w, r.placement.h};
        j["env"] = env_json(r.env);
        j["occlusion"] = occ ? occlusion_json(r, occ->first, occ->second) : nlohmann::ordered_json(nullptr);
        return j.dump();
    }

    const Plan& plan_;
    const LoadedAssets& assets_;
    std::filesystem::path out_;
    bool jpeg_ = false;
};

}  // namespace detail

/// Render records [0, limit) into `out` (which must already be prepared)
/// and write `manifest.jsonl` and `dataset.json`.
inline RunResult execute(const Plan& plan, const LoadedAssets& assets, const std::filesystem::path& out,
                         const RunOptions& opt = {}) {
    RunResult res;
    res.planned = plan.size();
    res.attempted = opt.limit ? std::min(*opt.limit, res.planned) : res.planned;
    const std::uint64_t per_comp = plan.records_per_composite();
    const std::uint64_t comp_end = (res.attempted + per_comp - 1) / per_comp;
    const std::uint64_t B = plan.background_factor();
    const std::uint64_t var_end = (comp_end + B - 1) / B;

    detail::Executor ex(plan, assets, out);
    const auto manifest_path = out / "manifest.jsonl";
    std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
    if (!manifest) throw IoError("cannot write " + manifest_path.string());
    std::uint64_t hash = fnv1a64("");

    const std::uint64_t block = static_cast<std::uint64_t>(std::max(8, 4 * opt.jobs));
    for (std::uint64_t g0 = 0; g0 < var_end; g0 += block) {
        const std::uint64_t g1 = std::min(var_end, g0 + block);
        std::vector<std::optional<RasterImage>> variants(g1 - g0);
        parallel_for(variants.size(), opt.jobs, [&](std::size_t i) { variants[i] = ex.render_variant_image(g0 + i); });

        const std::uint64_t c0 = g0 * B, c1 = std::min(comp_end, g1 * B);
        std::vector<std::vector<detail::RecordOutput>> results(c1 - c0);
        parallel_for(results.size(), opt.jobs, [&](std::size_t i) {
            const std::uint64_t c = c0 + i;
            const std::uint64_t first = c * per_comp, last = std::min(res.attempted, first + per_comp);
            results[i] = ex.run_composite(first, last, *variants[c / B - g0]);
        });
        for (const auto& rs : results)
            for (const auto& r : rs) {
                if (r.line.empty()) {
                    res.rejected.push_back({r.record_id, r.reason});
                    if (opt.log) *opt.log << "rejected record " << r.record_id << ": " << r.reason << "\n";
                    continue;
                }
                manifest << r.line << '\n';
                hash = fnv1a64(r.line + "\n", hash);
                ++res.written;
            }
        if (!manifest) throw IoError("write failed: " + manifest_path.string());
    }
    manifest.close();
    if (!manifest) throw IoError("write failed: " + manifest_path.string());
    {
        std::ostringstream os;
        os << std::hex;
        os.width(16);
        os.fill('0');
        os << hash;
        res.manifest_hash = os.str();
    }

    nlohmann::ordered_json header;
    header["tool"] = "signsynth";
    header["version"] = kToolVersion;
    header["config_hash"] = config_hash(plan.config());
    header["seed"] = plan.config().seed;
    header["planned_records"] = res.planned;
    header["attempted_records"] = res.attempted;
    header["written_records"] = res.written;
    header["manifest"] = "manifest.jsonl";
    header["manifest_hash"] = res.manifest_hash;
    nlohmann::ordered_json rejected = nlohmann::ordered_json::array();
    for (const auto& r : res.rejected) rejected.push_back({{"record_id", r.record_id}, {"reason", r.reason}});
    header["rejected"] = rejected;
    header["config"] = config_to_json(plan.config());
    write_file(out / "dataset.json", header.dump(2) + "\n");
    return res;
}

}  // namespace signsynth
