#pragma once

// Pipeline configuration: a single JSON file whose relative paths resolve
// against the file's directory. Unknown keys are rejected. See
// docs/config.md for every key and its default.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "signsynth/augment.hpp"
#include "signsynth/environment.hpp"
#include "signsynth/error.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/occlusion.hpp"
#include "signsynth/rng.hpp"

namespace signsynth {

enum class PlacementPolicy { First, Random };

struct PipelineConfig {
    std::filesystem::path base_dir = ".";

    std::filesystem::path signs_dir;
    std::string signs_csv = "signs.csv";
    std::filesystem::path backgrounds_dir;
    std::string placements_csv = "placements.csv";
    PlacementPolicy placement_policy = PlacementPolicy::First;
    std::filesystem::path obstacles_dir;

    struct Stages {
        bool augment = true;
        bool environment = true;
        bool occlusion = true;
    } stages;

    AugmentRanges augment;
    EnvSettings env;
    OcclusionSettings occlusion;
    int occluded_copies = 2;

    struct Balance {
        bool enabled = false;
        long long target = 0;
    } balance;

    std::filesystem::path output_dir = "out";
    std::string label_format = "yolo";
    std::string image_format = "png";

    std::uint64_t seed = 0;
    int jobs = 1;
    std::optional<std::uint64_t> limit;

    std::filesystem::path signs_csv_path() const { return signs_dir / signs_csv; }
    std::filesystem::path placements_csv_path() const { return backgrounds_dir / placements_csv; }
};

namespace detail {

using nlohmann::json;

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw ConfigError(source_ + ": " + path + ": " + msg);
    }

    void expect_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
        if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) {
                std::string valid;
                for (const auto& k : allowed) valid += (valid.empty() ? "" : ", ") + k;
                fail(join(path, it.key()), "unknown key (valid: " + valid + ")");
            }
    }

    static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }
    long long integer(const json& v, const std::string& path) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        return v.get<long long>();
    }
    bool boolean(const json& v, const std::string& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }
    std::string string(const json& v, const std::string& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }
    std::pair<double, double> range(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(path, "expected [min, max]");
        const double lo = v[0].get<double>(), hi = v[1].get<double>();
        if (lo > hi) fail(path, "min exceeds max");
        return {lo, hi};
    }
    std::pair<int, int> int_range(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
            fail(path, "expected [min, max] integers");
        const int lo = v[0].get<int>(), hi = v[1].get<int>();
        if (lo > hi) fail(path, "min exceeds max");
        return {lo, hi};
    }
    Rgb color(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 3) fail(path, "expected [r, g, b]");
        Rgb c{};
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number()) fail(path, "expected [r, g, b]");
            c[i] = v[i].get<double>();
            if (c[i] < 0 || c[i] > 255) fail(path, "colour components must lie in [0, 255]");
        }
        return c;
    }

private:
    std::string source_;
};

}  // namespace detail

/// Parse configuration text. `base_dir` anchors relative paths.
inline PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                                   const std::string& source = "config") {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    detail::ConfigReader rd(source);
    rd.expect_keys(doc, "",
                   {"signs", "backgrounds", "obstacles", "stages", "augment", "env", "occlusion", "balance", "output",
                    "seed", "jobs", "limit"});

    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    auto resolve = [&](const std::string& p) { return (base_dir / p).lexically_normal(); };

    if (doc.contains("signs")) {
        const auto& s = doc["signs"];
        rd.expect_keys(s, "signs", {"dir", "csv"});
        if (s.contains("dir")) cfg.signs_dir = resolve(rd.string(s["dir"], "signs.dir"));
        if (s.contains("csv")) cfg.signs_csv = rd.string(s["csv"], "signs.csv");
    }
    if (doc.contains("backgrounds")) {
        const auto& b = doc["backgrounds"];
        rd.expect_keys(b, "backgrounds", {"dir", "placements", "placement_policy"});
        if (b.contains("dir")) cfg.backgrounds_dir = resolve(rd.string(b["dir"], "backgrounds.dir"));
        if (b.contains("placements")) cfg.placements_csv = rd.string(b["placements"], "backgrounds.placements");
        if (b.contains("placement_policy")) {
            const auto v = rd.string(b["placement_policy"], "backgrounds.placement_policy");
            if (v == "first") cfg.placement_policy = PlacementPolicy::First;
            else if (v == "random") cfg.placement_policy = PlacementPolicy::Random;
            else rd.fail("backgrounds.placement_policy", "expected \"first\" or \"random\"");
        }
    }
    if (doc.contains("obstacles")) {
        const auto& o = doc["obstacles"];
        rd.expect_keys(o, "obstacles", {"dir"});
        if (o.contains("dir")) cfg.obstacles_dir = resolve(rd.string(o["dir"], "obstacles.dir"));
    }
    if (doc.contains("stages")) {
        const auto& s = doc["stages"];
        rd.expect_keys(s, "stages", {"augment", "environment", "occlusion"});
        if (s.contains("augment")) cfg.stages.augment = rd.boolean(s["augment"], "stages.augment");
        if (s.contains("environment")) cfg.stages.environment = rd.boolean(s["environment"], "stages.environment");
        if (s.contains("occlusion")) cfg.stages.occlusion = rd.boolean(s["occlusion"], "stages.occlusion");
    }
    if (doc.contains("augment")) {
        const auto& a = doc["augment"];
        auto& r = cfg.augment;
        rd.expect_keys(a, "augment",
                       {"rotate_deg", "shear_deg", "scale", "crop_max", "translate_max", "brightness", "noise_max",
                        "blur_sigma_max", "contrast", "median_kernels", "piecewise_strength_max",
                        "perspective_strength_max", "jpeg_strength_max"});
        if (a.contains("rotate_deg")) std::tie(r.rotate_min, r.rotate_max) = rd.range(a["rotate_deg"], "augment.rotate_deg");
        if (a.contains("shear_deg")) std::tie(r.shear_min, r.shear_max) = rd.range(a["shear_deg"], "augment.shear_deg");
        if (a.contains("scale")) std::tie(r.scale_min, r.scale_max) = rd.range(a["scale"], "augment.scale");
        if (a.contains("crop_max")) r.crop_max = rd.number(a["crop_max"], "augment.crop_max");
        if (a.contains("translate_max")) r.translate_max = rd.number(a["translate_max"], "augment.translate_max");
        if (a.contains("brightness"))
            std::tie(r.brightness_min, r.brightness_max) = rd.range(a["brightness"], "augment.brightness");
        if (a.contains("noise_max")) r.noise_max = static_cast<int>(rd.integer(a["noise_max"], "augment.noise_max"));
        if (a.contains("blur_sigma_max")) r.blur_sigma_max = rd.number(a["blur_sigma_max"], "augment.blur_sigma_max");
        if (a.contains("contrast")) std::tie(r.contrast_min, r.contrast_max) = rd.range(a["contrast"], "augment.contrast");
        if (a.contains("median_kernels")) {
            const auto& k = a["median_kernels"];
            if (!k.is_array()) rd.fail("augment.median_kernels", "expected an array of integers");
            r.median_kernels.clear();
            for (const auto& v : k) r.median_kernels.push_back(static_cast<int>(rd.integer(v, "augment.median_kernels")));
        }
        if (a.contains("piecewise_strength_max"))
            r.piecewise_strength_max = rd.number(a["piecewise_strength_max"], "augment.piecewise_strength_max");
        if (a.contains("perspective_strength_max"))
            r.perspective_strength_max = rd.number(a["perspective_strength_max"], "augment.perspective_strength_max");
        if (a.contains("jpeg_strength_max"))
            r.jpeg_strength_max = static_cast<int>(rd.integer(a["jpeg_strength_max"], "augment.jpeg_strength_max"));
    }
    if (doc.contains("env")) {
        const auto& e = doc["env"];
        auto& s = cfg.env;
        rd.expect_keys(e, "env", {"rain", "snow", "fog", "sun_flare", "day", "night", "dawn"});
        if (e.contains("rain")) {
            const auto& r = e["rain"];
            rd.expect_keys(r, "env.rain", {"count_range", "length_range", "slant_range", "opacity", "color", "blur_sigma"});
            if (r.contains("count_range")) std::tie(s.rain.count_min, s.rain.count_max) = rd.int_range(r["count_range"], "env.rain.count_range");
            if (r.contains("length_range")) std::tie(s.rain.length_min, s.rain.length_max) = rd.range(r["length_range"], "env.rain.length_range");
            if (r.contains("slant_range")) std::tie(s.rain.slant_min, s.rain.slant_max) = rd.range(r["slant_range"], "env.rain.slant_range");
            if (r.contains("opacity")) s.rain.opacity = rd.number(r["opacity"], "env.rain.opacity");
            if (r.contains("color")) s.rain.color = rd.color(r["color"], "env.rain.color");
            if (r.contains("blur_sigma")) s.rain.blur_sigma = rd.number(r["blur_sigma"], "env.rain.blur_sigma");
        }
        if (e.contains("snow")) {
            const auto& r = e["snow"];
            rd.expect_keys(r, "env.snow", {"count_range", "radius_range", "opacity", "brightness"});
            if (r.contains("count_range")) std::tie(s.snow.count_min, s.snow.count_max) = rd.int_range(r["count_range"], "env.snow.count_range");
            if (r.contains("radius_range")) std::tie(s.snow.radius_min, s.snow.radius_max) = rd.int_range(r["radius_range"], "env.snow.radius_range");
            if (r.contains("opacity")) s.snow.opacity = rd.number(r["opacity"], "env.snow.opacity");
            if (r.contains("brightness")) s.snow.brightness = rd.number(r["brightness"], "env.snow.brightness");
        }
        if (e.contains("fog")) {
            const auto& r = e["fog"];
            rd.expect_keys(r, "env.fog", {"opacity_range", "color"});
            if (r.contains("opacity_range")) std::tie(s.fog.opacity_min, s.fog.opacity_max) = rd.range(r["opacity_range"], "env.fog.opacity_range");
            if (r.contains("color")) s.fog.color = rd.color(r["color"], "env.fog.color");
        }
        if (e.contains("sun_flare")) {
            const auto& r = e["sun_flare"];
            rd.expect_keys(r, "env.sun_flare", {"radius_range", "center_y_max", "peak"});
            if (r.contains("radius_range")) std::tie(s.sun_flare.radius_min, s.sun_flare.radius_max) = rd.range(r["radius_range"], "env.sun_flare.radius_range");
            if (r.contains("center_y_max")) s.sun_flare.center_y_max = rd.number(r["center_y_max"], "env.sun_flare.center_y_max");
            if (r.contains("peak")) s.sun_flare.peak = rd.number(r["peak"], "env.sun_flare.peak");
        }
        if (e.contains("day")) {
            const auto& r = e["day"];
            rd.expect_keys(r, "env.day", {"brightness", "red_shift", "blue_shift"});
            if (r.contains("brightness")) s.day.brightness = rd.number(r["brightness"], "env.day.brightness");
            if (r.contains("red_shift")) s.day.red_shift = rd.number(r["red_shift"], "env.day.red_shift");
            if (r.contains("blue_shift")) s.day.blue_shift = rd.number(r["blue_shift"], "env.day.blue_shift");
        }
        if (e.contains("night")) {
            const auto& r = e["night"];
            rd.expect_keys(r, "env.night", {"gamma", "blue_shift"});
            if (r.contains("gamma")) s.night.gamma = rd.number(r["gamma"], "env.night.gamma");
            if (r.contains("blue_shift")) s.night.blue_shift = rd.number(r["blue_shift"], "env.night.blue_shift");
        }
        if (e.contains("dawn")) {
            const auto& r = e["dawn"];
            rd.expect_keys(r, "env.dawn", {"color", "opacity", "brightness"});
            if (r.contains("color")) s.dawn.color = rd.color(r["color"], "env.dawn.color");
            if (r.contains("opacity")) s.dawn.opacity = rd.number(r["opacity"], "env.dawn.opacity");
            if (r.contains("brightness")) s.dawn.brightness = rd.number(r["brightness"], "env.dawn.brightness");
        }
    }
    if (doc.contains("occlusion")) {
        const auto& o = doc["occlusion"];
        auto& s = cfg.occlusion;
        rd.expect_keys(o, "occlusion", {"coverage_window", "opacity_range", "scale_range", "max_attempts", "occluded_copies"});
        if (o.contains("coverage_window")) std::tie(s.coverage_min, s.coverage_max) = rd.range(o["coverage_window"], "occlusion.coverage_window");
        if (o.contains("opacity_range")) std::tie(s.opacity_min, s.opacity_max) = rd.range(o["opacity_range"], "occlusion.opacity_range");
        if (o.contains("scale_range")) std::tie(s.scale_min, s.scale_max) = rd.range(o["scale_range"], "occlusion.scale_range");
        if (o.contains("max_attempts")) s.max_attempts = static_cast<int>(rd.integer(o["max_attempts"], "occlusion.max_attempts"));
        if (o.contains("occluded_copies")) {
            cfg.occluded_copies = static_cast<int>(rd.integer(o["occluded_copies"], "occlusion.occluded_copies"));
            if (cfg.occluded_copies < 1) rd.fail("occlusion.occluded_copies", "must be >= 1");
        }
    }
    if (doc.contains("balance")) {
        const auto& b = doc["balance"];
        rd.expect_keys(b, "balance", {"enabled", "target"});
        if (b.contains("enabled")) cfg.balance.enabled = rd.boolean(b["enabled"], "balance.enabled");
        if (b.contains("target")) cfg.balance.target = rd.integer(b["target"], "balance.target");
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        rd.expect_keys(o, "output", {"dir", "label_format", "image_format"});
        if (o.contains("dir")) cfg.output_dir = resolve(rd.string(o["dir"], "output.dir"));
        if (o.contains("label_format")) {
            cfg.label_format = rd.string(o["label_format"], "output.label_format");
            if (cfg.label_format != "yolo") rd.fail("output.label_format", "only \"yolo\" is supported");
        }
        if (o.contains("image_format")) {
            cfg.image_format = rd.string(o["image_format"], "output.image_format");
            if (cfg.image_format != "png" && cfg.image_format != "jpeg")
                rd.fail("output.image_format", "expected \"png\" or \"jpeg\"");
        }
    } else {
        cfg.output_dir = resolve("out");
    }
    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        if (s.is_number_unsigned()) cfg.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) cfg.seed = static_cast<std::uint64_t>(s.get<long long>());
        else rd.fail("seed", "expected a non-negative 64-bit integer");
    }
    if (doc.contains("jobs")) {
        cfg.jobs = static_cast<int>(rd.integer(doc["jobs"], "jobs"));
        if (cfg.jobs < 1) rd.fail("jobs", "must be >= 1");
    }
    if (doc.contains("limit") && !doc["limit"].is_null()) {
        const long long l = rd.integer(doc["limit"], "limit");
        if (l < 0) rd.fail("limit", "must be >= 0");
        cfg.limit = static_cast<std::uint64_t>(l);
    }

    validate_ranges(cfg.augment);
    validate_env_settings(cfg.env);
    validate_occlusion_settings(cfg.occlusion);
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    const Bytes data = read_file(path);
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_config(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()), base, path.string());
}

/// Effective configuration as JSON. Paths are written relative to the config
/// directory; run-local settings (jobs, output dir, limit) are omitted unless
/// `include_run_settings` is set.
inline nlohmann::ordered_json config_to_json(const PipelineConfig& c, bool include_run_settings = false) {
    using nlohmann::ordered_json;
    auto rel = [&](const std::filesystem::path& p) { return p.empty() ? std::string() : p.lexically_relative(c.base_dir).generic_string(); };
    auto pair = [](double a, double b) { return ordered_json::array({a, b}); };
    auto rgb = [](const Rgb& v) { return ordered_json::array({v[0], v[1], v[2]}); };
    ordered_json j;
    j["signs"] = {{"dir", rel(c.signs_dir)}, {"csv", c.signs_csv}};
    j["backgrounds"] = {{"dir", rel(c.backgrounds_dir)},
                        {"placements", c.placements_csv},
                        {"placement_policy", c.placement_policy == PlacementPolicy::First ? "first" : "random"}};
    j["obstacles"] = {{"dir", rel(c.obstacles_dir)}};
    j["stages"] = {{"augment", c.stages.augment}, {"environment", c.stages.environment}, {"occlusion", c.stages.occlusion}};
    const auto& a = c.augment;
    j["augment"] = {{"rotate_deg", pair(a.rotate_min, a.rotate_max)},
                    {"shear_deg", pair(a.shear_min, a.shear_max)},
                    {"scale", pair(a.scale_min, a.scale_max)},
                    {"crop_max", a.crop_max},
                    {"translate_max", a.translate_max},
                    {"brightness", pair(a.brightness_min, a.brightness_max)},
                    {"noise_max", a.noise_max},
                    {"blur_sigma_max", a.blur_sigma_max},
                    {"contrast", pair(a.contrast_min, a.contrast_max)},
                    {"median_kernels", a.median_kernels},
                    {"piecewise_strength_max", a.piecewise_strength_max},
                    {"perspective_strength_max", a.perspective_strength_max},
                    {"jpeg_strength_max", a.jpeg_strength_max}};
    const auto& e = c.env;
    j["env"] = {
        {"rain", {{"count_range", {e.rain.count_min, e.rain.count_max}},
                  {"length_range", pair(e.rain.length_min, e.rain.length_max)},
                  {"slant_range", pair(e.rain.slant_min, e.rain.slant_max)},
                  {"opacity", e.rain.opacity},
                  {"color", rgb(e.rain.color)},
                  {"blur_sigma", e.rain.blur_sigma}}},
        {"snow", {{"count_range", {e.snow.count_min, e.snow.count_max}},
                  {"radius_range", {e.snow.radius_min, e.snow.radius_max}},
                  {"opacity", e.snow.opacity},
                  {"brightness", e.snow.brightness}}},
        {"fog", {{"opacity_range", pair(e.fog.opacity_min, e.fog.opacity_max)}, {"color", rgb(e.fog.color)}}},
        {"sun_flare", {{"radius_range", pair(e.sun_flare.radius_min, e.sun_flare.radius_max)},
                       {"center_y_max", e.sun_flare.center_y_max},
                       {"peak", e.sun_flare.peak}}},
        {"day", {{"brightness", e.day.brightness}, {"red_shift", e.day.red_shift}, {"blue_shift", e.day.blue_shift}}},
        {"night", {{"gamma", e.night.gamma}, {"blue_shift", e.night.blue_shift}}},
        {"dawn", {{"color", rgb(e.dawn.color)}, {"opacity", e.dawn.opacity}, {"brightness", e.dawn.brightness}}}};
    const auto& o = c.occlusion;
    j["occlusion"] = {{"coverage_window", pair(o.coverage_min, o.coverage_max)},
                      {"opacity_range", pair(o.opacity_min, o.opacity_max)},
                      {"scale_range", pair(o.scale_min, o.scale_max)},
                      {"max_attempts", o.max_attempts},
                      {"occluded_copies", c.occluded_copies}};
    j["balance"] = {{"enabled", c.balance.enabled}, {"target", c.balance.target}};
    j["output"] = {{"label_format", c.label_format}, {"image_format", c.image_format}};
    j["seed"] = c.seed;
    if (include_run_settings) {
        j["output"]["dir"] = c.output_dir.generic_string();
        j["jobs"] = c.jobs;
        j["limit"] = c.limit ? ordered_json(*c.limit) : ordered_json(nullptr);
    }
    return j;
}

/// FNV-1a of the canonical effective configuration, as 16 hex digits.
inline std::string config_hash(const PipelineConfig& c) {
    const std::uint64_t h = fnv1a64(config_to_json(c).dump());
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace signsynth
