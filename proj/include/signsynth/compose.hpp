#pragma once

// Scene composition: place a sign variant into a background scene at an
// annotated slot and derive its detection box from the placed alpha support.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "signsynth/csv.hpp"
#include "signsynth/error.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/raster.hpp"

namespace signsynth {

inline constexpr int kMinPlacementExtent = 4;

/// Target slot for a sign in a background, in pixels.
struct Placement {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    PixelRect rect() const { return {x, y, w, h}; }

    friend bool operator==(const Placement&, const Placement&) = default;
};

struct BackgroundAsset {
    std::string id;
    RasterImage image;
    std::vector<Placement> placements;
};

/// Raised when a variant has no visible pixel once placed; the record is
/// rejected instead of labelled.
class NoBBoxError : public AssetError {
public:
    using AssetError::AssetError;
};

inline void validate_placement(const Placement& p, int scene_w, int scene_h, const std::string& bg_id) {
    const std::string where = "placement (" + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
                              std::to_string(p.w) + "," + std::to_string(p.h) + ") of '" + bg_id + "'";
    if (p.w < kMinPlacementExtent || p.h < kMinPlacementExtent)
        throw ConfigError(where + ": width and height must be >= 4");
    if (p.x < 0 || p.y < 0) throw ConfigError(where + ": negative coordinates");
    if (scene_w > 0 && (p.x + p.w > scene_w || p.y + p.h > scene_h))
        throw ConfigError(where + ": exceeds scene " + std::to_string(scene_w) + "x" + std::to_string(scene_h));
}

inline void validate_background(const BackgroundAsset& bg) {
    if (bg.placements.empty()) throw ConfigError("background '" + bg.id + "' has no placements");
    if (!bg.image.fully_opaque()) throw AssetError("background '" + bg.id + "' is not fully opaque");
    for (const auto& p : bg.placements) validate_placement(p, bg.image.width(), bg.image.height(), bg.id);
}

struct CompositeResult {
    RasterImage image;
    BBox bbox;
};

/// Resize the variant to the slot, blend it over the scene and label it with
/// the tight alpha box of the placed sprite in scene coordinates.
inline CompositeResult composite(const RasterImage& scene, const RasterImage& variant, const Placement& placement,
                                 int class_index) {
    validate_placement(placement, scene.width(), scene.height(), "scene");
    const RasterImage sized = resize_bilinear(variant, placement.w, placement.h);
    const auto support = tight_alpha_bbox(sized);
    if (!support) throw NoBBoxError("variant is fully transparent after placement");
    PixelRect box{support->x + placement.x, support->y + placement.y, support->w, support->h};
    box = intersect(box, scene.bounds());
    return {alpha_over(sized, scene, {placement.x, placement.y}), BBox{class_index, box}};
}

inline CompositeResult composite(const BackgroundAsset& bg, const RasterImage& variant, const Placement& placement,
                                 int class_index) {
    return composite(bg.image, variant, placement, class_index);
}

/// Rows of a placements file (`background,x,y,w,h`), grouped per background
/// in order of first appearance.
struct PlacementTable {
    std::vector<std::string> backgrounds;
    std::map<std::string, std::vector<Placement>> slots;
};

inline PlacementTable parse_placements_csv(std::string_view text, const std::string& source = "placements.csv") {
    PlacementTable table;
    for (const auto& row : parse_csv_with_header(text, {"background", "x", "y", "w", "h"}, source)) {
        Placement p;
        int* dst[4] = {&p.x, &p.y, &p.w, &p.h};
        for (int i = 0; i < 4; ++i) {
            const std::string& f = row.fields[static_cast<std::size_t>(i) + 1];
            std::size_t used = 0;
            try {
                *dst[i] = std::stoi(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f.size())
                throw ParseError(source + ":" + std::to_string(row.line) + ": '" + f + "' is not an integer");
        }
        const std::string& id = row.fields[0];
        if (id.empty()) throw ParseError(source + ":" + std::to_string(row.line) + ": empty background name");
        validate_placement(p, 0, 0, id);
        if (!table.slots.count(id)) table.backgrounds.push_back(id);
        table.slots[id].push_back(p);
    }
    return table;
}

/// Load every background named in the table from `dir` and validate slots
/// against the decoded image size.
inline std::vector<BackgroundAsset> load_backgrounds(const PlacementTable& table, const std::filesystem::path& dir) {
    std::vector<BackgroundAsset> out;
    for (const auto& id : table.backgrounds) {
        const auto path = dir / id;
        if (!std::filesystem::exists(path)) throw ConfigError("background file not found: " + path.string());
        BackgroundAsset bg{id, load_image(path), table.slots.at(id)};
        validate_background(bg);
        out.push_back(std::move(bg));
    }
    return out;
}

}  // namespace signsynth
