#include <gtest/gtest.h>

#include "support.hpp"

using namespace signsynth;

namespace {

RasterImage scene(int w = 120, int h = 90, std::uint64_t seed = 3) {
    Rng rng(RngKey{seed, 0, Stage::Effect});
    return fx::random_image(rng, w, h, false);
}

}  // namespace

TEST(Composite, OpaqueVariantBoxEqualsPlacement) {
    const RasterImage bg = scene();
    const RasterImage sprite(37, 23, Rgba{255, 0, 0, 255});
    const Placement p{20, 11, 40, 30};
    const auto res = composite(bg, sprite, p, 4);
    EXPECT_EQ(res.bbox.rect, p.rect());
    EXPECT_EQ(res.bbox.class_index, 4);
    for (int y = p.y; y < p.y + p.h; ++y)
        for (int x = p.x; x < p.x + p.w; ++x) ASSERT_EQ(res.image.pixel(x, y), (Rgba{255, 0, 0, 255}));
}

TEST(Composite, TransparentBorderBoxInsidePlacement) {
    const RasterImage bg = scene();
    RasterImage sprite(32, 32);
    for (int y = 2; y < 30; ++y)
        for (int x = 2; x < 30; ++x) sprite.set_pixel(x, y, {0, 0, 255, 255});
    const Placement p{10, 10, 32, 32};
    const auto res = composite(bg, sprite, p, 0);
    // the pasted sprite alone, scanned pixel by pixel in scene coordinates
    RasterImage layer(bg.width(), bg.height());
    const RasterImage sized = resize_bilinear(sprite, p.w, p.h);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) layer.set_pixel(p.x + x, p.y + y, sized.pixel(x, y));
    EXPECT_EQ(res.bbox.rect, *fx::scan_bbox(layer));
    EXPECT_EQ(res.bbox.rect, (PixelRect{12, 12, 28, 28}));
    const PixelRect slot = p.rect();
    EXPECT_GT(res.bbox.rect.x, slot.x);
    EXPECT_LT(res.bbox.rect.right(), slot.right());
}

TEST(Composite, TransparentVariantRejected) {
    EXPECT_THROW(composite(scene(), RasterImage(20, 20), Placement{0, 0, 20, 20}, 1), NoBBoxError);
}

TEST(Composite, TransparentSpriteLeavesSceneExact) {
    const RasterImage bg = scene();
    RasterImage sprite(16, 16);
    sprite.set_pixel(8, 8, {1, 2, 3, 255});
    const Placement p{50, 40, 16, 16};
    const auto res = composite(bg, sprite, p, 2);
    for (int y = 0; y < bg.height(); ++y)
        for (int x = 0; x < bg.width(); ++x)
            if (!(x == 58 && y == 48)) {
                ASSERT_EQ(res.image.pixel(x, y), bg.pixel(x, y)) << x << "," << y;
            }
    // blending a transparent layer directly is an exact no-op
    EXPECT_EQ(alpha_over(RasterImage(30, 20), bg, {3, 3}), bg);
}

TEST(Composite, PixelsOutsidePlacementUnchanged) {
    const RasterImage bg = scene();
    const RasterImage sprite = fx::disc_sprite(40, 0);
    const Placement p{70, 5, 45, 45};
    const auto res = composite(bg, sprite, p, 3);
    for (int y = 0; y < bg.height(); ++y)
        for (int x = 0; x < bg.width(); ++x)
            if (!(x >= p.x && x < p.x + p.w && y >= p.y && y < p.y + p.h)) {
                ASSERT_EQ(res.image.pixel(x, y), bg.pixel(x, y));
            }
    EXPECT_TRUE(res.image.fully_opaque());
}

TEST(Composite, RandomSpritesMatchScanOracle) {
    Rng rng(RngKey{21, 0, Stage::Effect});
    const RasterImage bg = scene(160, 120);
    for (int trial = 0; trial < 100; ++trial) {
        const int sw = static_cast<int>(rng.uniform_int(4, 40)), sh = static_cast<int>(rng.uniform_int(4, 40));
        RasterImage sprite(sw, sh);
        const int blobs = static_cast<int>(rng.uniform_int(1, 4));
        for (int b = 0; b < blobs; ++b) {
            const int x0 = static_cast<int>(rng.uniform_int(0, sw - 1)), y0 = static_cast<int>(rng.uniform_int(0, sh - 1));
            const int x1 = static_cast<int>(rng.uniform_int(x0, sw - 1)), y1 = static_cast<int>(rng.uniform_int(y0, sh - 1));
            const auto a = static_cast<std::uint8_t>(rng.uniform_int(1, 255));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) sprite.set_pixel(x, y, {200, 200, 0, a});
        }
        const int pw = static_cast<int>(rng.uniform_int(4, 60)), ph = static_cast<int>(rng.uniform_int(4, 60));
        const Placement p{static_cast<int>(rng.uniform_int(0, 160 - pw)), static_cast<int>(rng.uniform_int(0, 120 - ph)), pw, ph};
        const RasterImage sized = resize_bilinear(sprite, pw, ph);
        RasterImage layer(160, 120);
        for (int y = 0; y < ph; ++y)
            for (int x = 0; x < pw; ++x) layer.set_pixel(p.x + x, p.y + y, sized.pixel(x, y));
        const auto expected = fx::scan_bbox(layer);
        if (!expected) {
            EXPECT_THROW(composite(bg, sprite, p, 0), NoBBoxError);
            continue;
        }
        EXPECT_EQ(composite(bg, sprite, p, 0).bbox.rect, *expected) << "trial " << trial;
    }
}

TEST(Placement, Validation) {
    EXPECT_THROW(validate_placement({0, 0, 3, 10}, 100, 100, "bg"), ConfigError);
    EXPECT_THROW(validate_placement({-1, 0, 10, 10}, 100, 100, "bg"), ConfigError);
    EXPECT_THROW(validate_placement({95, 0, 10, 10}, 100, 100, "bg"), ConfigError);
    EXPECT_NO_THROW(validate_placement({90, 90, 10, 10}, 100, 100, "bg"));
    EXPECT_THROW(composite(scene(50, 50), RasterImage(8, 8, Rgba{0, 0, 0, 255}), {45, 0, 10, 10}, 0), ConfigError);
}

TEST(Background, MustBeOpaqueWithSlots) {
    BackgroundAsset bg{"b", scene(40, 30), {}};
    EXPECT_THROW(validate_background(bg), ConfigError);
    bg.placements = {{0, 0, 10, 10}};
    EXPECT_NO_THROW(validate_background(bg));
    bg.image.set_pixel(3, 3, {0, 0, 0, 254});
    EXPECT_THROW(validate_background(bg), AssetError);
}

TEST(PlacementsCsv, GroupsByBackground) {
    const auto t = parse_placements_csv("background,x,y,w,h\nb.png,1,2,10,10\na.png,0,0,5,5\nb.png,3,4,20,20\n");
    EXPECT_EQ(t.backgrounds, (std::vector<std::string>{"b.png", "a.png"}));
    ASSERT_EQ(t.slots.at("b.png").size(), 2u);
    EXPECT_EQ(t.slots.at("b.png")[1], (Placement{3, 4, 20, 20}));
    EXPECT_THROW(parse_placements_csv("background,x,y,w,h\nb.png,1,2,ten,10\n"), ParseError);
    EXPECT_THROW(parse_placements_csv("background,x,y,w,h\nb.png,1,2,2,10\n"), ConfigError);
    EXPECT_THROW(parse_placements_csv("bg,x,y\n"), ParseError);
}

namespace {

std::vector<BackgroundEntry> backgrounds(int n, int slots = 1) {
    std::vector<BackgroundEntry> out;
    for (int i = 0; i < n; ++i) {
        BackgroundEntry b{"bg" + std::to_string(i), {}, {}};
        for (int s = 0; s < slots; ++s) b.placements.push_back({s * 10, 0, 8, 8});
        out.push_back(b);
    }
    return out;
}

std::vector<PlanRecord> variants(SignClass cls, int signs) {
    std::vector<SignEntry> entries;
    for (int i = 0; i < signs; ++i) entries.push_back({"s" + std::to_string(i), cls, {}});
    return variant_records(entries, std::vector<int>(static_cast<std::size_t>(signs), kVariantsPerSign), 1);
}

}  // namespace

TEST(ExpandBackgrounds, PublishedCounts) {
    // 88 informational signs -> 968 variants -> x20
    EXPECT_EQ(expand_backgrounds(variants(SignClass::Informational, 88), backgrounds(20), 1).size(), 19360u);
    // 19 regulatory signs -> 209 variants -> x20
    EXPECT_EQ(expand_backgrounds(variants(SignClass::Regulatory, 19), backgrounds(20), 1).size(), 4180u);
    // 220 signs -> 2,420 variants -> x20
    EXPECT_EQ(expand_backgrounds(variants(SignClass::Warning, 220), backgrounds(20), 1).size(), 48400u);
}

TEST(ExpandBackgrounds, SingleAndOrdering) {
    std::vector<SignEntry> one = {{"s", SignClass::Service, {}}};
    const auto v = variant_records(one, {1}, 5);
    const auto r = expand_backgrounds(v, backgrounds(1), 5);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].background_id, "bg0");
    const auto many = expand_backgrounds(variants(SignClass::Service, 1), backgrounds(3), 5);
    ASSERT_EQ(many.size(), 33u);
    for (std::size_t i = 0; i < many.size(); ++i) {
        EXPECT_EQ(many[i].record_id, i);
        EXPECT_EQ(many[i].background_index, i % 3);
        EXPECT_EQ(many[i].variant_index, static_cast<int>(i / 3));
    }
}

TEST(ExpandBackgrounds, PlacementPolicy) {
    const auto v = variants(SignClass::Priority, 4);
    const auto first = expand_backgrounds(v, backgrounds(2, 3), 9, PlacementPolicy::First);
    for (const auto& r : first) EXPECT_EQ(r.placement.x, 0);
    const auto random = expand_backgrounds(v, backgrounds(2, 3), 9, PlacementPolicy::Random);
    std::set<int> xs;
    for (const auto& r : random) xs.insert(r.placement.x);
    EXPECT_EQ(xs, (std::set<int>{0, 10, 20}));
    EXPECT_EQ(random, expand_backgrounds(v, backgrounds(2, 3), 9, PlacementPolicy::Random));
}

TEST(ExpandBackgrounds, ZeroPlacementsRejected) {
    auto bgs = backgrounds(2);
    bgs[1].placements.clear();
    EXPECT_THROW(expand_backgrounds(variants(SignClass::Service, 1), bgs, 1), ConfigError);
}
