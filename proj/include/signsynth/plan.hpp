#pragma once

// Record plan. Records are enumerated in canonical order
//
//     sign -> variant -> background -> condition -> occlusion slot
//
// and every parameter of record r is a pure function of (seed, position).
// The plan is indexed arithmetically, so record(r) needs no materialized
// list; the expand_* functions build the same records as explicit lists.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "signsynth/augment.hpp"
#include "signsynth/compose.hpp"
#include "signsynth/config.hpp"
#include "signsynth/csv.hpp"
#include "signsynth/environment.hpp"
#include "signsynth/error.hpp"
#include "signsynth/occlusion.hpp"
#include "signsynth/rng.hpp"

namespace signsynth {

// ---------------------------------------------------------------------------
// Asset catalog (indices only; pixels are loaded by the executor)

struct SignEntry {
    std::string id;
    SignClass cls = SignClass::Informational;
    std::filesystem::path file;
};

struct BackgroundEntry {
    std::string id;
    std::vector<Placement> placements;
    std::filesystem::path file;
};

struct ObstacleEntry {
    std::string id;
    ObstacleCategory category = ObstacleCategory::Car;
    std::filesystem::path file;
};

struct Catalog {
    std::vector<SignEntry> signs;
    std::vector<BackgroundEntry> backgrounds;
    std::vector<ObstacleEntry> obstacles;
};

inline std::vector<SignEntry> parse_signs_csv(std::string_view text, const std::filesystem::path& dir,
                                              const std::string& source = "signs.csv") {
    std::vector<SignEntry> out;
    std::set<std::string> seen;
    for (const auto& row : parse_csv_with_header(text, {"file", "class"}, source)) {
        const std::string at = source + ":" + std::to_string(row.line) + ": ";
        if (row.fields[0].empty()) throw ParseError(at + "empty file name");
        const auto cls = parse_sign_class(row.fields[1]);
        if (!cls)
            throw ParseError(at + "unknown class '" + row.fields[1] +
                             "'; valid names: informational, priority, prohibitory, regulatory, service, warning");
        if (!seen.insert(row.fields[0]).second) throw ConfigError(at + "duplicate sign '" + row.fields[0] + "'");
        out.push_back({row.fields[0], *cls, dir / row.fields[0]});
    }
    return out;
}

inline std::string read_text(const std::filesystem::path& path) {
    const Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

/// Read the sign, placement and obstacle indices named by the config. With
/// `check_files` every referenced image file must exist.
inline Catalog load_catalog(const PipelineConfig& cfg, bool check_files = true) {
    namespace fs = std::filesystem;
    Catalog cat;
    auto require_file = [&](const fs::path& p, const std::string& what) {
        if (check_files && !fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
    };

    if (cfg.signs_dir.empty()) throw ConfigError("config: signs.dir is required");
    if (!fs::is_directory(cfg.signs_dir)) throw ConfigError("signs.dir not found: " + cfg.signs_dir.string());
    const auto signs_csv = cfg.signs_csv_path();
    if (!fs::is_regular_file(signs_csv)) throw ConfigError("sign index not found: " + signs_csv.string());
    cat.signs = parse_signs_csv(read_text(signs_csv), cfg.signs_dir, signs_csv.string());
    if (cat.signs.empty()) throw ConfigError("no signs listed in " + signs_csv.string());
    for (const auto& s : cat.signs) require_file(s.file, "sign image");

    if (cfg.backgrounds_dir.empty()) throw ConfigError("config: backgrounds.dir is required");
    if (!fs::is_directory(cfg.backgrounds_dir))
        throw ConfigError("backgrounds.dir not found: " + cfg.backgrounds_dir.string());
    const auto placements_csv = cfg.placements_csv_path();
    if (!fs::is_regular_file(placements_csv)) throw ConfigError("placements file not found: " + placements_csv.string());
    const PlacementTable table = parse_placements_csv(read_text(placements_csv), placements_csv.string());
    if (table.backgrounds.empty()) throw ConfigError("no placements listed in " + placements_csv.string());
    for (const auto& id : table.backgrounds) {
        cat.backgrounds.push_back({id, table.slots.at(id), cfg.backgrounds_dir / id});
        require_file(cat.backgrounds.back().file, "background image");
    }

    if (cfg.stages.occlusion) {
        if (cfg.obstacles_dir.empty()) throw ConfigError("config: obstacles.dir is required when occlusion is enabled");
        if (!fs::is_directory(cfg.obstacles_dir))
            throw ConfigError("obstacles.dir not found: " + cfg.obstacles_dir.string());
        const auto csv = cfg.obstacles_dir / "cutouts.csv";
        if (!fs::is_regular_file(csv)) throw ConfigError("obstacle manifest not found: " + csv.string());
        std::set<std::string> seen;
        for (const auto& r : parse_cutouts_csv(read_text(csv), csv.string())) {
            if (!seen.insert(r.file).second) throw ConfigError(csv.string() + ": duplicate cutout '" + r.file + "'");
            cat.obstacles.push_back({r.file, r.category, cfg.obstacles_dir / r.file});
            require_file(cat.obstacles.back().file, "obstacle cutout");
        }
        if (cat.obstacles.empty()) throw ConfigError("obstacle pool is empty: " + csv.string());
    }
    return cat;
}

// ---------------------------------------------------------------------------
// Records

/// Obstacle chosen for an occluded record. Its geometry depends on the
/// rendered sign box and is drawn at render time from `key`, after the
/// obstacle-choice draw.
struct OcclusionChoice {
    std::size_t obstacle_index = 0;
    std::string obstacle_id;
    RngKey key;

    friend bool operator==(const OcclusionChoice&, const OcclusionChoice&) = default;
};

struct PlanRecord {
    std::uint64_t record_id = 0;
    std::size_t sign_index = 0;
    std::string sign_id;
    SignClass cls = SignClass::Informational;
    int variant_index = 0;
    std::uint64_t variant_ordinal = 0;
    VariantParams variant;
    std::size_t background_index = 0;
    std::string background_id;
    Placement placement;
    std::optional<EnvCondition> env;
    int occlusion_slot = 0;
    std::optional<OcclusionChoice> occlusion;
    RngKey key;

    friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

inline VariantParams variant_params_for(std::uint64_t seed, std::uint64_t ordinal, int variant_index,
                                        const AugmentRanges& ranges) {
    Rng rng(RngKey{seed, ordinal, Stage::Variant});
    VariantParams p = sample_variant_params(variant_index, rng, ranges);
    check_variant_params(p, ranges);
    return p;
}

inline std::size_t placement_index_for(std::uint64_t seed, std::uint64_t composite, std::size_t slots,
                                       PlacementPolicy policy) {
    if (slots == 0) throw ConfigError("background has no placements");
    if (policy == PlacementPolicy::First || slots == 1) return 0;
    Rng rng(RngKey{seed, composite, Stage::Placement});
    return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(slots) - 1));
}

inline EnvCondition condition_for(std::uint64_t seed, std::uint64_t env_index, int condition,
                                  const EnvSettings& settings) {
    Rng rng(RngKey{seed, env_index, Stage::Environment});
    return sample_condition(static_cast<EnvKind>(condition), rng, settings);
}

inline OcclusionChoice occlusion_choice_for(std::uint64_t seed, std::uint64_t record_id,
                                            const std::vector<ObstacleEntry>& pool) {
    if (pool.empty()) throw ConfigError("obstacle pool is empty");
    const RngKey key{seed, record_id, Stage::Occlusion};
    Rng rng(key);
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
    return {i, pool[i].id, key};
}

/// Stream for the occlusion geometry of a record: the choice stream with the
/// obstacle draw consumed.
inline Rng occlusion_geometry_rng(const OcclusionChoice& choice, std::size_t pool_size) {
    Rng rng(choice.key);
    rng.uniform_int(0, static_cast<std::int64_t>(pool_size) - 1);
    return rng;
}

/// Variant-level records (one per sign variant), `counts[s]` variants for
/// sign s. Only the sign and variant fields are set.
inline std::vector<PlanRecord> variant_records(const std::vector<SignEntry>& signs, const std::vector<int>& counts,
                                               std::uint64_t seed, const AugmentRanges& ranges = {}) {
    if (counts.size() != signs.size()) throw ArgumentError("variant counts do not match the sign list");
    std::vector<PlanRecord> out;
    std::uint64_t g = 0;
    for (std::size_t s = 0; s < signs.size(); ++s)
        for (int v = 0; v < counts[s]; ++v, ++g) {
            PlanRecord r;
            r.record_id = g;
            r.sign_index = s;
            r.sign_id = signs[s].id;
            r.cls = signs[s].cls;
            r.variant_index = v;
            r.variant_ordinal = g;
            r.variant = variant_params_for(seed, g, v, ranges);
            r.key = RngKey{seed, g, Stage::Occlusion};
            out.push_back(std::move(r));
        }
    return out;
}

/// Pair every variant with every background (one placement each).
inline std::vector<PlanRecord> expand_backgrounds(const std::vector<PlanRecord>& variants,
                                                  const std::vector<BackgroundEntry>& backgrounds, std::uint64_t seed,
                                                  PlacementPolicy policy = PlacementPolicy::First) {
    for (const auto& bg : backgrounds)
        if (bg.placements.empty()) throw ConfigError("background '" + bg.id + "' has no placements");
    std::vector<PlanRecord> out;
    out.reserve(variants.size() * backgrounds.size());
    for (const auto& v : variants)
        for (std::size_t b = 0; b < backgrounds.size(); ++b) {
            PlanRecord r = v;
            r.record_id = out.size();
            r.background_index = b;
            r.background_id = backgrounds[b].id;
            r.placement = backgrounds[b].placements[placement_index_for(seed, r.record_id,
                                                                        backgrounds[b].placements.size(), policy)];
            r.key = RngKey{seed, r.record_id, Stage::Occlusion};
            out.push_back(std::move(r));
        }
    return out;
}

/// Seven records per input, one per condition; the input itself is not kept.
inline std::vector<PlanRecord> expand_env(const std::vector<PlanRecord>& records, std::uint64_t seed,
                                          const EnvSettings& settings = {}) {
    std::vector<PlanRecord> out;
    out.reserve(records.size() * kNumEnvKinds);
    for (const auto& in : records)
        for (int k = 0; k < kNumEnvKinds; ++k) {
            PlanRecord r = in;
            r.record_id = out.size();
            r.env = condition_for(seed, r.record_id, k, settings);
            r.key = RngKey{seed, r.record_id, Stage::Occlusion};
            out.push_back(std::move(r));
        }
    return out;
}

/// The unoccluded record followed by `copies` occluded ones.
inline std::vector<PlanRecord> expand_occlusion(const std::vector<PlanRecord>& records,
                                                const std::vector<ObstacleEntry>& obstacles, std::uint64_t seed,
                                                int copies = 2) {
    if (obstacles.empty()) throw ConfigError("obstacle pool is empty");
    std::vector<PlanRecord> out;
    out.reserve(records.size() * static_cast<std::size_t>(copies + 1));
    for (const auto& in : records)
        for (int slot = 0; slot <= copies; ++slot) {
            PlanRecord r = in;
            r.record_id = out.size();
            r.occlusion_slot = slot;
            r.key = RngKey{seed, r.record_id, Stage::Occlusion};
            if (slot > 0) r.occlusion = occlusion_choice_for(seed, r.record_id, obstacles);
            out.push_back(std::move(r));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Balance mode

/// Variants per sign for each class so that every class lands near `target`
/// final records: k_c = round(target / (n_c * per_variant)), at least 11.
/// `per_variant` is the number of final records one variant expands to.
/// Classes with no signs get 0.
inline std::vector<int> balance_factors(const std::vector<long long>& initial_counts, long long target,
                                        long long per_variant) {
    if (per_variant < 1) throw ArgumentError("per-variant factor must be >= 1");
    long long n_max = 0;
    for (long long n : initial_counts) {
        if (n < 0) throw ArgumentError("class counts must be >= 0");
        n_max = std::max(n_max, n);
    }
    if (n_max == 0) throw ConfigError("balance mode needs at least one sign");
    const long long minimum = n_max * kVariantsPerSign * per_variant;
    if (target < minimum)
        throw ConfigError("balance target " + std::to_string(target) + " is infeasible: the largest class (" +
                          std::to_string(n_max) + " signs) already yields " + std::to_string(minimum) +
                          " records at 11 variants per sign; minimum feasible target is " + std::to_string(minimum));
    std::vector<int> k(initial_counts.size(), 0);
    long long lo = 0, hi = 0;
    for (std::size_t c = 0; c < initial_counts.size(); ++c) {
        const long long n = initial_counts[c];
        if (n == 0) continue;
        const double raw = static_cast<double>(target) / (static_cast<double>(n) * static_cast<double>(per_variant));
        k[c] = std::max(kVariantsPerSign, static_cast<int>(std::llround(raw)));
        const long long total = n * k[c] * per_variant;
        if (std::abs(static_cast<double>(total - target)) > 0.05 * static_cast<double>(target))
            throw ConfigError("balance target " + std::to_string(target) + " cannot be met within 5% for class " +
                              std::string(class_name(static_cast<SignClass>(c))) + " (" + std::to_string(total) + ")");
        lo = lo == 0 ? total : std::min(lo, total);
        hi = std::max(hi, total);
    }
    if (static_cast<double>(hi) > 1.05 * static_cast<double>(lo))
        throw ConfigError("balance target " + std::to_string(target) +
                          " leaves a max/min class ratio above 1.05; choose a larger target");
    return k;
}

// ---------------------------------------------------------------------------
// Plan

class Plan {
public:
    Plan(PipelineConfig config, Catalog catalog) : config_(std::move(config)), catalog_(std::move(catalog)) {
        if (catalog_.signs.empty()) throw ConfigError("no signs in catalog");
        if (catalog_.backgrounds.empty()) throw ConfigError("no backgrounds in catalog");
        for (const auto& bg : catalog_.backgrounds) {
            if (bg.placements.empty()) throw ConfigError("background '" + bg.id + "' has no placements");
            for (const auto& p : bg.placements) validate_placement(p, 0, 0, bg.id);
        }
        if (config_.stages.occlusion && catalog_.obstacles.empty())
            throw ConfigError("occlusion is enabled but the obstacle pool is empty");
        env_factor_ = config_.stages.environment ? kNumEnvKinds : 1;
        occ_factor_ = config_.stages.occlusion ? config_.occluded_copies + 1 : 1;

        std::array<long long, kNumClasses> per_class{};
        for (const auto& s : catalog_.signs) ++per_class[static_cast<int>(s.cls)];
        std::array<int, kNumClasses> k{};
        k.fill(config_.stages.augment ? kVariantsPerSign : 1);
        if (config_.balance.enabled) {
            if (!config_.stages.augment) throw ConfigError("balance mode requires the augment stage");
            const auto f = balance_factors(std::vector<long long>(per_class.begin(), per_class.end()),
                                           config_.balance.target, per_variant_factor());
            std::copy(f.begin(), f.end(), k.begin());
        }
        offsets_.push_back(0);
        for (const auto& s : catalog_.signs) {
            counts_.push_back(k[static_cast<int>(s.cls)]);
            offsets_.push_back(offsets_.back() + static_cast<std::uint64_t>(counts_.back()));
        }
    }

    const PipelineConfig& config() const { return config_; }
    const Catalog& catalog() const { return catalog_; }

    int variants_for_sign(std::size_t s) const { return counts_.at(s); }
    const std::vector<int>& variant_counts() const { return counts_; }
    std::uint64_t variant_total() const { return offsets_.back(); }
    std::uint64_t background_factor() const { return catalog_.backgrounds.size(); }
    int env_factor() const { return env_factor_; }
    int occlusion_factor() const { return occ_factor_; }
    /// Final records per variant.
    long long per_variant_factor() const {
        return static_cast<long long>(background_factor()) * env_factor_ * occ_factor_;
    }
    std::uint64_t records_per_composite() const { return static_cast<std::uint64_t>(env_factor_) * occ_factor_; }
    std::uint64_t composite_total() const { return variant_total() * background_factor(); }
    std::uint64_t size() const { return composite_total() * records_per_composite(); }

    struct Position {
        std::size_t sign = 0;
        int variant = 0;
        std::uint64_t variant_ordinal = 0;
        std::size_t background = 0;
        std::uint64_t composite = 0;
        int condition = 0;
        std::uint64_t env_index = 0;
        int slot = 0;
    };

    Position locate(std::uint64_t id) const {
        if (id >= size()) throw ArgumentError("record id " + std::to_string(id) + " out of range");
        Position p;
        const std::uint64_t O = static_cast<std::uint64_t>(occ_factor_), E = static_cast<std::uint64_t>(env_factor_);
        p.slot = static_cast<int>(id % O);
        p.env_index = id / O;
        p.condition = static_cast<int>(p.env_index % E);
        p.composite = p.env_index / E;
        p.background = static_cast<std::size_t>(p.composite % background_factor());
        p.variant_ordinal = p.composite / background_factor();
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), p.variant_ordinal);
        p.sign = static_cast<std::size_t>(it - offsets_.begin()) - 1;
        p.variant = static_cast<int>(p.variant_ordinal - offsets_[p.sign]);
        return p;
    }

    VariantParams variant_params(std::uint64_t ordinal, int variant_index) const {
        return variant_params_for(config_.seed, ordinal, variant_index, config_.augment);
    }

    /// Sign index and variant index of a variant ordinal.
    std::pair<std::size_t, int> variant_position(std::uint64_t ordinal) const {
        if (ordinal >= variant_total()) throw ArgumentError("variant ordinal out of range");
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), ordinal);
        const auto s = static_cast<std::size_t>(it - offsets_.begin()) - 1;
        return {s, static_cast<int>(ordinal - offsets_[s])};
    }

    PlanRecord record(std::uint64_t id) const {
        const Position p = locate(id);
        const auto& sign = catalog_.signs[p.sign];
        const auto& bg = catalog_.backgrounds[p.background];
        PlanRecord r;
        r.record_id = id;
        r.sign_index = p.sign;
        r.sign_id = sign.id;
        r.cls = sign.cls;
        r.variant_index = p.variant;
        r.variant_ordinal = p.variant_ordinal;
        r.variant = variant_params(p.variant_ordinal, p.variant);
        r.background_index = p.background;
        r.background_id = bg.id;
        r.placement = bg.placements[placement_index_for(config_.seed, p.composite, bg.placements.size(),
                                                        config_.placement_policy)];
        if (config_.stages.environment) r.env = condition_for(config_.seed, p.env_index, p.condition, config_.env);
        r.occlusion_slot = p.slot;
        if (config_.stages.occlusion && p.slot > 0) r.occlusion = occlusion_choice_for(config_.seed, id, catalog_.obstacles);
        r.key = RngKey{config_.seed, id, Stage::Occlusion};
        return r;
    }

private:
    PipelineConfig config_;
    Catalog catalog_;
    std::vector<int> counts_;
    std::vector<std::uint64_t> offsets_;
    int env_factor_ = 1;
    int occ_factor_ = 1;
};

inline Plan build_plan(const PipelineConfig& config, const Catalog& catalog) { return Plan(config, catalog); }

/// Every record of the plan as an explicit list via the stage expansions.
/// Intended for small plans; agrees record-for-record with Plan::record.
inline std::vector<PlanRecord> materialize_by_stages(const Plan& plan) {
    const auto& cfg = plan.config();
    auto records = variant_records(plan.catalog().signs, plan.variant_counts(), cfg.seed, cfg.augment);
    records = expand_backgrounds(records, plan.catalog().backgrounds, cfg.seed, cfg.placement_policy);
    if (cfg.stages.environment) records = expand_env(records, cfg.seed, cfg.env);
    if (cfg.stages.occlusion) records = expand_occlusion(records, plan.catalog().obstacles, cfg.seed, cfg.occluded_copies);
    return records;
}

// ---------------------------------------------------------------------------
// Count tables

enum class CountStage : int { Initial = 0, Geometric, Background, Environment, Occlusion };
inline constexpr int kNumCountStages = 5;

struct CountTable {
    std::array<std::array<long long, kNumCountStages>, kNumClasses> rows{};
    std::array<long long, kNumCountStages> totals{};
    std::array<bool, kNumCountStages> enabled{true, true, true, true, true};
};

inline CountTable plan_counts(const Plan& plan) {
    CountTable t;
    const auto& cfg = plan.config();
    t.enabled = {true, cfg.stages.augment, true, cfg.stages.environment, cfg.stages.occlusion};
    const long long B = static_cast<long long>(plan.background_factor());
    const long long E = plan.env_factor(), O = plan.occlusion_factor();
    for (std::size_t s = 0; s < plan.catalog().signs.size(); ++s) {
        auto& row = t.rows[static_cast<int>(plan.catalog().signs[s].cls)];
        const long long k = plan.variants_for_sign(s);
        row[0] += 1;
        row[1] += k;
        row[2] += k * B;
        row[3] += k * B * E;
        row[4] += k * B * E * O;
    }
    for (const auto& row : t.rows)
        for (int i = 0; i < kNumCountStages; ++i) t.totals[i] += row[i];
    return t;
}

/// Count table for bare per-class sign counts under the uniform laws.
inline CountTable count_table_for(const std::array<long long, kNumClasses>& initial, long long backgrounds,
                                  int env_factor = kNumEnvKinds, int occlusion_factor = 3) {
    CountTable t;
    for (int c = 0; c < kNumClasses; ++c) {
        const long long n = initial[c];
        t.rows[c] = {n, n * kVariantsPerSign, n * kVariantsPerSign * backgrounds,
                     n * kVariantsPerSign * backgrounds * env_factor,
                     n * kVariantsPerSign * backgrounds * env_factor * occlusion_factor};
        for (int i = 0; i < kNumCountStages; ++i) t.totals[i] += t.rows[c][i];
    }
    return t;
}

/// The augmentation results table as published (class rows in index order),
/// including two cells that break the stage laws.
struct PublishedTable {
    std::array<std::array<long long, kNumCountStages>, kNumClasses> rows;
    /// Totals stated in the accompanying text.
    std::array<long long, kNumCountStages> stated_totals;
};

inline const PublishedTable& published_table() {
    static const PublishedTable t{{{{88, 968, 19360, 135520, 406560},
                                    {9, 99, 1980, 13860, 41580},
                                    {36, 99, 7920, 55440, 166320},
                                    {19, 209, 4180, 28980, 86940},
                                    {20, 220, 4400, 30800, 92400},
                                    {48, 528, 10560, 73920, 221760}}},
                                  {220, 2420, 48400, 338520, 1015560}};
    return t;
}

struct CellDelta {
    int row = 0;  // class index, or -1 for the totals row
    int stage = 0;
    long long computed = 0;
    long long published = 0;
    long long delta() const { return computed - published; }
};

/// Cells and totals that differ from the published table.
inline std::vector<CellDelta> published_deltas(const CountTable& t) {
    const auto& p = published_table();
    std::vector<CellDelta> out;
    for (int c = 0; c < kNumClasses; ++c)
        for (int s = 0; s < kNumCountStages; ++s)
            if (t.rows[c][s] != p.rows[c][s]) out.push_back({c, s, t.rows[c][s], p.rows[c][s]});
    for (int s = 0; s < kNumCountStages; ++s)
        if (t.totals[s] != p.stated_totals[s]) out.push_back({-1, s, t.totals[s], p.stated_totals[s]});
    return out;
}

inline std::string group_thousands(long long v) {
    std::string digits = std::to_string(v < 0 ? -v : v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return v < 0 ? "-" + out : out;
}

inline constexpr std::array<std::string_view, kNumCountStages> kCountStageNames = {
    "initial", "geometric", "background", "environment", "occlusion"};

inline std::string display_class_name(int c) {
    std::string s(class_name(static_cast<SignClass>(c)));
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

/// Fixed-width table of the enabled stages plus the per-class law line.
inline std::string format_count_table(const CountTable& t, const Plan* plan = nullptr) {
    std::ostringstream os;
    auto cell = [&](const std::string& s, std::size_t w) {
        os << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
    };
    os << "class        ";
    for (int s = 0; s < kNumCountStages; ++s)
        if (t.enabled[s]) cell(std::string(kCountStageNames[s]), 13);
    os << "\n";
    auto row = [&](const std::string& name, const std::array<long long, kNumCountStages>& r) {
        os << name << std::string(name.size() < 13 ? 13 - name.size() : 0, ' ');
        for (int s = 0; s < kNumCountStages; ++s)
            if (t.enabled[s]) cell(group_thousands(r[s]), 13);
        os << "\n";
    };
    for (int c = 0; c < kNumClasses; ++c) row(display_class_name(c), t.rows[c]);
    row("Total", t.totals);
    if (plan && !plan->config().balance.enabled) {
        const long long v = plan->config().stages.augment ? kVariantsPerSign : 1;
        const long long f[kNumCountStages] = {1, v, v * static_cast<long long>(plan->background_factor()),
                                              v * static_cast<long long>(plan->background_factor()) * plan->env_factor(),
                                              v * plan->per_variant_factor()};
        os << "law:";
        bool first = true;
        for (int s = 0; s < kNumCountStages; ++s) {
            if (!t.enabled[s]) continue;
            os << (first ? " " : " -> ") << (f[s] == 1 ? "" : group_thousands(f[s])) << "n";
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

/// Delta report against the published table. Every total delta is traced to
/// the cells of its column.
inline std::string format_published_check(const CountTable& t) {
    const auto& p = published_table();
    std::ostringstream os;
    const auto deltas = published_deltas(t);
    int cell_mismatches = 0;
    for (const auto& d : deltas) {
        if (d.row < 0) continue;
        ++cell_mismatches;
        os << "cell " << display_class_name(d.row) << "/" << kCountStageNames[d.stage] << ": computed "
           << group_thousands(d.computed) << ", published " << group_thousands(d.published) << ", delta "
           << group_thousands(d.delta());
        if (d.stage > 0) {
            const long long prev = p.rows[d.row][d.stage - 1];
            const long long law = t.rows[d.row][d.stage] / std::max(1LL, t.rows[d.row][d.stage - 1]);
            if (prev * law != d.published)
                os << " (published cell breaks the x" << law << " law: " << group_thousands(prev) << " x " << law
                   << " = " << group_thousands(prev * law) << ")";
            else
                os << " (carried over from the published " << kCountStageNames[d.stage - 1] << " cell: "
                   << group_thousands(prev) << " x " << law << " = " << group_thousands(d.published) << ")";
        }
        if (d.stage + 1 < kNumCountStages) {
            const long long next = p.rows[d.row][d.stage + 1];
            const long long law = t.rows[d.row][d.stage + 1] / std::max(1LL, t.rows[d.row][d.stage]);
            if (d.published * law != next)
                os << " (inconsistent with the next published cell " << group_thousands(next) << ")";
        }
        os << "\n";
    }
    for (int s = 0; s < kNumCountStages; ++s) {
        long long column = 0, traced = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            column += p.rows[c][s];
            traced += t.rows[c][s] - p.rows[c][s];
        }
        const long long d = t.totals[s] - p.stated_totals[s];
        os << "total " << kCountStageNames[s] << ": computed " << group_thousands(t.totals[s]) << ", stated "
           << group_thousands(p.stated_totals[s]) << ", delta " << group_thousands(d);
        if (column != p.stated_totals[s]) os << "; published column sums to " << group_thousands(column);
        if (d != 0) os << (d == traced ? "; equals the sum of cell deltas" : "; NOT explained by cell deltas");
        os << "\n";
    }
    os << cell_mismatches << " cell(s) differ from the published table\n";
    return os.str();
}

}  // namespace signsynth
