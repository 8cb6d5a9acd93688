#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace signsynth;
namespace fs = std::filesystem;

namespace {

// Signs per class from the published results table, in class index order.
constexpr std::array<long long, kNumClasses> kTableSigns = {88, 9, 36, 19, 20, 48};

std::array<long long, kNumCountStages> law_row(long long n, long long B = 20, long long E = 7, long long O = 3) {
    return {n, n * 11, n * 11 * B, n * 11 * B * E, n * 11 * B * E * O};
}

Catalog small_catalog(int signs, int backgrounds, int slots, int obstacles) {
    Catalog cat;
    for (int i = 0; i < signs; ++i)
        cat.signs.push_back({"s" + std::to_string(i), static_cast<SignClass>(i % kNumClasses), {}});
    for (int i = 0; i < backgrounds; ++i) {
        BackgroundEntry b{"b" + std::to_string(i), {}, {}};
        for (int s = 0; s < slots; ++s) b.placements.push_back({s * 20, s * 5, 16, 16});
        cat.backgrounds.push_back(b);
    }
    for (int i = 0; i < obstacles; ++i) cat.obstacles.push_back({"o" + std::to_string(i), ObstacleCategory::Car, {}});
    return cat;
}

struct Generated {
    PipelineConfig cfg;
    RunResult result;
};

Generated generate(const fs::path& corpus, const fs::path& out, int jobs, std::optional<std::uint64_t> limit) {
    Generated g;
    g.cfg = load_config(corpus / "config.json");
    const Plan plan = build_plan(g.cfg, load_catalog(g.cfg));
    const LoadedAssets assets = load_assets(plan.catalog());
    prepare_output_dir(out, true);
    RunOptions opt;
    opt.jobs = jobs;
    opt.limit = limit;
    g.result = execute(plan, assets, out, opt);
    return g;
}

std::vector<nlohmann::json> manifest_lines(const fs::path& dir) {
    std::ifstream in(dir / "manifest.jsonl");
    std::vector<nlohmann::json> out;
    for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
    return out;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = fx::slurp(e.path());
    return files;
}

}  // namespace

TEST(Config, DefaultsAndPaths) {
    const PipelineConfig c = parse_config(R"({"signs": {"dir": "s"}, "backgrounds": {"dir": "../b"}})", "/data/run");
    EXPECT_EQ(c.signs_dir, fs::path("/data/run/s"));
    EXPECT_EQ(c.backgrounds_dir, fs::path("/data/b"));
    EXPECT_EQ(c.signs_csv, "signs.csv");
    EXPECT_EQ(c.placements_csv, "placements.csv");
    EXPECT_EQ(c.placement_policy, PlacementPolicy::First);
    EXPECT_TRUE(c.stages.augment && c.stages.environment && c.stages.occlusion);
    EXPECT_EQ(c.occluded_copies, 2);
    EXPECT_DOUBLE_EQ(c.occlusion.coverage_min, 0.1);
    EXPECT_DOUBLE_EQ(c.occlusion.coverage_max, 0.5);
    EXPECT_FALSE(c.balance.enabled);
    EXPECT_EQ(c.label_format, "yolo");
    EXPECT_EQ(c.image_format, "png");
    EXPECT_EQ(c.seed, 0u);
    EXPECT_EQ(c.jobs, 1);
    EXPECT_FALSE(c.limit);
}

TEST(Config, UnknownKeysAndTypeErrors) {
    auto message = [](const char* text) {
        try {
            parse_config(text, ".", "cfg.json");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string unknown = message(R"({"augment": {"rotate": [0, 1]}})");
    EXPECT_NE(unknown.find("cfg.json: augment.rotate: unknown key"), std::string::npos) << unknown;
    EXPECT_NE(unknown.find("rotate_deg"), std::string::npos);
    EXPECT_NE(message(R"({"seed": "seven"})").find("seed: expected"), std::string::npos);
    EXPECT_NE(message(R"({"stages": {"occlusion": 1}})").find("stages.occlusion"), std::string::npos);
    EXPECT_NE(message(R"({"augment": {"scale": [1.2, 0.9]}})").find("min exceeds max"), std::string::npos);
    EXPECT_NE(message(R"({"seed": 1,})").find("malformed JSON at byte"), std::string::npos);
    EXPECT_FALSE(message(R"({"limit": -1})").empty());
}

TEST(Config, HashIgnoresRunSettings) {
    PipelineConfig a = parse_config(R"({"seed": 3})", ".");
    PipelineConfig b = a;
    b.jobs = 8;
    b.output_dir = "elsewhere";
    b.limit = 10;
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.seed = 4;
    EXPECT_NE(config_hash(a), config_hash(b));
    b = a;
    b.occlusion.coverage_max = 0.4;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(CountTable, PublishedRowsFollowTheLaws) {
    const CountTable t = count_table_for(kTableSigns, 20);
    EXPECT_EQ(t.rows[static_cast<int>(SignClass::Priority)], (std::array<long long, 5>{9, 99, 1980, 13860, 41580}));
    EXPECT_EQ(t.rows[static_cast<int>(SignClass::Warning)], (std::array<long long, 5>{48, 528, 10560, 73920, 221760}));
    EXPECT_EQ(t.rows[static_cast<int>(SignClass::Service)], (std::array<long long, 5>{20, 220, 4400, 30800, 92400}));
    for (int c = 0; c < kNumClasses; ++c) EXPECT_EQ(t.rows[c], law_row(kTableSigns[c])) << c;
    EXPECT_EQ(t.totals, (std::array<long long, 5>{220, 2420, 48400, 338800, 1016400}));
}

TEST(CountTable, DeltasAgainstPublishedTable) {
    const auto& pub = published_table();
    // cells as printed
    EXPECT_EQ(pub.rows[0], (std::array<long long, 5>{88, 968, 19360, 135520, 406560}));
    EXPECT_EQ(pub.rows[2][1], 99);
    EXPECT_EQ(pub.rows[3][3], 28980);
    EXPECT_EQ(pub.stated_totals[4], 1015560);

    const auto deltas = published_deltas(count_table_for(kTableSigns, 20));
    std::set<std::tuple<int, int, long long, long long>> got;
    for (const auto& d : deltas) got.insert({d.row, d.stage, d.computed, d.published});
    const std::set<std::tuple<int, int, long long, long long>> expected = {
        {2, 1, 396, 99},           // prohibitory geometric
        {3, 3, 29260, 28980},      // regulatory environment
        {3, 4, 87780, 86940},      // regulatory occlusion
        {-1, 3, 338800, 338520},   // totals
        {-1, 4, 1016400, 1015560},
    };
    EXPECT_EQ(got, expected);
    const std::string report = format_published_check(count_table_for(kTableSigns, 20));
    EXPECT_NE(report.find("396"), std::string::npos);
    EXPECT_NE(report.find("29,260"), std::string::npos);
}

TEST(CountTable, EmptyAndSingle) {
    const CountTable zero = count_table_for({}, 20);
    for (const auto& row : zero.rows) EXPECT_EQ(row, (std::array<long long, 5>{}));
    EXPECT_EQ(zero.totals, (std::array<long long, 5>{}));
    EXPECT_THROW(build_plan(PipelineConfig{}, small_catalog(0, 1, 1, 1)), ConfigError);

    PipelineConfig cfg;
    cfg.stages.environment = false;
    cfg.stages.occlusion = false;
    const Plan plan = build_plan(cfg, small_catalog(1, 1, 1, 0));
    EXPECT_EQ(plan.size(), 11u);
    const CountTable t = plan_counts(plan);
    EXPECT_EQ(t.totals, (std::array<long long, 5>{1, 11, 11, 11, 11}));
    EXPECT_FALSE(t.enabled[3]);
}

TEST(CountTable, PlanCountsMatchLaws) {
    PipelineConfig cfg;
    const Plan plan = build_plan(cfg, small_catalog(8, 4, 2, 3));
    const CountTable t = plan_counts(plan);
    long long final_total = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        EXPECT_EQ(t.rows[c], law_row(t.rows[c][0], 4));
        final_total += t.rows[c][4];
    }
    EXPECT_EQ(static_cast<std::uint64_t>(final_total), plan.size());
    EXPECT_EQ(plan.size(), 8u * 11 * 4 * 7 * 3);
}

TEST(Plan, RecordsMatchStageExpansion) {
    for (PlacementPolicy policy : {PlacementPolicy::First, PlacementPolicy::Random}) {
        PipelineConfig cfg;
        cfg.seed = 77;
        cfg.placement_policy = policy;
        const Plan plan = build_plan(cfg, small_catalog(2, 3, 2, 2));
        const auto staged = materialize_by_stages(plan);
        ASSERT_EQ(staged.size(), plan.size());
        ASSERT_EQ(staged.size(), 2u * 11 * 3 * 7 * 3);
        for (std::uint64_t id = 0; id < plan.size(); ++id) {
            ASSERT_EQ(staged[id].record_id, id);
            ASSERT_EQ(plan.record(id), staged[id]) << "record " << id;
        }
    }
}

TEST(Plan, StageTogglesAndSeeds) {
    PipelineConfig cfg;
    cfg.stages.augment = false;
    cfg.stages.occlusion = false;
    const Plan plan = build_plan(cfg, small_catalog(3, 2, 1, 0));
    EXPECT_EQ(plan.size(), 3u * 1 * 2 * 7);
    EXPECT_EQ(materialize_by_stages(plan).size(), plan.size());
    for (std::uint64_t id = 0; id < plan.size(); ++id) {
        const PlanRecord r = plan.record(id);
        EXPECT_EQ(r.variant.kind, VariantKind::Original);
        EXPECT_FALSE(r.occlusion);
        EXPECT_TRUE(r.env);
    }
    PipelineConfig other;
    other.seed = 1;
    const Plan a = build_plan(PipelineConfig{}, small_catalog(2, 2, 1, 1));
    const Plan b = build_plan(other, small_catalog(2, 2, 1, 1));
    int differing = 0;
    for (std::uint64_t id = 0; id < a.size(); ++id) {
        EXPECT_EQ(a.record(id).sign_id, b.record(id).sign_id);
        differing += a.record(id).variant != b.record(id).variant;
    }
    EXPECT_GT(differing, 0);
    EXPECT_THROW(a.record(a.size()), ArgumentError);
    PipelineConfig occ;
    EXPECT_THROW(build_plan(occ, small_catalog(2, 2, 1, 0)), ConfigError);
}

TEST(Balance, FactorsForTwoClasses) {
    const auto k = balance_factors({88, 9}, 406560, 420);
    EXPECT_EQ(k, (std::vector<int>{11, 108}));
    EXPECT_EQ(9LL * 108 * 420, 408240);
    EXPECT_EQ(88LL * 11 * 420, 406560);
    const auto same = balance_factors({30, 30, 30}, 30 * 40 * 420, 420);
    EXPECT_EQ(same, (std::vector<int>{40, 40, 40}));
}

TEST(Balance, FactorsForPublishedCorpus) {
    const std::vector<long long> n(kTableSigns.begin(), kTableSigns.end());
    const auto k = balance_factors(n, 406560, 420);
    EXPECT_EQ(k, (std::vector<int>{11, 108, 27, 51, 48, 20}));
    std::vector<long long> totals;
    for (std::size_t c = 0; c < n.size(); ++c) {
        totals.push_back(n[c] * k[c] * 420);
        EXPECT_LE(std::abs(totals.back() - 406560), 0.05 * 406560) << c;
    }
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    EXPECT_EQ(*lo, 403200);
    EXPECT_EQ(*hi, 408240);
    EXPECT_LE(static_cast<double>(*hi) / static_cast<double>(*lo), 1.05);
    EXPECT_NEAR(imbalance_ratio(totals), 1.0125, 1e-4);
}

TEST(Balance, InfeasibleTargets) {
    try {
        balance_factors({88, 9}, 100000, 420);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("minimum feasible target is 406560"), std::string::npos) << e.what();
    }
    EXPECT_THROW(balance_factors({0, 0}, 1000, 420), ConfigError);
    EXPECT_EQ(balance_factors({5, 0}, 5 * 11 * 420, 420), (std::vector<int>{11, 0}));
}

TEST(Balance, PlanUsesFactors) {
    PipelineConfig cfg;
    cfg.stages.environment = false;
    cfg.stages.occlusion = false;
    cfg.balance.enabled = true;
    Catalog cat = small_catalog(0, 2, 1, 0);
    for (int i = 0; i < 4; ++i) cat.signs.push_back({"i" + std::to_string(i), SignClass::Informational, {}});
    cat.signs.push_back({"p", SignClass::Priority, {}});
    cfg.balance.target = 4 * 11 * 2;
    const Plan plan = build_plan(cfg, cat);
    EXPECT_EQ(plan.variants_for_sign(0), 11);
    EXPECT_EQ(plan.variants_for_sign(4), 44);
    const CountTable t = plan_counts(plan);
    EXPECT_EQ(t.rows[0][4], 88);
    EXPECT_EQ(t.rows[1][4], 88);
    EXPECT_EQ(materialize_by_stages(plan).size(), 176u);
    cfg.balance.target = 10;
    EXPECT_THROW(build_plan(cfg, cat), ConfigError);
}

class Execute : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        corpus_ = new fx::TempDir("corpus");
        demo::write_corpus(corpus_->path());
    }
    static void TearDownTestSuite() {
        delete corpus_;
        corpus_ = nullptr;
    }
    static fx::TempDir* corpus_;
};
fx::TempDir* Execute::corpus_ = nullptr;

TEST_F(Execute, LimitAndHeader) {
    fx::TempDir out("out");
    const auto g = generate(corpus_->path(), out.path(), 1, 30);
    EXPECT_EQ(g.result.planned, 3u * 11 * 2 * 7 * 3);
    EXPECT_EQ(g.result.attempted, 30u);
    EXPECT_EQ(g.result.written + g.result.rejected.size(), 30u);
    const auto lines = manifest_lines(out.path());
    ASSERT_EQ(lines.size(), g.result.written);
    for (std::size_t i = 1; i < lines.size(); ++i)
        EXPECT_LT(lines[i - 1]["record_id"].get<std::uint64_t>(), lines[i]["record_id"].get<std::uint64_t>());
    const auto header = nlohmann::json::parse(fx::slurp(out.path() / "dataset.json"));
    EXPECT_EQ(header["written_records"], g.result.written);
    EXPECT_EQ(header["config_hash"], config_hash(g.cfg));
    EXPECT_EQ(header["manifest_hash"], g.result.manifest_hash);
}

TEST_F(Execute, JobsDoNotChangeOutput) {
    fx::TempDir a("a"), b("b");
    const auto ga = generate(corpus_->path(), a.path(), 1, 63);
    const auto gb = generate(corpus_->path(), b.path(), 3, 63);
    EXPECT_EQ(ga.result.manifest_hash, gb.result.manifest_hash);
    EXPECT_EQ(tree(a.path()), tree(b.path()));
}

TEST_F(Execute, OcclusionKeepsBoxAndWindow) {
    fx::TempDir out("occ");
    generate(corpus_->path(), out.path(), 2, 84);
    std::map<std::string, std::set<std::vector<int>>> boxes;
    int occluded = 0;
    for (const auto& j : manifest_lines(out.path())) {
        const std::uint64_t id = j["record_id"];
        const std::string composite = std::to_string(id / 21);
        boxes[composite].insert(j["bbox_px"].get<std::vector<int>>());
        if (id % 3 == 0) {
            EXPECT_TRUE(j["occlusion"].is_null());
        } else {
            ASSERT_TRUE(j["occlusion"].is_object());
            const double cov = j["occlusion"]["coverage"];
            EXPECT_GE(cov, 0.1);
            EXPECT_LE(cov, 0.5);
            ++occluded;
        }
    }
    EXPECT_GT(occluded, 0);
    for (const auto& [c, set] : boxes) EXPECT_EQ(set.size(), 1u) << "composite " << c;
}

TEST_F(Execute, FreshDatasetValidates) {
    fx::TempDir out("v");
    const auto g = generate(corpus_->path(), out.path(), 1, 21);
    EXPECT_TRUE(validate_dataset(out.path()).empty());

    // corrupt one label value and delete one image
    const auto lines = manifest_lines(out.path());
    ASSERT_GE(lines.size(), 3u);
    const fs::path label = out.path() / lines[1]["label"].get<std::string>();
    std::string text = fx::slurp(label);
    const auto sp = text.find(' ');
    text = text.substr(0, sp) + " 1.200000" + text.substr(text.find(' ', sp + 1));
    write_file(label, text);
    fs::remove(out.path() / lines[2]["image"].get<std::string>());

    const auto v = validate_dataset(out.path());
    ASSERT_FALSE(v.empty());
    bool range = false, missing = false;
    for (const auto& x : v) {
        if (x.line == 2 && x.message.find("outside [0,1]") != std::string::npos) range = true;
        if (x.line == 3 && x.message.find("image file missing") != std::string::npos) missing = true;
        EXPECT_TRUE(x.line == 2 || x.line == 3) << x.line << " " << x.message;
    }
    EXPECT_TRUE(range);
    EXPECT_TRUE(missing);
    EXPECT_THROW(validate_dataset(out.path() / "nope"), ConfigError);
}

TEST(Stats, ImbalanceRatios) {
    std::ostringstream m;
    int id = 0;
    for (int i = 0; i < 88; ++i) m << R"({"record_id":)" << id++ << R"(,"class_index":0})" << "\n";
    for (int i = 0; i < 9; ++i) m << R"({"record_id":)" << id++ << R"(,"class_index":1})" << "\n";
    std::istringstream in(m.str());
    const DatasetStats st = dataset_stats(in);
    EXPECT_EQ(st.total, 97);
    EXPECT_EQ(st.per_class[0], 88);
    EXPECT_NEAR(st.imbalance, 88.0 / 9.0, 1e-12);
    EXPECT_NEAR(st.imbalance, 9.78, 0.005);

    EXPECT_DOUBLE_EQ(imbalance_ratio({0, 0, 5, 0}), 1.0);
    EXPECT_DOUBLE_EQ(imbalance_ratio({0, 0}), 0.0);
    // multiplying every class by the same factor keeps the ratio
    EXPECT_DOUBLE_EQ(imbalance_ratio({88 * 1260, 9 * 1260}), imbalance_ratio({88, 9}));
}

TEST(Stats, HistogramsAndCoverage) {
    std::istringstream in(
        R"({"class_index":2,"variant":{"kind":"rotate"},"background_id":"b","env":null,"occlusion":null})" "\n"
        R"({"class_index":2,"variant":{"kind":"rotate"},"background_id":"b","env":{"kind":"fog"},"occlusion":{"category":"car","coverage":0.2}})" "\n"
        R"({"class_index":3,"variant":{"kind":"scale"},"background_id":"c","env":{"kind":"fog"},"occlusion":{"category":"bus","coverage":0.4}})" "\n");
    const DatasetStats st = dataset_stats(in);
    EXPECT_EQ(st.histograms.at("variant").at("rotate"), 2);
    EXPECT_EQ(st.histograms.at("env").at("none"), 1);
    EXPECT_EQ(st.histograms.at("env").at("fog"), 2);
    EXPECT_EQ(st.histograms.at("occlusion").at("none"), 1);
    EXPECT_EQ(st.occluded, 2);
    EXPECT_DOUBLE_EQ(st.coverage_min, 0.2);
    EXPECT_DOUBLE_EQ(st.coverage_max, 0.4);
    EXPECT_NEAR(st.coverage_mean, 0.3, 1e-12);
    EXPECT_DOUBLE_EQ(st.imbalance, 2.0);
    EXPECT_NE(format_stats(st).find("imbalance ratio (max/min): 2.0000"), std::string::npos);
}

TEST(Stats, CorruptLineReportsLineNumber) {
    std::istringstream in("{\"class_index\":0}\n{\"class_index\":1}\n{\"class_index\": \n");
    try {
        dataset_stats(in, "m.jsonl");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("m.jsonl:3:"), std::string::npos) << e.what();
    }
    std::istringstream bad_class("{\"class_index\":6}\n");
    EXPECT_THROW(dataset_stats(bad_class), ParseError);
}
