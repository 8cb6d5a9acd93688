// signsynth command-line tool.
//
//   signsynth plan CONFIG [--paper-check]
//   signsynth run CONFIG [--seed N] [--jobs N] [--limit N] [--out DIR] [--force]
//   signsynth stats --manifest FILE
//   signsynth validate --dataset DIR
//   signsynth extract-obstacles --coco FILE --images DIR --out DIR [--categories LIST]
//
// Exit codes: 0 success, 1 usage / configuration / validation error,
// 2 runtime or I/O failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "signsynth.hpp"

namespace {

using namespace signsynth;

struct RunFlags {
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::uint64_t> limit;
    std::optional<std::string> out;
    bool force = false;
    bool quiet = false;
};

PipelineConfig load_with_overrides(const std::string& path, const RunFlags& f) {
    PipelineConfig cfg = load_config(path);
    if (f.seed) cfg.seed = *f.seed;
    if (f.jobs) {
        if (*f.jobs < 1) throw ConfigError("--jobs must be >= 1");
        cfg.jobs = *f.jobs;
    }
    if (f.limit) cfg.limit = *f.limit;
    if (f.out) cfg.output_dir = *f.out;
    return cfg;
}

int cmd_plan(const std::string& config_path, bool paper_check) {
    const PipelineConfig cfg = load_config(config_path);
    const Plan plan = build_plan(cfg, load_catalog(cfg, false));
    const CountTable t = plan_counts(plan);
    std::cout << format_count_table(t, &plan);
    std::cout << "records: " << group_thousands(static_cast<long long>(plan.size())) << "\n";
    if (paper_check) std::cout << format_published_check(t);
    return 0;
}

int cmd_run(const std::string& config_path, const RunFlags& flags) {
    const PipelineConfig cfg = load_with_overrides(config_path, flags);
    const Catalog catalog = load_catalog(cfg, true);
    const Plan plan = build_plan(cfg, catalog);
    const LoadedAssets assets = load_assets(catalog);
    prepare_output_dir(cfg.output_dir, flags.force);

    const auto t0 = std::chrono::steady_clock::now();
    RunOptions opt;
    opt.jobs = cfg.jobs;
    opt.limit = cfg.limit;
    opt.log = &std::cerr;
    const RunResult res = execute(plan, assets, cfg.output_dir, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!flags.quiet) {
        std::cout << "wrote " << res.written << " of " << res.attempted << " records (plan size " << res.planned
                  << ") to " << cfg.output_dir.string() << "\n";
        if (!res.rejected.empty()) std::cout << res.rejected.size() << " record(s) rejected; see dataset.json\n";
        std::cout << "manifest hash " << res.manifest_hash << ", " << secs << " s\n";
    }
    return 0;
}

int cmd_stats(const std::string& manifest) {
    std::cout << format_stats(dataset_stats(std::filesystem::path(manifest)));
    return 0;
}

int cmd_validate(const std::string& dataset) {
    const auto violations = validate_dataset(dataset);
    for (const auto& v : violations)
        std::cout << (v.line ? "line " + std::to_string(v.line) + ": " : std::string("dataset: ")) << v.message << "\n";
    std::cout << violations.size() << " violation(s)\n";
    return violations.empty() ? 0 : 1;
}

int cmd_extract(const std::string& coco, const std::string& images, const std::string& out,
                const std::string& categories) {
    std::vector<std::string> names;
    std::stringstream ss(categories);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) names.push_back(item);
    parse_category_list(names);
    const auto rows = extract_obstacles(coco, images, out, names);
    std::cout << "extracted " << rows.size() << " cutout(s) into " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic traffic-sign dataset generator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(signsynth::kToolVersion));

    std::string config_path;
    bool paper_check = false;
    auto* plan = app.add_subcommand("plan", "Print the per-class, per-stage record counts of a config");
    plan->add_option("config", config_path, "Config file")->required();
    plan->add_flag("--paper-check", paper_check, "Also print deltas against the published counts");

    RunFlags flags;
    auto* run = app.add_subcommand("run", "Generate the dataset");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--seed", flags.seed, "Global seed (overrides config)");
    run->add_option("--jobs", flags.jobs, "Worker threads (overrides config)");
    run->add_option("--limit", flags.limit, "Emit only the first N records");
    run->add_option("--out", flags.out, "Output directory (overrides config)");
    run->add_flag("--force", flags.force, "Reuse a non-empty output directory");
    run->add_flag("--quiet", flags.quiet, "No summary output");

    std::string manifest;
    auto* stats = app.add_subcommand("stats", "Class balance and provenance histograms of a manifest");
    stats->add_option("--manifest", manifest, "manifest.jsonl")->required();

    std::string dataset;
    auto* validate = app.add_subcommand("validate", "Check every record of a generated dataset");
    validate->add_option("--dataset", dataset, "Dataset directory")->required();

    std::string coco, images, out, categories = "car,truck,bus,person";
    auto* extract = app.add_subcommand("extract-obstacles", "Cut obstacle sprites out of a COCO annotation file");
    extract->add_option("--coco", coco, "COCO instances JSON")->required();
    extract->add_option("--images", images, "Directory with the annotated images")->required();
    extract->add_option("--out", out, "Output directory for cutouts")->required();
    extract->add_option("--categories", categories, "Comma-separated category names")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*plan) return cmd_plan(config_path, paper_check);
        if (*run) return cmd_run(config_path, flags);
        if (*stats) return cmd_stats(manifest);
        if (*validate) return cmd_validate(dataset);
        if (*extract) return cmd_extract(coco, images, out, categories);
    } catch (const signsynth::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const signsynth::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const signsynth::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const signsynth::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const signsynth::AssetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
