#include <gtest/gtest.h>

#include <sys/wait.h>

#include <map>

#include "support.hpp"

using namespace signsynth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

Outcome cli(const std::string& args) {
    static fx::TempDir scratch("cli_io");
    static int n = 0;
    const fs::path o = scratch / ("o" + std::to_string(n)), e = scratch / ("e" + std::to_string(n));
    ++n;
    const std::string cmd = std::string("\"") + SIGNSYNTH_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = fx::slurp(o);
    r.err = fx::slurp(e);
    return r;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

const fs::path kTable = fs::path(SIGNSYNTH_DATA_DIR) / "table4";

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = fx::slurp(e.path());
    return files;
}

}  // namespace

TEST(Cli, PlanPrintsPublishedTotals) {
    const Outcome r = cli("plan " + quoted(kTable / "config.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Warning                 48          528       10,560       73,920      221,760"), std::string::npos)
        << r.out;
    EXPECT_NE(r.out.find("Total                  220        2,420       48,400      338,800    1,016,400"), std::string::npos);
    EXPECT_NE(r.out.find("records: 1,016,400"), std::string::npos);
    const Outcome check = cli("plan --paper-check " + quoted(kTable / "config.json"));
    ASSERT_EQ(check.code, 0);
    EXPECT_NE(check.out.find("1,015,560"), std::string::npos) << check.out;
}

TEST(Cli, PlanHidesDisabledStages) {
    fx::TempDir dir("cli_env");
    write_file(dir / "config.json",
               "{\"signs\": {\"dir\": \"" + (kTable / "signs").generic_string() + "\"}, \"backgrounds\": {\"dir\": \"" +
                   (kTable / "backgrounds").generic_string() + "\"}, \"stages\": {\"environment\": false, \"occlusion\": false}}");
    const Outcome r = cli("plan " + quoted(dir / "config.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.find("environment"), std::string::npos);
    EXPECT_EQ(r.out.find("occlusion"), std::string::npos);
    EXPECT_NE(r.out.find("law: n -> 11n -> 220n\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("records: 48,400"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitOne) {
    fx::TempDir dir("cli_err");
    demo::write_corpus(dir.path());

    write_file(dir / "signs/signs.csv", "file,class\n");
    Outcome r = cli("plan " + quoted(dir / "config.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error:"), std::string::npos);

    demo::write_corpus(dir.path());
    fs::remove_all(dir / "obstacles");
    r = cli("run " + quoted(dir / "config.json") + " --out " + quoted(dir / "o1"));
    EXPECT_EQ(r.code, 1) << r.err;

    write_file(dir / "bad.json", "{\"seed\": 1,,}");
    r = cli("plan " + quoted(dir / "bad.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("malformed JSON at byte"), std::string::npos) << r.err;

    write_file(dir / "unknown.json", "{\"sed\": 1}");
    r = cli("plan " + quoted(dir / "unknown.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("sed: unknown key"), std::string::npos) << r.err;

    EXPECT_EQ(cli("plan " + quoted(dir / "missing.json")).code, 1);
    EXPECT_EQ(cli("run " + quoted(dir / "config.json") + " --bogus").code, 1);
    EXPECT_EQ(cli("").code, 1);
    EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, RunRefusesNonEmptyOutput) {
    fx::TempDir dir("cli_out");
    demo::write_corpus(dir.path());
    fs::create_directories(dir / "o");
    write_file(dir / "o/keep.txt", "x");
    Outcome r = cli("run " + quoted(dir / "config.json") + " --limit 3 --out " + quoted(dir / "o"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--force"), std::string::npos) << r.err;
    r = cli("run " + quoted(dir / "config.json") + " --limit 3 --force --out " + quoted(dir / "o"));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "o/keep.txt"));
    EXPECT_TRUE(fs::exists(dir / "o/manifest.jsonl"));
}

TEST(Cli, RunIsRepeatableAndValidates) {
    fx::TempDir dir("cli_run");
    demo::write_corpus(dir.path());
    const std::string base = "run " + quoted(dir / "config.json") + " --limit 22 --seed 7 --quiet --out ";
    ASSERT_EQ(cli(base + quoted(dir / "a")).code, 0);
    ASSERT_EQ(cli(base + quoted(dir / "b") + " --jobs 4").code, 0);
    EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
    EXPECT_EQ(nlohmann::json::parse(fx::slurp(dir / "a/dataset.json"))["seed"], 7);

    Outcome v = cli("validate --dataset " + quoted(dir / "a"));
    EXPECT_EQ(v.code, 0) << v.out;
    EXPECT_NE(v.out.find("0 violation(s)"), std::string::npos);
    Outcome s = cli("stats --manifest " + quoted(dir / "a/manifest.jsonl"));
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("records: 22"), std::string::npos) << s.out;
    EXPECT_NE(s.out.find("imbalance ratio"), std::string::npos);

    ASSERT_TRUE(fs::remove(dir / "a/labels/00000005.txt"));
    fs::path label;
    for (const auto& e : fs::directory_iterator(dir / "a/labels")) {
        label = e.path();
        break;
    }
    write_file(label, "0 0.5 0.5 0.1\n");
    v = cli("validate --dataset " + quoted(dir / "a"));
    EXPECT_EQ(v.code, 1);
    EXPECT_NE(v.out.find("expected 5 fields"), std::string::npos) << v.out;
    EXPECT_NE(v.out.find("label file missing: labels/00000005.txt"), std::string::npos);
}

TEST(Cli, StatsValidateAndExtractErrors) {
    fx::TempDir dir("cli_misc");
    EXPECT_EQ(cli("stats --manifest " + quoted(dir / "none.jsonl")).code, 1);
    write_file(dir / "m.jsonl", "{\"class_index\":0}\nnot json\n");
    const Outcome s = cli("stats --manifest " + quoted(dir / "m.jsonl"));
    EXPECT_EQ(s.code, 1);
    EXPECT_NE(s.err.find("m.jsonl:2:"), std::string::npos) << s.err;
    EXPECT_EQ(cli("validate --dataset " + quoted(dir / "nope")).code, 1);
    EXPECT_EQ(cli("extract-obstacles --coco " + quoted(dir / "x.json") + " --images " + quoted(dir.path()) + " --out " +
                  quoted(dir / "c"))
                  .code,
              1);
    write_file(dir / "x.json", R"({"images":[],"annotations":[],"categories":[]})");
    const Outcome bad = cli("extract-obstacles --coco " + quoted(dir / "x.json") + " --images " + quoted(dir.path()) +
                            " --out " + quoted(dir / "c") + " --categories car,bicycle");
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("bicycle"), std::string::npos) << bad.err;
    const Outcome ok = cli("extract-obstacles --coco " + quoted(dir / "x.json") + " --images " + quoted(dir.path()) +
                           " --out " + quoted(dir / "c"));
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_NE(ok.out.find("extracted 0 cutout(s)"), std::string::npos);
}
