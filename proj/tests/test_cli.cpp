#include "support.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome cli(const std::string& args, const support::TempDir& dir) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string(NETCLASS_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = support::read_file(out);
    o.err = support::read_file(err);
    return o;
}

void write_synth_spec(const fs::path& path, std::size_t cohorts, std::uint64_t seed, bool module = true) {
    std::string text = "version = 1\ncohorts = " + std::to_string(cohorts) +
                       "\nn_samples = 40\nn_genes = 40\neffect_size = 1.0\nseed = " + std::to_string(seed) +
                       "\ninclude_esr1 = true\nnetwork_nodes = 30\ngeneset_count = 6\ngeneset_size = 5\n";
    if (module) text += "module = 0, 1, 2\n";
    support::write_file(path, text);
}

std::string run_spec(std::size_t cohorts, const std::string& methods, const std::string& settings,
                     const std::string& network = "data/network.tsv") {
    std::string text = "version = 1\n";
    for (std::size_t c = 1; c <= cohorts; ++c) {
        const auto n = std::to_string(c);
        text += "dataset = D" + n + " data/cohort" + n + "_expression.tsv data/cohort" + n + "_labels.tsv\n";
    }
    text += "network = net " + network + "\ngenesets = gs data/genesets.gmt\n";
    text += "methods = " + methods + "\nclassifiers = nmc\nsettings = " + settings + "\n";
    text += "seed = 5\nchuang_permutations = 10\ntaylor_permutations = 20\n";
    return text;
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}

TEST(Cli, SynthWritesCohortsAndTruth) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 2, 11);
    auto r = cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "a").string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"cohort1_expression.tsv", "cohort1_labels.tsv", "cohort2_expression.tsv", "cohort2_labels.tsv",
                          "truth.json", "network.tsv", "genesets.gmt"}) {
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
    }
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "b").string(), dir).code, 0);
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const auto name = entry.path().filename();
        EXPECT_EQ(support::read_file(entry.path()), support::read_file(dir / "b" / name)) << name;
    }
    auto truth = nlohmann::json::parse(support::read_file(dir / "a" / "truth.json"));
    EXPECT_EQ(truth["modules"].size(), 1u);

    write_synth_spec(dir / "none.txt", 2, 11, false);
    ASSERT_EQ(cli("synth --spec " + (dir / "none.txt").string() + " --out " + (dir / "c").string(), dir).code, 0);
    auto empty = nlohmann::json::parse(support::read_file(dir / "c" / "truth.json"));
    EXPECT_TRUE(empty["modules"].empty());
}

TEST(Cli, MinimalRunThenCachedRerun) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 2, 3);
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "data").string(), dir).code, 0);
    support::write_file(dir / "run.txt", run_spec(2, "sg", "paired"));
    const std::string base = "run --spec " + (dir / "run.txt").string() + " --out ";

    auto first = cli(base + (dir / "out1").string(), dir);
    ASSERT_EQ(first.code, 0) << first.err;
    const auto results = support::read_file(dir / "out1" / "results.jsonl");
    EXPECT_EQ(line_count(results), 2u);
    EXPECT_TRUE(fs::exists(dir / "out1" / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "out1" / "report" / "fig1a.csv"));
    EXPECT_NE(first.out.find(" 0 hits"), std::string::npos) << first.out;

    // Same cache directory, fresh output directory.
    fs::create_directories(dir / "out2");
    fs::copy(dir / "out1" / "cache", dir / "out2" / "cache", fs::copy_options::recursive);
    auto second = cli(base + (dir / "out2").string(), dir);
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_EQ(second.out.find(" 0 hits"), std::string::npos) << second.out;
    EXPECT_NE(second.out.find(" 0 misses"), std::string::npos) << second.out;
    EXPECT_EQ(support::read_file(dir / "out2" / "results.jsonl"), results);
    EXPECT_EQ(support::read_file(dir / "out2" / "report" / "fig1a.csv"), support::read_file(dir / "out1" / "report" / "fig1a.csv"));

    auto uncached = cli(base + (dir / "out3").string() + " --no-cache", dir);
    ASSERT_EQ(uncached.code, 0) << uncached.err;
    EXPECT_EQ(support::read_file(dir / "out3" / "results.jsonl"), results);
    EXPECT_FALSE(fs::exists(dir / "out3" / "cache"));
}

TEST(Cli, TamperedCacheIsRejected) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 2, 3);
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "data").string(), dir).code, 0);
    support::write_file(dir / "run.txt", run_spec(2, "sg", "paired"));
    const std::string base = "run --spec " + (dir / "run.txt").string() + " --out " + (dir / "out").string();
    ASSERT_EQ(cli(base, dir).code, 0);
    fs::path victim;
    for (const auto& e : fs::directory_iterator(dir / "out" / "cache")) victim = e.path();
    ASSERT_FALSE(victim.empty());
    auto text = support::read_file(victim);
    auto pos = text.find("\"score\":");
    ASSERT_NE(pos, std::string::npos);
    text.insert(pos + 8, "1");
    support::write_file(victim, text);
    auto r = cli(base, dir);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("CacheMismatch"), std::string::npos) << r.err;
}

TEST(Cli, MissingNetworkNamesPath) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 2, 3);
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "data").string(), dir).code, 0);
    support::write_file(dir / "run.txt", run_spec(2, "taylor:net", "paired", "data/missing_network.tsv"));
    auto r = cli("run --spec " + (dir / "run.txt").string() + " --out " + (dir / "out").string(), dir);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("missing_network.tsv"), std::string::npos) << r.err;
}

TEST(Cli, InvalidSpecRejected) {
    support::TempDir dir;
    support::write_file(dir / "run.txt", "version = 1\nmethods = svm\n");
    auto r = cli("run --spec " + (dir / "run.txt").string() + " --out " + (dir / "out").string(), dir);
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ReportTwoMethodsAndSettings) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 3, 8);
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "data").string(), dir).code, 0);
    support::write_file(dir / "run.txt", run_spec(3, "sg, taylor:net", "paired, merged"));
    auto r = cli("run --spec " + (dir / "run.txt").string() + " --out " + (dir / "out").string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(support::read_file(dir / "out" / "results.jsonl")), 2u * (6 + 3));

    auto rep = cli("report " + (dir / "out").string() + " --out " + (dir / "rep").string(), dir);
    ASSERT_EQ(rep.code, 0) << rep.err;
    auto fig1b = support::read_file(dir / "rep" / "fig1b.csv");
    std::size_t paired = 0, merged = 0;
    std::istringstream lines(fig1b);
    std::string line;
    while (std::getline(lines, line)) {
        paired += line.rfind("paired,", 0) == 0;
        merged += line.rfind("merged,", 0) == 0;
    }
    EXPECT_EQ(paired, 4u);
    EXPECT_EQ(merged, 4u);
    EXPECT_EQ(support::read_file(dir / "rep" / "fig1b.csv"), support::read_file(dir / "out" / "report" / "fig1b.csv"));
}

TEST(Cli, ReportOnEmptyDirectoryFails) {
    support::TempDir dir;
    fs::create_directories(dir / "empty");
    auto r = cli("report " + (dir / "empty").string(), dir);
    EXPECT_NE(r.code, 0);
}

TEST(Cli, OnlyFilterAndManifest) {
    support::TempDir dir;
    write_synth_spec(dir / "synth.txt", 2, 3);
    ASSERT_EQ(cli("synth --spec " + (dir / "synth.txt").string() + " --out " + (dir / "data").string(), dir).code, 0);
    support::write_file(dir / "run.txt", run_spec(2, "sg, lee:gs", "paired"));
    auto r = cli("run --spec " + (dir / "run.txt").string() + " --out " + (dir / "out").string() + " --only lee", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    auto results = support::read_file(dir / "out" / "results.jsonl");
    EXPECT_EQ(line_count(results), 2u);
    EXPECT_EQ(results.find("\"method\":\"sg\""), std::string::npos);
    auto manifest = nlohmann::json::parse(support::read_file(dir / "out" / "manifest.json"));
    EXPECT_TRUE(manifest.contains("unavailable_cells"));
    EXPECT_EQ(manifest["cells"].size(), 1u);
}
