#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pingpong/cli.hpp"

using namespace pingpong;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pingpong_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

int call(std::vector<std::string> args) {
    args.insert(args.begin(), "pingpong");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(int(argv.size()), argv.data());
}

const std::string kConfig = std::string(PINGPONG_SOURCE_DIR) + "/config/default.toml";

}  // namespace

TEST(Cli, DefaultConfigMatchesBuiltins) {
    const Config cfg = load_config(kConfig);
    const ActionConfig d;
    EXPECT_EQ(cfg.action.radii, d.radii);
    EXPECT_EQ(cfg.action.lambda_a, d.lambda_a);
    EXPECT_TRUE(cfg.action.repeller_a.is_infinity());
    EXPECT_EQ(cfg.action.repeller_b, d.repeller_b);
    EXPECT_EQ(cfg.action.samples, d.samples);
    EXPECT_EQ(cfg.experiment.seed, 1u);
    EXPECT_EQ(cfg.experiment.delta, 1e-4);
}

TEST(Cli, ConfigErrors) {
    EXPECT_THROW(parse_config("[action]\nlambda_c = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("version = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[action]\nradii = [0.2, 0.2]\n"), ConfigError);
    EXPECT_THROW(parse_config("[experiment]\nn = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("[action]\nrepeller_a = \"north\"\n"), ConfigError);
    EXPECT_THROW(parse_config("not toml ["), ConfigError);
    const auto c = parse_config("[action]\nlambda_b = 1\n");
    EXPECT_EQ(c.action.lambda_b, 1.0);
}

TEST(Cli, VerifyModel) {
    ExperimentSpec s;
    s.pipeline = Pipeline::verify_model;
    s.samples = 20000;
    s.out = scratch("verify");
    const auto r = run(s);
    EXPECT_EQ(r.exit_code, kExitOk);
    EXPECT_TRUE(r.report["pass"].get<bool>());
    for (const auto& c : r.report["checks"]) EXPECT_TRUE(c["pass"].get<bool>()) << c["property"];
    EXPECT_TRUE(fs::exists(fs::path(s.out) / "manifest.json"));
}

TEST(Cli, ApproximantArtifacts) {
    ExperimentSpec s;
    s.pipeline = Pipeline::approximant;
    s.n = 3;
    s.out = scratch("approx");
    const auto r = run(s);
    EXPECT_EQ(r.exit_code, kExitOk);
    const std::size_t expected = 4 * 27;
    const auto svg = slurp(fs::path(s.out) / "approximant.svg");
    EXPECT_EQ(occurrences(svg, "<circle"), expected);
    EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
    const auto csv = slurp(fs::path(s.out) / "approximant.csv");
    EXPECT_EQ(occurrences(csv, "\r\n"), expected + 1);
    EXPECT_EQ(occurrences(csv, "\n"), expected + 1);
    EXPECT_EQ(csv.rfind("code,center_re,center_im,radius,side,diameter\r\n", 0), 0u);
    EXPECT_EQ(r.report["levels"].size(), 4u);
    EXPECT_EQ(r.report["levels"][3]["components"].get<std::size_t>(), expected);
}

TEST(Cli, RerunsAreByteIdentical) {
    for (Pipeline p : {Pipeline::pseudo, Pipeline::realize, Pipeline::shadow}) {
        ExperimentSpec s;
        s.pipeline = p;
        s.n = 3;
        s.seed = 12;
        s.out = scratch("rerun_a");
        run(s);
        const auto a = slurp(fs::path(s.out) / (pipeline_name(p) + ".json"));
        s.out = scratch("rerun_b");
        const auto r = run(s);
        EXPECT_EQ(r.exit_code, kExitOk) << pipeline_name(p);
        EXPECT_EQ(a, slurp(fs::path(s.out) / (pipeline_name(p) + ".json"))) << pipeline_name(p);
        const auto manifest = slurp(fs::path(s.out) / "manifest.json");
        EXPECT_NE(manifest.find("wall_time_seconds"), std::string::npos);
        EXPECT_EQ(a.find("wall_time"), std::string::npos);
    }
}

TEST(Cli, ShadowFailureIsRecorded) {
    ExperimentSpec s;
    s.pipeline = Pipeline::shadow;
    s.n = 4;
    s.delta = 0.05;
    s.epsilon = 1e-3;
    s.seed = 3;
    s.samples = 2000;
    s.out = scratch("fail");
    const auto r = run(s);
    EXPECT_EQ(r.exit_code, kExitGateFailed);
    EXPECT_FALSE(r.report["found"].get<bool>());
    EXPECT_TRUE(r.report["shadow_point"].is_null());
    EXPECT_TRUE(fs::exists(fs::path(s.out) / "shadow.json"));
    EXPECT_FALSE(fs::exists(fs::path(s.out) / "shadow.csv"));
}

TEST(Cli, UsageErrors) {
    const auto out = scratch("usage").string();
    EXPECT_EQ(call({"pseudo", "--out", out}), kExitUsage);
    EXPECT_EQ(call({"pseudo", "--n", "9", "--seed", "1", "--out", out}), kExitUsage);
    EXPECT_EQ(call({"shadow", "--mode", "sideways", "--seed", "1", "--out", out}), kExitUsage);
    EXPECT_EQ(call({"realize", "--eta", "-1", "--seed", "1", "--out", out}), kExitUsage);
    EXPECT_EQ(call({"frobnicate"}), kExitUsage);
    EXPECT_EQ(call({"approximant", "--config", "/nonexistent.toml"}), kExitUsage);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(call({"pseudo", "--config", kConfig, "--n", "2", "--out", out}), kExitOk);
    EXPECT_TRUE(fs::exists(fs::path(out) / "pseudo.csv"));
}
