#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/run.hpp"

namespace fs = std::filesystem;
using namespace mixedop::cli;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mixedop_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(MIXEDOP_CLI_PATH) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall =
    "[domain]\nn_elem = 16\n"
    "[operator]\ns = 0.5\nalpha = 0\n"
    "[nonlinearity]\nkind = power\nlambda = halfbelow(1)\np = 4\n"
    "[analysis]\nrestarts = 8\naudit_trials = 50\n";

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const RunConfig cfg = parse_config_text("");
  EXPECT_EQ(cfg.n_elem, 64);
  EXPECT_DOUBLE_EQ(cfg.s, 0.5);
  ASSERT_EQ(cfg.alpha.size(), 1u);
  EXPECT_EQ(cfg.kind, "none");
}

TEST(Config, RejectsOrderOutsideUnitInterval) {
  try {
    parse_config_text("[operator]\ns = 1.2\n");
    FAIL() << "accepted s = 1.2";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("operator.s"), std::string::npos);
  }
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(parse_config_text("[operator]\nsigma = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[solvers]\ntol = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[domain]\nn_elem = 12x\n"), ConfigError);
}

TEST(Config, AlphaGridExpandsWithEndpoints) {
  const RunConfig cfg = parse_config_text("[operator]\nalpha = -5:0:11\n");
  ASSERT_EQ(cfg.alpha.size(), 11u);
  EXPECT_DOUBLE_EQ(cfg.alpha.front(), -5.0);
  EXPECT_DOUBLE_EQ(cfg.alpha[2], -4.0);
  EXPECT_DOUBLE_EQ(cfg.alpha.back(), 0.0);
  EXPECT_TRUE(cfg.is_grid());
  EXPECT_EQ(parse_grid("1,2.5", "x"), (std::vector<double>{1.0, 2.5}));
  EXPECT_THROW(parse_grid("0:1:1", "x"), ConfigError);
}

TEST(Config, LambdaRules) {
  const RunConfig a = parse_config_text("[nonlinearity]\nkind = power\nlambda = midgap(2)\n");
  EXPECT_EQ(a.lambda.rule, LambdaSpec::Rule::midgap);
  EXPECT_EQ(a.lambda.k, 2);
  const RunConfig b = parse_config_text("[nonlinearity]\nkind = power\nlambda = 3.5\n");
  EXPECT_EQ(b.lambda.rule, LambdaSpec::Rule::value);
  EXPECT_DOUBLE_EQ(b.lambda.value, 3.5);
  EXPECT_THROW(parse_config_text("[nonlinearity]\nlambda = midgap(0)\n"), ConfigError);
}

TEST(Config, OverridesWinAndAreEmbedded) {
  Overrides o;
  o.seed = 42;
  o.tol = 1e-6;
  o.max_iter = 7;
  o.out_dir = "elsewhere";
  const RunConfig cfg = apply_overrides(parse_config_text("[solver]\nseed = 1\n"), o);
  EXPECT_EQ(cfg.seed, 42u);
  const auto j = to_json(cfg);
  EXPECT_EQ(j["solver"]["seed"], 42);
  EXPECT_EQ(j["solver"]["max_iter"], 7);
  EXPECT_EQ(j["output"]["dir"], "elsewhere");
  o.tol = -1.0;
  EXPECT_THROW(apply_overrides(cfg, o), ConfigError);
}

TEST(Output, CsvHasHeaderRow) {
  CsvTable t{{"x", "u"}, {}};
  t.add({"0", format_number(0.1)});
  EXPECT_EQ(t.str(), "x,u\n0,0.10000000000000001\n");
}

TEST(Output, CommitReplacesTargetAndLeavesNoStaging) {
  const fs::path dir = scratch("commit");
  const fs::path target = dir / "out";
  fs::create_directories(target);
  std::ofstream(target / "stale.txt") << "old";
  Artifacts a;
  a.add_text("a.txt", "1");
  a.add_text("sub/b.txt", "2");
  commit(a, target);
  EXPECT_FALSE(fs::exists(target / "stale.txt"));
  EXPECT_EQ(slurp(target / "sub/b.txt"), "2");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
}

TEST(Output, FailedCommitKeepsPreviousTarget) {
  const fs::path dir = scratch("commit_fail");
  const fs::path target = dir / "out";
  fs::create_directories(target);
  std::ofstream(target / "keep.txt") << "kept";
  Artifacts a;
  a.add_text("ok.txt", "1");
  a.add_text("ok.txt/child.txt", "cannot nest under a file");
  EXPECT_ANY_THROW(commit(a, target));
  EXPECT_EQ(slurp(target / "keep.txt"), "kept");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
}

TEST(Run, ReportsEmbedConfigAndVersion) {
  const RunResult r = compute("spectrum", parse_config_text(kSmall));
  EXPECT_TRUE(r.certified);
  ASSERT_FALSE(r.artifacts.files.empty());
  bool found = false;
  for (const auto& f : r.artifacts.files) {
    if (f.name != "report.json") continue;
    const auto j = nlohmann::json::parse(f.content);
    EXPECT_EQ(j["version"], version());
    EXPECT_EQ(j["config"]["domain"]["n_elem"], 16);
    EXPECT_EQ(j["subcommand"], "spectrum");
    found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Run, GridFansOutIntoSubdirectories) {
  RunConfig cfg = parse_config_text(kSmall);
  cfg.alpha = {-1.0, 0.0};
  const RunResult r = compute("spectrum", cfg);
  std::vector<std::string> names;
  for (const auto& f : r.artifacts.files) names.push_back(f.name);
  for (const char* want : {"alpha_000/report.json", "alpha_001/spectrum.csv", "summary.json", "summary.csv"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
}

TEST(Binary, SameConfigAndSeedGiveIdenticalBytes) {
  const fs::path dir = scratch("determinism");
  std::ofstream(dir / "run.ini") << kSmall;
  for (const char* sub : {"mountain-pass", "constants"}) {
    const std::string base = std::string(sub) + " --config " + (dir / "run.ini").string() + " --seed 3 --out " + (dir / "out").string();
    ASSERT_EQ(run_binary(base), 0) << sub;
    std::map<std::string, std::string> first;
    for (const auto& e : fs::recursive_directory_iterator(dir / "out"))
      if (e.is_regular_file()) first[fs::relative(e.path(), dir / "out").string()] = slurp(e.path());
    ASSERT_EQ(run_binary(base), 0) << sub;
    for (const auto& [name, content] : first) EXPECT_EQ(slurp(dir / "out" / name), content) << sub << "/" << name;
  }
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("exit_codes");
  std::ofstream(dir / "bad.ini") << "[operator]\ns = 1.2\n";
  EXPECT_EQ(run_binary("spectrum --config " + (dir / "bad.ini").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "o"));
  // lambda below lambda_1 leaves nothing to link over with k = 1.
  std::ofstream(dir / "link.ini") << kSmall;
  EXPECT_EQ(run_binary("linking --config " + (dir / "link.ini").string() + " --out " + (dir / "o").string()), 1);
  EXPECT_TRUE(fs::exists(dir / "o" / "report.json"));
  std::ofstream(dir / "lin.ini") << "[nonlinearity]\nkind = affine\nlambda = midgap(1)\n[domain]\nn_elem = 16\n";
  EXPECT_EQ(run_binary("solve-linear --config " + (dir / "lin.ini").string() + " --out " + (dir / "lin").string()), 0);
  EXPECT_EQ(run_binary("solve-linear --config " + (dir / "link.ini").string() + " --out " + (dir / "x").string()), 3);
  EXPECT_NE(run_binary("nosuch --config " + (dir / "link.ini").string()), 0);
}
