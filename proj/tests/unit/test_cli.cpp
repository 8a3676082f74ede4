#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "tdlab/cli/cli.hpp"
#include "tdlab/cli/experiment_config.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tdlab;
using namespace tdlab::cli;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tdlab");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Fresh directory per test.
fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::path(::testing::TempDir()) / "tdlab_cli" / info->name();
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.run.setting = Setting::off_policy;
  c.run.n_mdps = 2;
  c.run.n_runs = 2;
  c.run.n_steps = 10;
  c.run.seed_root = 9;
  c.run.env.n_states = 8;
  c.grid = SweepGrid{{0.05}, {1.0}, {0.5}};
  c.algorithms = {"gtd"};
  return c;
}

fs::path write_config(const fs::path& dir, const ExperimentConfig& c) {
  const auto path = dir / "config.json";
  std::ofstream(path) << to_json(c);
  return path;
}

class ScopedSeed {
 public:
  explicit ScopedSeed(const char* value) { ::setenv("TDLAB_SEED", value, 1); }
  ~ScopedSeed() { ::unsetenv("TDLAB_SEED"); }
};

TEST(Config, EmitParseEmitIsIdentical) {
  const auto r = run({"emit-default-config"});
  ASSERT_EQ(r.code, kExitOk);
  const auto parsed = parse_experiment_config(r.out);
  EXPECT_EQ(parsed, default_experiment_config());
  EXPECT_EQ(to_json(parsed), r.out);
  const auto tiny = tiny_config();
  EXPECT_EQ(parse_experiment_config(to_json(tiny)), tiny);
}

TEST(Config, DefaultsFollowTheRandomMdpProtocol) {
  const auto c = default_experiment_config();
  EXPECT_EQ(c.run.n_mdps, 30u);
  EXPECT_EQ(c.run.n_runs, 100u);
  EXPECT_EQ(c.grid.size(), 15u * 7u * 20u);
  EXPECT_EQ(c.run.env.n_states, 30u);
  EXPECT_EQ(resolve_algorithms(c).size(), 11u);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "n_stepz": 3})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "grid": {"alpha": [0.1]}})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "environment": {"states": 3}})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"n_steps": 3})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 2})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "n_runs": -1})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "n_runs": "ten"})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "setting": "sideways"})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"version": 1, "grid": {"lambdas": [2.0]}})"),
               ConfigError);
  EXPECT_THROW(parse_experiment_config("{not json"), ConfigError);
  EXPECT_EQ(parse_experiment_config(R"({"version": 1, "n_runs": 7})").run.n_runs, 7u);
}

TEST(Config, AlgorithmResolution) {
  ExperimentConfig c;
  c.run.setting = Setting::on_policy;
  EXPECT_EQ(resolve_algorithms(c).size(), 13u);
  c.run.setting = Setting::off_policy;
  c.algorithms = {"td"};
  EXPECT_THROW(resolve_algorithms(c), ConfigError);
  c.algorithms = {"gtd", "gtd"};
  EXPECT_THROW(resolve_algorithms(c), ConfigError);
}

TEST(Sweep, MinimalConfigWritesExpectedCardinality) {
  const auto dir = scratch();
  const auto cfg = write_config(dir, tiny_config());
  const auto r = run({"sweep", cfg.string(), "--out", (dir / "out").string(), "--jobs", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto raw = slurp(dir / "out" / "raw.csv");
  // header + 2 mdps x 2 runs x 10 steps
  EXPECT_EQ(count_lines(raw), 1u + 40u);
  std::size_t step_one = 0;
  std::istringstream lines(raw);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 10u);
    if (fields[8] == "1") ++step_one;
  }
  EXPECT_EQ(step_one, 4u);
  EXPECT_EQ(count_lines(slurp(dir / "out" / "aggregated.csv")), 1u + 10u);
  EXPECT_EQ(count_lines(slurp(dir / "out" / "sensitivity.csv")), 1u + 3u);

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary.at("algorithms").size(), 1u);
  EXPECT_EQ(summary.at("instances").size(), 2u);
  EXPECT_EQ(summary.at("seed_root").get<std::uint64_t>(), 9u);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  for (const auto& a : manifest.at("artifacts")) {
    EXPECT_TRUE(fs::exists(dir / "out" / a.get<std::string>())) << a;
  }
  EXPECT_EQ(manifest.at("config_hash"), summary.at("config_hash"));
}

TEST(Sweep, RerunIsByteIdentical) {
  const auto dir = scratch();
  auto c = tiny_config();
  c.grid = SweepGrid{{0.05, 0.1}, {1.0}, {0.0, 0.9}};
  c.algorithms = {"gtd", "etd"};
  const auto cfg = write_config(dir, c);
  ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "a").string(), "--raw", "all", "--curves",
                 "all", "--jobs", "1"})
                .code,
            kExitOk);
  ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "b").string(), "--raw", "all", "--curves",
                 "all", "--jobs", "3"})
                .code,
            kExitOk);
  // config.json records the output directory, so it is the one file that differs.
  for (const char* f : {"raw.csv", "aggregated.csv", "objectives.csv", "sensitivity.csv",
                        "summary.json", "manifest.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(count_lines(slurp(dir / "a" / "raw.csv")), 1u + 2u * 4u * 40u);
}

TEST(Sweep, BestScopeMatchesFullOutput) {
  const auto dir = scratch();
  auto c = tiny_config();
  c.grid = SweepGrid{{0.05, 0.2}, {1.0}, {0.5}};
  const auto cfg = write_config(dir, c);
  ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "all").string(), "--raw", "all"}).code,
            kExitOk);
  ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "best").string()}).code, kExitOk);
  const auto summary = nlohmann::json::parse(slurp(dir / "all" / "summary.json"));
  const auto alpha = summary["algorithms"][0]["best"]["alpha"].get<double>();
  const std::string prefix = alpha == 0.05 ? "gtd,off-policy,tabular,0.05," : "gtd,off-policy,tabular,0.2,";
  std::istringstream all(slurp(dir / "all" / "raw.csv"));
  std::string expected, line;
  std::getline(all, line);
  expected = line + "\n";
  while (std::getline(all, line)) {
    if (line.rfind(prefix, 0) == 0) expected += line + "\n";
  }
  EXPECT_EQ(slurp(dir / "best" / "raw.csv"), expected);
}

TEST(Sweep, UnknownAlgorithmExitsTwoAndListsNames) {
  const auto dir = scratch();
  const auto cfg = write_config(dir, tiny_config());
  const auto r = run({"sweep", cfg.string(), "--algorithms", "gtd,nosuch", "--out",
                      (dir / "out").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("nosuch"), std::string::npos);
  EXPECT_NE(r.err.find("toetd-beta"), std::string::npos);
}

TEST(Sweep, OnPolicyOnlyAlgorithmRejectedOffPolicy) {
  const auto dir = scratch();
  const auto cfg = write_config(dir, tiny_config());
  EXPECT_EQ(run({"sweep", cfg.string(), "--algorithms", "totd"}).code, kExitConfig);
  EXPECT_EQ(run({"sweep", cfg.string(), "--setting", "diagonal"}).code, kExitConfig);
  EXPECT_EQ(run({"sweep", cfg.string(), "--representation", "custom"}).code, kExitConfig);
}

TEST(Sweep, MissingConfigIsAnIoError) {
  const auto dir = scratch();
  EXPECT_EQ(run({"sweep", (dir / "absent.json").string()}).code, kExitIo);
}

TEST(Sweep, InvalidConfigExitsTwo) {
  const auto dir = scratch();
  std::ofstream(dir / "bad.json") << R"({"version": 1, "colour": "blue"})";
  const auto r = run({"sweep", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST(Sweep, UnwritableOutputIsAnIoError) {
  const auto dir = scratch();
  const auto cfg = write_config(dir, tiny_config());
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run({"sweep", cfg.string(), "--out", (dir / "file" / "sub").string()}).code, kExitIo);
}

TEST(Sweep, SeedEnvironmentOverride) {
  const auto dir = scratch();
  const auto cfg = write_config(dir, tiny_config());
  {
    ScopedSeed seed("1234");
    ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "out").string()}).code, kExitOk);
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary.at("seed_root").get<std::uint64_t>(), 1234u);
  ScopedSeed bad("12ab");
  EXPECT_EQ(run({"sweep", cfg.string(), "--out", (dir / "out2").string()}).code, kExitConfig);
}

TEST(Baird, EmptyAlgorithmListExitsTwo) {
  const auto dir = scratch();
  EXPECT_EQ(run({"baird", "--algorithms", "", "--out", dir.string()}).code, kExitConfig);
  EXPECT_EQ(run({"baird", "--metric", "mave", "--out", dir.string()}).code, kExitConfig);
}

TEST(Baird, GtdBestCellEndsBelowInitialError) {
  const auto dir = scratch();
  const auto r = run({"baird", "--algorithms", "gtd", "--runs", "3", "--steps", "1000", "--alphas",
                      "0.0125,0.05", "--etas", "1,4", "--lambdas", "0,0.5", "--out",
                      dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  const auto& best = summary["algorithms"][0]["best"];
  EXPECT_LT(best["final_mean"].get<double>(), 5.3183);
  EXPECT_EQ(best["diverged_runs"].get<std::size_t>(), 0u);
  EXPECT_EQ(summary["setting"], "baird");
}

TEST(Baird, RmspbeCurvesAreNonnegative) {
  const auto dir = scratch();
  const auto r = run({"baird", "--algorithms", "td0,tdc-mp", "--metric", "rmspbe", "--runs", "2",
                      "--steps", "200", "--alphas", "0.1", "--etas", "1", "--lambdas", "0.9",
                      "--raw", "all", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream raw(slurp(dir / "raw.csv"));
  std::string line;
  std::getline(raw, line);
  std::size_t rows = 0;
  while (std::getline(raw, line)) {
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GE(v, 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 2u * 2u * 200u);
}

TEST(Runtime, TableHasThirteenOnAndElevenOffPolicyRows) {
  const auto dir = scratch();
  const auto r = run({"runtime", "--mode", "table", "--steps", "20", "--mdps", "1", "--runs", "1",
                      "--repeats", "1", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream table(slurp(dir / "runtime_table.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "setting,algorithm,microseconds");
  std::size_t on = 0, off = 0;
  while (std::getline(table, line)) {
    if (line.rfind("on-policy,", 0) == 0) ++on;
    if (line.rfind("off-policy,", 0) == 0) ++off;
    EXPECT_EQ(line.find("off-policy,td,"), std::string::npos);
    EXPECT_EQ(line.find("off-policy,totd,"), std::string::npos);
  }
  EXPECT_EQ(on, 13u);
  EXPECT_EQ(off, 11u);
}

TEST(Runtime, BudgetWritesOneCurvePerAlgorithm) {
  const auto dir = scratch();
  const auto r = run({"runtime", "--mode", "budget", "--c-values", "0.02", "--iterations", "4",
                      "--mdps", "1", "--runs", "1", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "budget" / "c_0.02")) {
    ++files;
    EXPECT_EQ(count_lines(slurp(e.path())), 1u + 4u);
  }
  EXPECT_EQ(files, 13u);
}

TEST(Runtime, EmptyCListExitsTwo) {
  const auto dir = scratch();
  EXPECT_EQ(run({"runtime", "--mode", "budget", "--c-values", "", "--out", dir.string()}).code,
            kExitConfig);
  EXPECT_EQ(run({"runtime", "--mode", "budget", "--out", dir.string()}).code, kExitConfig);
  EXPECT_EQ(run({"runtime", "--mode", "sideways", "--out", dir.string()}).code, kExitConfig);
}

TEST(Report, EmptyDirectoryExitsThree) {
  const auto dir = scratch();
  EXPECT_EQ(run({"report", dir.string()}).code, kExitIo);
  EXPECT_EQ(run({"report", (dir / "absent").string()}).code, kExitIo);
}

TEST(Report, NamesBestParametersInStableOrder) {
  const auto dir = scratch();
  auto c = tiny_config();
  const auto cfg = write_config(dir, c);
  ASSERT_EQ(run({"sweep", cfg.string(), "--out", (dir / "results" / "b_second").string()}).code,
            kExitOk);
  c.grid = SweepGrid{{0.2}, {2.0}, {0.0}};
  const auto cfg2 = write_config(dir, c);
  ASSERT_EQ(run({"sweep", cfg2.string(), "--out", (dir / "results" / "a_first").string()}).code,
            kExitOk);
  const auto r = run({"report", (dir / "results").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto a = r.out.find("== a_first ==");
  const auto b = r.out.find("== b_second ==");
  ASSERT_NE(a, std::string::npos);
  ASSERT_NE(b, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_NE(r.out.find("gtd         0.2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("gtd         0.05"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(dir / "results" / "report" / "report.txt"), r.out);
  const auto long_rows = slurp(dir / "results" / "report" / "report_long.csv");
  // two sweeps x (10 curve points + 3 sensitivity points)
  EXPECT_EQ(count_lines(long_rows), 1u + 2u * 13u);
  const auto again = run({"report", (dir / "results").string()});
  EXPECT_EQ(again.out, r.out);
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({"sweep"}).code, kExitConfig);
}

}  // namespace
