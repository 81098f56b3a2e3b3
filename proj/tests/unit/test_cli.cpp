#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_support.hpp"
#include "tfm/cli.hpp"

using namespace tfm;
using testsupport::read_file;
using testsupport::scratch_dir;
using testsupport::write_file;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = 0;
  std::string out, err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tfm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Writes a simulated panel as returns.csv / factors.csv in dir.
void write_sim_csv(const fs::path& dir, int n, int T, int p, double rho, std::uint64_t seed) {
  simlab::SimConfig cfg;
  cfg.n = n;
  cfg.T = T;
  cfg.p = p;
  cfg.rho = rho;
  cfg.seed = seed;
  auto panel = simlab::simulate_panel(cfg, 0).panel;
  panel.fill_default_labels();
  dataio::write_panel(panel, dataio::sequential_dates(T), dir / "returns.csv", dir / "factors.csv");
}

std::map<std::string, std::string> key_values(const fs::path& path) {
  std::map<std::string, std::string> kv;
  const auto table = dataio::read_csv(path);
  for (const auto& row : table.rows) kv[row[0]] = row[1];
  return kv;
}

void expect_same_outputs(const fs::path& a, const fs::path& b) {
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "run_config.ini") continue;
    const auto rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(read_file(e.path()), read_file(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 0u);
}

}  // namespace

TEST(Cli, SimulateIsReproducible) {
  const auto dir = scratch_dir();
  const std::vector<std::string> base{"--seed", "7", "simulate", "--n", "5", "--T", "80", "--p", "2", "--reps", "3"};
  auto a = base, b = base;
  a.insert(a.begin(), {"--out-dir", (dir / "a").string()});
  b.insert(b.begin(), {"--out-dir", (dir / "b").string(), "--threads", "2"});
  const auto ra = run_cli(a), rb = run_cli(b);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(ra.out, "reps_completed 3\n");
  EXPECT_TRUE(fs::exists(dir / "a" / "sim_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "sim_replications.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "run_config.ini"));
  expect_same_outputs(dir / "a", dir / "b");
}

TEST(Cli, TestCommandWritesPValue) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 6, 120, 2, 1.0, 3);
  const auto r = run_cli({"--out-dir", (dir / "out").string(), "test", "--returns", (dir / "returns.csv").string(),
                          "--factors", (dir / "factors.csv").string(), "--B", "19"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(dir / "out" / "test_result.csv");
  const double p = std::stod(kv.at("p_value"));
  EXPECT_GT(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(kv.at("B"), "19");
  EXPECT_EQ(read_file(dir / "out" / "bootstrap_sample.csv").substr(0, 12), "b,lambda_sta");
}

TEST(Cli, MissingFileExitsOneAndNamesPath) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 3, 40, 1, 1.0, 4);
  const auto missing = (dir / "nowhere.csv").string();
  const auto r = run_cli({"--out-dir", (dir / "out").string(), "fit", "--returns", missing, "--factors",
                          (dir / "factors.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
  EXPECT_EQ(r.err.rfind("tfm: error: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ParseErrorsExitOne) {
  EXPECT_EQ(run_cli({"fit", "--no-such-flag"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"simulate", "--p", "abc"}).code, 1);
  EXPECT_EQ(run_cli({"--format", "xml", "simulate"}).code, 1);
  const auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
}

TEST(Cli, InvalidConfigurationExitsOne) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 3, 40, 1, 1.0, 5);
  const std::vector<std::string> data{"--returns", (dir / "returns.csv").string(), "--factors",
                                      (dir / "factors.csv").string()};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"--out-dir", (dir / "out").string(), "fit"};
    a.insert(a.end(), data.begin(), data.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return run_cli(a);
  };
  EXPECT_EQ(with({"--anchor", "999"}).code, 1);
  EXPECT_EQ(with({"--bandwidth", "zzz=0.3"}).code, 1);
  EXPECT_EQ(with({"--bandwidth", "1=-2"}).code, 1);
  EXPECT_EQ(with({"--bandwidth", "x1=0.3"}).code, 0);
}

TEST(Cli, NumericalFailureExitsTwo) {
  const auto dir = scratch_dir();
  write_file(dir / "returns.csv", "date,A\n");
  std::string r = "date,A\n", f = "date,F\n";
  for (int t = 0; t < 30; ++t) {
    r += std::to_string(20200101 + t) + "," + std::to_string(t % 7) + "\n";
    f += std::to_string(20200101 + t) + ",0.5\n";
  }
  write_file(dir / "returns.csv", r);
  write_file(dir / "factors.csv", f);
  const auto res = run_cli({"--out-dir", (dir / "out").string(), "fit", "--returns", (dir / "returns.csv").string(),
                            "--factors", (dir / "factors.csv").string()});
  EXPECT_EQ(res.code, 2) << res.err;
}

TEST(Cli, ConfigReplayReproducesOutputs) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 5, 100, 2, 1.0, 6);
  const auto first = run_cli({"--out-dir", (dir / "a").string(), "--seed", "3", "fit", "--returns",
                              (dir / "returns.csv").string(), "--factors", (dir / "factors.csv").string(),
                              "--bandwidth", "2=0.45", "--anchor", "5", "--grid-points", "31"});
  ASSERT_EQ(first.code, 0) << first.err;
  const auto ini = read_file(dir / "a" / "run_config.ini");
  EXPECT_NE(ini.find("[fit]"), std::string::npos) << ini;
  EXPECT_NE(ini.find("anchor=\"5\""), std::string::npos) << ini;
  const auto replay = run_cli({"--config", (dir / "a" / "run_config.ini").string(), "--out-dir", (dir / "b").string()});
  ASSERT_EQ(replay.code, 0) << replay.err;
  expect_same_outputs(dir / "a", dir / "b");

  const auto sim = run_cli({"--out-dir", (dir / "c").string(), "power", "--n", "4", "--T", "80", "--p", "1",
                            "--reps", "2", "--B", "9", "--rho-grid", "0,1"});
  ASSERT_EQ(sim.code, 0) << sim.err;
  const auto sim_replay =
      run_cli({"--config", (dir / "c" / "run_config.ini").string(), "--out-dir", (dir / "d").string()});
  ASSERT_EQ(sim_replay.code, 0) << sim_replay.err;
  expect_same_outputs(dir / "c", dir / "d");
}

TEST(Cli, DiagnoseAndCvOnSyntheticFiles) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 8, 150, 2, 1.0, 7);
  const std::vector<std::string> data{"--returns", (dir / "returns.csv").string(), "--factors",
                                      (dir / "factors.csv").string()};
  std::vector<std::string> diag{"--out-dir", (dir / "diag").string(), "diagnose"};
  diag.insert(diag.end(), data.begin(), data.end());
  const auto d = run_cli(diag);
  ASSERT_EQ(d.code, 0) << d.err;
  for (const char* f : {"ols_coefficients.csv", "zeta_hat.csv", "fit_summary.csv", "plots/manifest.csv",
                        "plots/zeta_x1.csv", "plots/zeta_x2.csv", "plots/ghat_x1.csv", "plots/coefficients.csv"})
    EXPECT_TRUE(fs::exists(dir / "diag" / f)) << f;

  std::vector<std::string> cv{"--out-dir", (dir / "cv").string(), "cv", "--horizon", "5"};
  cv.insert(cv.end(), data.begin(), data.end());
  const auto c = run_cli(cv);
  ASSERT_EQ(c.code, 0) << c.err;
  const auto kv = key_values(dir / "cv" / "cv_result.csv");
  EXPECT_EQ(kv.at("horizon"), "5");
  EXPECT_GT(std::stod(kv.at("ratio")), 0.0);
  EXPECT_EQ(dataio::read_csv(dir / "cv" / "cv_days.csv").rows.size(), 5u);

  std::vector<std::string> late{"--out-dir", (dir / "cv2").string(), "cv", "--horizon", "5", "--anchor", "148"};
  late.insert(late.end(), data.begin(), data.end());
  EXPECT_EQ(run_cli(late).code, 1);
}

TEST(Cli, JsonFormat) {
  const auto dir = scratch_dir();
  write_sim_csv(dir, 4, 80, 2, 1.0, 8);
  const auto r = run_cli({"--out-dir", (dir / "out").string(), "--format", "structured-text", "fit", "--returns",
                          (dir / "returns.csv").string(), "--factors", (dir / "factors.csv").string(),
                          "--bandwidth-selection", "cv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(dir / "out" / "fit.json"));
  EXPECT_EQ(j["assets"].size(), 4u);
  EXPECT_EQ(j["factors"].size(), 2u);
  EXPECT_EQ(j["factors"][0]["bandwidth_origin"], "cross-validated");
}
