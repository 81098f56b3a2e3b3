#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tfm/dataio.hpp"
#include "tfm/simlab.hpp"

using namespace tfm;
using namespace tfm::dataio;
using testsupport::read_file;
using testsupport::scratch_dir;
using testsupport::write_file;

namespace {

DatasetManifest manifest_for(const std::filesystem::path& dir) {
  DatasetManifest m;
  m.returns_path = dir / "returns.csv";
  m.factors_path = dir / "factors.csv";
  return m;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no tfm::Error thrown";
  return ErrorCode::InvalidArgument;
}

PanelData sim(int n, int T, int p, double rho, double noise, std::uint64_t seed) {
  simlab::SimConfig cfg;
  cfg.n = n;
  cfg.T = T;
  cfg.p = p;
  cfg.rho = rho;
  cfg.noise_sd = noise;
  cfg.seed = seed;
  return simlab::simulate_panel(cfg, 0).panel;
}

}  // namespace

TEST(Parsing, DatesAndFields) {
  EXPECT_EQ(normalize_date("20200131").value(), "20200131");
  EXPECT_EQ(normalize_date(" 199001 ").value(), "199001");
  EXPECT_EQ(normalize_date("2020-01-31").value(), "20200131");
  EXPECT_FALSE(normalize_date("2020").has_value());
  EXPECT_FALSE(normalize_date("Annual").has_value());
  EXPECT_FALSE(normalize_date("2020013a").has_value());
  const auto f = split_csv_line(R"(a, "b,c" ,d)");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "b,c");
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(LoadPanel, InnerJoinOfTwoFiles) {
  const auto dir = scratch_dir();
  write_file(dir / "returns.csv", "date,A,B\n20200103,5,6\n20200101,1,2\n20200102,3,4\n20200104,7,8\n");
  write_file(dir / "factors.csv", "date,F\n20200101,0.1\n20200102,0.2\n20200103,0.3\n");
  const auto loaded = load_panel(manifest_for(dir));
  EXPECT_EQ(loaded.panel.T(), 3);
  EXPECT_EQ(loaded.panel.n(), 2);
  EXPECT_EQ(loaded.panel.p(), 1);
  EXPECT_EQ(loaded.dates, (std::vector<std::string>{"20200101", "20200102", "20200103"}));
  EXPECT_EQ(loaded.panel.returns(2, 1), 6.0);
  EXPECT_EQ(loaded.panel.factors(1, 0), 0.2);
  EXPECT_EQ(loaded.panel.asset_labels, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(loaded.report.returns_rows, 4);
  EXPECT_EQ(loaded.report.joined_rows, 3);
  EXPECT_EQ(loaded.report.dropped_rows, 0);
}

TEST(LoadPanel, MissingCellDropsRowAndReports) {
  const auto dir = scratch_dir();
  write_file(dir / "returns.csv", "date,A,B\n20200101,1,2\n20200102,,4\n20200103,5,-99.99\n20200104,7,8\n");
  write_file(dir / "factors.csv", "date,F\n20200101,0.1\n20200102,0.2\n20200103,0.3\n20200104,NA\n");
  auto m = manifest_for(dir);
  const auto loaded = load_panel(m);
  EXPECT_EQ(loaded.panel.T(), 1);
  EXPECT_EQ(loaded.report.dropped_rows, 3);
  EXPECT_EQ(loaded.report.dropped_dates, (std::vector<std::string>{"20200102", "20200103", "20200104"}));
  m.missing_policy = MissingPolicy::Error;
  EXPECT_EQ(code_of([&] { load_panel(m); }), ErrorCode::ParseError);
}

TEST(LoadPanel, DisjointDatesAndAllMissing) {
  const auto dir = scratch_dir();
  write_file(dir / "returns.csv", "date,A\n20200101,1\n20200102,2\n");
  write_file(dir / "factors.csv", "date,F\n20210101,1\n20210102,2\n");
  EXPECT_EQ(code_of([&] { load_panel(manifest_for(dir)); }), ErrorCode::EmptyIntersection);
  write_file(dir / "factors.csv", "date,F\n20200101,NA\n20200102,\n");
  EXPECT_EQ(code_of([&] { load_panel(manifest_for(dir)); }), ErrorCode::EmptyIntersection);
}

TEST(LoadPanel, ParseErrorsNameTheLine) {
  const auto dir = scratch_dir();
  write_file(dir / "factors.csv", "date,F\n20200101,1\n20200102,2\n");
  write_file(dir / "returns.csv", "date,A,B\n20200101,1,2\n20200102,3\n");
  try {
    load_panel(manifest_for(dir));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  write_file(dir / "returns.csv", "date,A\n20200101,1\n20200102,abc\n");
  try {
    load_panel(manifest_for(dir));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
  write_file(dir / "returns.csv", "date,A\n20200101,1\n20200101,2\n");
  EXPECT_EQ(code_of([&] { load_panel(manifest_for(dir)); }), ErrorCode::ParseError);
  write_file(dir / "returns.csv", "date,A\nyesterday,1\n");
  EXPECT_EQ(code_of([&] { load_panel(manifest_for(dir)); }), ErrorCode::ParseError);
}

TEST(LoadPanel, MissingFileNamesThePath) {
  const auto dir = scratch_dir();
  write_file(dir / "factors.csv", "date,F\n20200101,1\n");
  try {
    load_panel(manifest_for(dir));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find("returns.csv"), std::string::npos);
  }
}

TEST(LoadPanel, PreambleAndTrailingSections) {
  const auto dir = scratch_dir();
  write_file(dir / "factors.csv",
             "This file was created using a research database.\r\n"
             "Missing data are indicated by -99.99.\r\n\r\n"
             ",Mkt-RF,SMB\r\n"
             "199001,  -7.58,  1.21\r\n"
             "199002,   1.29,  1.05\r\n"
             "199003,   1.83, -0.47\r\n\r\n"
             " Annual Factors: January-December \r\n"
             ",Mkt-RF,SMB\r\n"
             "1990, -13.8, -13.5\r\n");
  write_file(dir / "returns.csv",
             "Average Value Weighted Returns -- Monthly\n"
             ",Lo,Hi\n"
             "199001,1.0,2.0\n"
             "199002,3.0,4.0\n"
             "199003,5.0,6.0\n"
             "\n"
             "Average Equal Weighted Returns -- Monthly\n"
             ",Lo,Hi\n"
             "199001,9,9\n");
  auto m = manifest_for(dir);
  m.skip_preamble = true;
  const auto loaded = load_panel(m);
  EXPECT_EQ(loaded.panel.T(), 3);
  EXPECT_EQ(loaded.panel.factor_labels, (std::vector<std::string>{"Mkt-RF", "SMB"}));
  EXPECT_EQ(loaded.panel.factors(0, 0), -7.58);
  EXPECT_EQ(loaded.panel.returns(2, 1), 6.0);

  m.factor_columns = {"SMB"};
  m.asset_columns = {"Hi"};
  const auto sub = load_panel(m);
  EXPECT_EQ(sub.panel.p(), 1);
  EXPECT_EQ(sub.panel.factors(2, 0), -0.47);
  m.factor_columns = {"HML"};
  EXPECT_EQ(code_of([&] { load_panel(m); }), ErrorCode::ParseError);
}

TEST(LoadPanel, IsoAndCompactDatesJoin) {
  const auto dir = scratch_dir();
  write_file(dir / "returns.csv", "day,A\n2020-01-02,1\n2020-01-03,2\n");
  write_file(dir / "factors.csv", "when,F\n20200102,1\n20200103,2\n");
  const auto loaded = load_panel(manifest_for(dir));
  EXPECT_EQ(loaded.panel.T(), 2);
  auto m = manifest_for(dir);
  m.date_column = "nope";
  EXPECT_EQ(code_of([&] { load_panel(m); }), ErrorCode::ParseError);
}

TEST(WritePanel, RoundTripIsExact) {
  const auto dir = scratch_dir();
  auto panel = sim(3, 25, 2, 1.0, 1.0, 4);
  panel.fill_default_labels();
  write_panel(panel, sequential_dates(panel.T()), dir / "returns.csv", dir / "factors.csv");
  const auto loaded = load_panel(manifest_for(dir));
  EXPECT_EQ((loaded.panel.returns - panel.returns).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((loaded.panel.factors - panel.factors).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(loaded.panel.asset_labels, panel.asset_labels);
  EXPECT_EQ(loaded.dates, sequential_dates(25));
}

TEST(Fftfm, MatchesOracleOnTinyPanel) {
  Eigen::MatrixXd x(4, 1), r(4, 1);
  x << 0.1, -0.3, 0.5, 0.2;
  r << 1.0, 0.4, 2.1, 1.5;
  const auto coef = fftfm_fit(PanelData::make(r, x));
  const Eigen::MatrixXd ref = oracle::ols(x, r);  // (p+1) x n
  EXPECT_LT((coef.transpose() - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fftfm, ExactAndOrthogonal) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd f = oracle::uniform_matrix(50, 2, rng);
  const Eigen::MatrixXd coef = oracle::uniform_matrix(3, 3, rng);
  Eigen::MatrixXd D(50, 3);
  D << Eigen::VectorXd::Ones(50), f;
  const Eigen::MatrixXd r = D * coef;
  EXPECT_LT((fftfm_fit(PanelData::make(r, f)).transpose() - coef).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::MatrixXd noisy = r + oracle::uniform_matrix(50, 3, rng);
  const Eigen::MatrixXd c = fftfm_fit(PanelData::make(noisy, f));
  const Eigen::MatrixXd resid = noisy - D * c.transpose();
  EXPECT_LT((D.transpose() * resid).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DiagnoseZeta, ExactInversionWithoutNoise) {
  std::mt19937_64 rng(10);
  const int n = 6, T = 40, p = 3;
  const Eigen::MatrixXd X = oracle::uniform_matrix(T, p, rng);
  const Eigen::MatrixXd B = oracle::uniform_matrix(n, p, rng, 1.0, 3.0);
  const Eigen::VectorXd a = oracle::uniform_matrix(n, 1, rng);
  Eigen::MatrixXd R = X * B.transpose();
  R.rowwise() += a.transpose();
  Eigen::MatrixXd ols(n, p + 1);
  ols << a, B;
  const auto d = diagnose_zeta(PanelData::make(R, X), ols);
  EXPECT_LT((d.zeta - X).cwiseAbs().maxCoeff(), 1e-8);
  ASSERT_EQ(d.smoothed_curves.size(), 3u);
  // zeta equals x, so the smoothed curve reproduces the identity
  for (const auto& c : d.smoothed_curves)
    for (std::size_t i = 0; i < c.u.size(); ++i) EXPECT_NEAR(c.value[i], c.u[i], 1e-8);
}

TEST(DiagnoseZeta, TracksNonlinearTransform) {
  simlab::SimConfig cfg;
  cfg.n = 20;
  cfg.T = 400;
  cfg.p = 1;
  cfg.noise_sd = 0.2;
  cfg.seed = 11;
  // p = 1 uses g1, a sine; take the cube by overriding the returns
  auto s = simlab::simulate_panel(cfg, 0);
  const Eigen::VectorXd cube = s.panel.factors.col(0).array().cube();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 0.2);
  for (int t = 0; t < cfg.T; ++t)
    for (int j = 0; j < cfg.n; ++j) s.panel.returns(t, j) = s.truth.alpha(j) + s.truth.beta(j, 0) * cube(t) + nd(rng);
  const auto d = diagnose_zeta(s.panel, fftfm_fit(s.panel));
  const Eigen::VectorXd z = d.zeta.col(0);
  const double corr = ((z.array() - z.mean()) * (cube.array() - cube.mean())).sum() /
                      std::sqrt((z.array() - z.mean()).square().sum() * (cube.array() - cube.mean()).square().sum());
  EXPECT_GT(corr, 0.98);
  // The smoothed curve bends like the cube: steeper at the ends than the middle
  const auto& c = d.smoothed_curves[0];
  ASSERT_GE(c.u.size(), 50u);
  const std::size_t m = c.u.size() / 2, e = c.u.size() - 5;
  const double mid_slope = (c.value[m + 3] - c.value[m - 3]) / (c.u[m + 3] - c.u[m - 3]);
  const double end_slope = (c.value[e] - c.value[e - 6]) / (c.u[e] - c.u[e - 6]);
  EXPECT_GT(end_slope, 2.0 * mid_slope);
}

TEST(DiagnoseZeta, TooFewAssets) {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd X = oracle::uniform_matrix(30, 3, rng);
  const Eigen::MatrixXd R = oracle::uniform_matrix(30, 2, rng);
  Eigen::MatrixXd ols = oracle::uniform_matrix(2, 4, rng);
  EXPECT_EQ(code_of([&] { diagnose_zeta(PanelData::make(R, X), ols); }), ErrorCode::RankDeficientLoadings);
  const Eigen::MatrixXd R4 = oracle::uniform_matrix(30, 4, rng);
  Eigen::MatrixXd ols4 = oracle::uniform_matrix(4, 4, rng);
  ols4.col(3) = ols4.col(2);
  EXPECT_EQ(code_of([&] { diagnose_zeta(PanelData::make(R4, X), ols4); }), ErrorCode::RankDeficientLoadings);
}

TEST(CvCompare, NoiseFreeLinearIsDegenerate) {
  const auto panel = sim(5, 120, 2, 0.0, 0.0, 14);
  CvOptions o;
  o.horizon = 10;
  const auto r = cv_compare(panel, o);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.ratio, 1.0);
  EXPECT_LT(r.cv_fftfm, 1e-10);
  EXPECT_EQ(r.days.size(), 10u);
  EXPECT_EQ(r.days.front(), 110);
}

TEST(CvCompare, NonlinearTruthFavoursTransforms) {
  const auto panel = sim(20, 800, 4, 1.0, 1.0, 15);
  const auto r = cv_compare(panel);
  EXPECT_FALSE(r.degenerate);
  EXPECT_GT(r.ratio, 1.0);
  EXPECT_NEAR(r.ratio, r.cv_fftfm / r.cv_tfm, 1e-15);
}

TEST(CvCompare, UsesOnlyEarlierRows) {
  const auto panel = sim(4, 100, 1, 1.0, 1.0, 16);
  CvOptions o;
  o.horizon = 6;
  o.threads = 2;
  const auto base = cv_compare(panel, o);
  auto perturbed = panel;
  const Eigen::Index day = base.days[2];
  perturbed.returns.row(day).array() += 50.0;
  const auto moved = cv_compare(perturbed, o);
  for (int i = 0; i <= 2; ++i) {
    EXPECT_EQ((moved.pred_tfm.row(i) - base.pred_tfm.row(i)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((moved.pred_fftfm.row(i) - base.pred_fftfm.row(i)).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_GT((moved.pred_fftfm.row(3) - base.pred_fftfm.row(3)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((moved.pred_tfm.row(3) - base.pred_tfm.row(3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(CvCompare, InsufficientHistory) {
  const auto panel = sim(3, 40, 1, 1.0, 1.0, 17);
  EXPECT_EQ(code_of([&] { cv_compare(panel); }), ErrorCode::InsufficientHistory);
  CvOptions o;
  o.horizon = 0;
  EXPECT_EQ(code_of([&] { cv_compare(panel, o); }), ErrorCode::InvalidArgument);
}

TEST(PlotData, EmptyWritesManifestOnly) {
  const auto dir = scratch_dir();
  const auto written = emit_plot_data({}, dir / "plots");
  ASSERT_EQ(written.size(), 1u);
  EXPECT_EQ(read_file(dir / "plots" / "manifest.csv"), "file,rows,columns,description\n");
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir / "plots"), {}), 1);
}

TEST(PlotData, OneFilePerFactorAndStableBytes) {
  const auto dir = scratch_dir();
  auto panel = sim(6, 150, 3, 1.0, 1.0, 18);
  panel.factor_labels = {"Mkt-RF", "SMB", "HML"};
  const auto fit = model::estimate(panel);
  auto series = ghat_series(fit, 21);
  series.push_back(coefficient_series(fit));
  const auto a = emit_plot_data(series, dir / "a");
  const auto b = emit_plot_data(series, dir / "b");
  ASSERT_EQ(a.size(), 5u);
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "ghat_Mkt-RF.csv"));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(read_file(a[i]), read_file(b[i]));
  const auto manifest = read_file(dir / "a" / "manifest.csv");
  EXPECT_NE(manifest.find("ghat_SMB.csv,21,3,"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("coefficients.csv,6,5,"), std::string::npos) << manifest;
  const auto coef = read_file(dir / "a" / "coefficients.csv");
  EXPECT_EQ(coef.substr(0, coef.find('\n')), "asset,alpha,beta_Mkt-RF,beta_SMB,beta_HML");
}
