#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tfm/glr.hpp"
#include "tfm/simlab.hpp"

using namespace tfm;
using namespace tfm::glr;

namespace {

PanelData sim_panel(int n, int T, int p, double rho, std::uint64_t seed, int rep = 0) {
  simlab::SimConfig cfg;
  cfg.n = n;
  cfg.T = T;
  cfg.p = p;
  cfg.rho = rho;
  cfg.seed = seed;
  return simlab::simulate_panel(cfg, rep).panel;
}

}  // namespace

TEST(LambdaStat, Formula) {
  EXPECT_EQ(lambda_stat(3.0, 3.0, 5, 7), 0.0);
  EXPECT_DOUBLE_EQ(lambda_stat(2.0, 1.0, 2, 10), 10.0);
  EXPECT_LT(lambda_stat(1.0, 2.0, 2, 10), 0.0);
  try {
    lambda_stat(1.0, 0.0, 2, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveRSS1);
  }
}

TEST(AsymptoticMean, Formula) {
  EXPECT_NEAR(asymptotic_mean(20, 4, {}, smoothing::Bandwidth::make(0.3)), 200.0, 1e-12);
  EXPECT_NEAR(asymptotic_mean(20, 4, {}, smoothing::Bandwidth::make(0.6)), 100.0, 1e-12);
}

TEST(RssNull, HandInstance) {
  // T=5, n=1, p=1 against the 2x2 normal equations.
  Eigen::MatrixXd x(5, 1), r(5, 1);
  x << -1.0, 0.0, 1.0, 2.0, 3.0;
  r << 1.0, 2.0, 2.5, 5.0, 5.5;
  const auto nf = rss_null(PanelData::make(r, x));
  // Sxx = 10, Sxy = 12 about means (1, 3.2): slope 1.2, intercept 2.
  // Residuals (0.2, 0, -0.7, 0.6, -0.1).
  EXPECT_NEAR(nf.coefficients(0, 1), 1.2, 1e-12);
  EXPECT_NEAR(nf.coefficients(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(nf.rss0, 0.9, 1e-12);
}

TEST(RssNull, ExactLinearAndOrthogonality) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd f = oracle::uniform_matrix(60, 3, rng);
  const Eigen::MatrixXd coef = oracle::uniform_matrix(4, 5, rng);
  Eigen::MatrixXd D(60, 4);
  D << Eigen::VectorXd::Ones(60), f;
  const Eigen::MatrixXd exact = D * coef;
  EXPECT_LT(rss_null(PanelData::make(exact, f)).rss0, 1e-20);

  const Eigen::MatrixXd noisy = exact + oracle::uniform_matrix(60, 5, rng);
  const auto nf = rss_null(PanelData::make(noisy, f));
  const Eigen::MatrixXd inner = D.transpose() * nf.residuals;
  for (int j = 0; j < 5; ++j) EXPECT_LE(inner.col(j).cwiseAbs().maxCoeff(), 1e-8 * noisy.col(j).norm());
  EXPECT_LT((nf.coefficients.transpose() - oracle::ols(f, noisy)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RssNull, RankDeficientDesign) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd f = oracle::uniform_matrix(30, 2, rng);
  f.col(1) = f.col(0);
  try {
    rss_null(PanelData::make(Eigen::MatrixXd::Ones(30, 2), f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficientDesign);
  }
}

TEST(RssAlt, MatchesFitResiduals) {
  const auto panel = sim_panel(8, 150, 2, 1.0, 3);
  const auto fit = model::estimate(panel);
  EXPECT_NEAR(rss_alt(panel, fit), fit.residuals.squaredNorm(), 1e-10);
  EXPECT_NEAR(rss_alt(panel, fit), fit.rss1, 1e-10);
}

TEST(RssAlt, NearNoiseVarianceOnSimulatedPanels) {
  // The rule-of-thumb bandwidth oversmooths the fast sine at T = 200, so the
  // variance check uses cross-validated bandwidths.
  model::TfmOptions opts;
  opts.selection = model::BandwidthSelection::CrossValidated;
  double s = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const auto panel = sim_panel(20, 200, 4, 1.0, 4, r);
    s += model::estimate(panel, opts).rss1 / (20.0 * 200.0);
  }
  EXPECT_NEAR(s / reps, 1.0, 0.05);
}

TEST(Quantile, TypeOneAndLevelOne) {
  const std::vector<double> v{5.0, 1.0, 4.0, 2.0, 3.0};
  EXPECT_EQ(empirical_quantile(v, 1.0), 5.0);
  EXPECT_EQ(empirical_quantile(v, 0.0), 1.0);
  EXPECT_EQ(empirical_quantile(v, 0.2), 1.0);
  EXPECT_EQ(empirical_quantile(v, 0.21), 2.0);
  EXPECT_EQ(empirical_quantile(v, 0.95), 5.0);
  EXPECT_EQ(empirical_quantile(v, 0.8), 4.0);
}

TEST(PValue, ConventionAndMonotone) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(bootstrap_p_value(v, 10.0), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(bootstrap_p_value(v, 2.5), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(bootstrap_p_value(v, -1.0), 1.0);
  double prev = 2.0;
  for (double l = -2.0; l < 6.0; l += 0.25) {
    const double p = bootstrap_p_value(v, l);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(Bootstrap, BitDeterministicAcrossThreads) {
  const auto panel = sim_panel(6, 120, 2, 0.0, 5);
  GlrOptions one;
  one.threads = 1;
  GlrOptions four = one;
  four.threads = 4;
  const auto a = bootstrap_null(panel, 12, 99, one);
  const auto b = bootstrap_null(panel, 12, 99, one);
  const auto c = bootstrap_null(panel, 12, 99, four);
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(a[i], c[i]);
  }
  const auto d = bootstrap_null(panel, 1, 99, one);
  EXPECT_EQ(d[0], a[0]);
  const auto other = bootstrap_null(panel, 12, 100, one);
  EXPECT_NE(other[0], a[0]);
}

TEST(Bootstrap, SchemesRun) {
  const auto panel = sim_panel(6, 120, 2, 0.0, 6);
  for (auto scheme : {BootstrapScheme::Residual, BootstrapScheme::Wild}) {
    for (bool pooled : {false, true}) {
      GlrOptions o;
      o.scheme = scheme;
      o.pooled = pooled;
      const auto s = bootstrap_null(panel, 5, 7, o);
      for (double v : s) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Bootstrap, ZeroResidualsGiveDegenerateSample) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd f = oracle::uniform_matrix(80, 2, rng);
  Eigen::MatrixXd D(80, 3);
  D << Eigen::VectorXd::Ones(80), f;
  const Eigen::MatrixXd exact = D * oracle::uniform_matrix(3, 4, rng, 1.0, 3.0);
  const auto panel = PanelData::make(exact, f);
  std::vector<double> s;
  try {
    s = bootstrap_null(panel, 6, 1);
  } catch (const Error& e) {
    // Every replicate sits on the fitted surface; an exact zero RSS1 is the
    // only admissible failure.
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveRSS1);
    return;
  }
  for (double v : s) EXPECT_NEAR(v, s[0], 1e-6 * std::abs(s[0]));
}

TEST(GlrTest, ContractAndInvariants) {
  const auto panel = sim_panel(10, 150, 2, 1.0, 8);
  const auto r = glr_test(panel, 39, 0.05, 11);
  EXPECT_EQ(r.bootstrap_sample.size(), 39u);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
  EXPECT_GE(r.rss0, 0.0);
  EXPECT_GT(r.rss1, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, bootstrap_p_value(r.bootstrap_sample, r.lambda));
  EXPECT_EQ(r.critical_value, empirical_quantile(r.bootstrap_sample, 0.95));
  EXPECT_EQ(r.reject, r.lambda > r.critical_value);
  EXPECT_TRUE(r.reject);  // strongly nonlinear truth

  const auto all = glr_test(panel, 39, 1.0, 11);
  EXPECT_EQ(all.critical_value, *std::min_element(all.bootstrap_sample.begin(), all.bootstrap_sample.end()));

  EXPECT_THROW(glr_test(panel, 0, 0.05, 1), Error);
  EXPECT_THROW(glr_test(panel, 5, 0.0, 1), Error);
  EXPECT_THROW(glr_test(panel, 5, 1.5, 1), Error);
}

TEST(GlrTest, LambdaScaleAndPermutationInvariance) {
  const auto panel = sim_panel(8, 150, 3, 0.5, 9);
  const TfmEstimator est(panel.factors, {});
  auto lambda_of = [&](const PanelData& p) {
    return lambda_stat(rss_null(p).rss0, est.fit_core(p.returns).rss1, p.n(), p.T());
  };
  const double base = lambda_of(panel);
  auto scaled = panel;
  scaled.returns *= 0.01;
  EXPECT_NEAR(lambda_of(scaled), base, 1e-6 * std::abs(base));
  auto perm = panel;
  for (int j = 0; j < 8; ++j) perm.returns.col(j) = panel.returns.col(7 - j);
  EXPECT_NEAR(lambda_of(perm), base, 1e-6 * std::abs(base));
}
