#pragma once

// Generalised likelihood ratio test of H0: g_k(x) = x for every factor,
// calibrated by a bootstrap under the fitted linear null.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"
#include "tfm/model.hpp"
#include "tfm/smoothing.hpp"
#include "tfm/util.hpp"

namespace tfm::glr {

using model::TfmEstimator;
using model::TfmFit;
using model::TfmOptions;

struct NullFit {
  double rss0 = 0.0;
  Eigen::MatrixXd coefficients;  // n x (p+1): intercept then slopes
  Eigen::MatrixXd fitted;        // T x n
  Eigen::MatrixXd residuals;     // T x n
};

// Per-asset OLS of returns on [1, x_1, ..., x_p].
inline NullFit rss_null(const PanelData& panel) {
  panel.validate();
  const LeastSquares ls(with_intercept(panel.factors));
  auto lf = ls.fit(panel.returns);
  NullFit out;
  out.rss0 = lf.residuals.squaredNorm();
  out.coefficients = lf.coefficients.transpose();
  out.fitted = std::move(lf.fitted);
  out.residuals = std::move(lf.residuals);
  return out;
}

// sum_j sum_t (r_tj - alpha_j - sum_k beta_jk gbar_k(x_tk))^2
inline double rss_alt(const PanelData& panel, const TfmFit& fit) {
  const Eigen::MatrixXd resid =
      (panel.returns.rowwise() - fit.alpha_hat.transpose()) - fit.gbar * fit.beta_hat.transpose();
  return resid.squaredNorm();
}

// (nT/2)(RSS0 - RSS1)/RSS1, not truncated at zero.
inline double lambda_stat(double rss0, double rss1, Eigen::Index n, Eigen::Index T) {
  if (!(rss1 > 0.0)) {
    throw Error(ErrorCode::NonPositiveRSS1, "RSS1 must be positive, got " + std::to_string(rss1));
  }
  const double nT = static_cast<double>(n) * static_cast<double>(T);
  return 0.5 * nT * (rss0 - rss1) / rss1;
}

// Leading term n p K(0) / h of the null mean of lambda.
inline double asymptotic_mean(Eigen::Index n, Eigen::Index p, smoothing::KernelSpec spec,
                              const smoothing::Bandwidth& h) {
  if (!(h.value > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  return static_cast<double>(n) * static_cast<double>(p) * smoothing::kernel_at_zero(spec) / h.value;
}

enum class BootstrapScheme { Residual, Wild };

inline std::string to_string(BootstrapScheme s) { return s == BootstrapScheme::Wild ? "wild" : "residual"; }

struct GlrOptions {
  TfmOptions model{};
  BootstrapScheme scheme = BootstrapScheme::Residual;
  bool pooled = false;  // residual scheme: resample from all assets' residuals
  int threads = 0;      // 0 = hardware concurrency
  int max_retries = 3;
};

struct TestResult {
  double lambda = 0.0;
  double rss0 = 0.0;
  double rss1 = 0.0;
  std::vector<double> bootstrap_sample;
  double critical_value = 0.0;
  double p_value = 1.0;
  double level = 0.05;
  std::uint64_t seed = 0;
  int B = 0;
  bool reject = false;
  int redraws = 0;
};

// Type-1 empirical quantile: the smallest sample value with ECDF >= prob.
inline double empirical_quantile(std::vector<double> sample, double prob) {
  if (sample.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = std::ceil(prob * static_cast<double>(sample.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos - 1.0, 0.0, static_cast<double>(sample.size() - 1)));
  return sample[idx];
}

// (1 + #{lambda*_b >= lambda}) / (B + 1)
inline double bootstrap_p_value(const std::vector<double>& sample, double lambda) {
  const auto count = std::count_if(sample.begin(), sample.end(), [&](double v) { return v >= lambda; });
  return (1.0 + static_cast<double>(count)) / (static_cast<double>(sample.size()) + 1.0);
}

namespace detail {

struct BootstrapSetup {
  NullFit null;
  Eigen::MatrixXd centred;  // residuals with per-asset mean removed
  LeastSquares ls;
  TfmEstimator estimator;

  BootstrapSetup(const PanelData& panel, const GlrOptions& opts)
      : null(rss_null(panel)),
        ls(with_intercept(panel.factors)),
        estimator(panel.factors, model::resolve_bandwidths(panel, opts.model)) {
    centred = null.residuals.rowwise() - null.residuals.colwise().mean();
  }
};

inline Eigen::MatrixXd draw_errors(const BootstrapSetup& setup, const GlrOptions& opts,
                                   std::mt19937_64& rng) {
  const Eigen::MatrixXd& E = opts.scheme == BootstrapScheme::Wild ? setup.null.residuals : setup.centred;
  const Eigen::Index T = E.rows();
  const Eigen::Index n = E.cols();
  Eigen::MatrixXd out(T, n);
  if (opts.scheme == BootstrapScheme::Wild) {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index t = 0; t < T; ++t) out(t, j) = coin(rng) ? E(t, j) : -E(t, j);
  } else if (opts.pooled) {
    std::uniform_int_distribution<Eigen::Index> pick(0, T * n - 1);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index t = 0; t < T; ++t) out(t, j) = E.data()[pick(rng)];
  } else {
    std::uniform_int_distribution<Eigen::Index> pick(0, T - 1);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index t = 0; t < T; ++t) out(t, j) = E(pick(rng), j);
  }
  return out;
}

struct Replicate {
  double lambda = 0.0;
  int redraws = 0;
};

inline Replicate run_replicate(const BootstrapSetup& setup, const GlrOptions& opts, std::uint64_t seed,
                               std::size_t b) {
  const Eigen::Index T = setup.null.fitted.rows();
  const Eigen::Index n = setup.null.fitted.cols();
  for (int attempt = 0;; ++attempt) {
    auto rng = make_stream(seed, {0x62'6f'6f'74ULL, static_cast<std::uint64_t>(b),
                                  static_cast<std::uint64_t>(attempt)});
    const Eigen::MatrixXd star = setup.null.fitted + draw_errors(setup, opts, rng);
    try {
      const double rss0 = setup.ls.fit(star).residuals.squaredNorm();
      const auto core = setup.estimator.fit_core(star);
      return {lambda_stat(rss0, core.rss1, n, T), attempt};
    } catch (const Error&) {
      if (attempt >= opts.max_retries) throw;
    }
  }
}

}  // namespace detail

struct BootstrapOutcome {
  std::vector<double> sample;
  int redraws = 0;
};

inline BootstrapOutcome bootstrap_null_detailed(const PanelData& panel, int B, std::uint64_t seed,
                                                const GlrOptions& opts = {}) {
  if (B < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap size B must be >= 1");
  panel.validate();
  const detail::BootstrapSetup setup(panel, opts);
  std::vector<detail::Replicate> reps(static_cast<std::size_t>(B));
  parallel_for(reps.size(), opts.threads,
               [&](std::size_t b) { reps[b] = detail::run_replicate(setup, opts, seed, b); });
  BootstrapOutcome out;
  for (const auto& r : reps) {
    out.sample.push_back(r.lambda);
    out.redraws += r.redraws;
  }
  return out;
}

// B values of lambda* computed on panels r* = null fit + resampled residuals.
inline std::vector<double> bootstrap_null(const PanelData& panel, int B, std::uint64_t seed,
                                          const GlrOptions& opts = {}) {
  return bootstrap_null_detailed(panel, B, seed, opts).sample;
}

inline TestResult glr_test(const PanelData& panel, int B, double level, std::uint64_t seed,
                           const GlrOptions& opts = {}) {
  if (!(level > 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1]");
  }
  panel.validate();
  TestResult result;
  result.level = level;
  result.seed = seed;
  result.B = B;
  result.rss0 = rss_null(panel).rss0;
  // Bandwidths chosen on the observed panel are reused by every replicate.
  GlrOptions resolved = opts;
  resolved.model = model::resolve_bandwidths(panel, opts.model);
  const TfmEstimator estimator(panel.factors, resolved.model);
  result.rss1 = estimator.fit_core(panel.returns).rss1;
  result.lambda = lambda_stat(result.rss0, result.rss1, panel.n(), panel.T());
  auto boot = bootstrap_null_detailed(panel, B, seed, resolved);
  result.bootstrap_sample = std::move(boot.sample);
  result.redraws = boot.redraws;
  result.critical_value = empirical_quantile(result.bootstrap_sample, 1.0 - level);
  result.p_value = bootstrap_p_value(result.bootstrap_sample, result.lambda);
  result.reject = result.lambda > result.critical_value;
  return result;
}

}  // namespace tfm::glr
