#pragma once

// Monte Carlo laboratory: synthetic panels from the transformed factor model
// with known transforms, accuracy metrics, empirical size and power.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"
#include "tfm/glr.hpp"
#include "tfm/model.hpp"
#include "tfm/util.hpp"

namespace tfm::simlab {

using Transform = std::function<double(double)>;

// g1..g4 of the simulation design.
inline std::array<Transform, 4> true_transforms() {
  return {
      [](double x) { return std::sin(2.5 * std::numbers::pi * x); },
      [](double x) { return x * x * x; },
      [](double x) { return std::sin(0.5 * std::numbers::pi * x); },
      [](double x) {
        const double top = 1.0 / (1.0 + std::exp(-x)) - 0.5;
        const double bottom = 1.0 / (1.0 + std::exp(-1.0)) - 0.5;
        return top / bottom;
      },
  };
}

struct SimConfig {
  int n = 20;
  int T = 200;
  int p = 4;
  double rho = 1.0;  // g = rho * g_nonlinear + (1 - rho) * identity
  std::uint64_t seed = 1;
  int reps = 100;
  int B = 0;  // bootstrap size; 0 skips the test
  double level = 0.05;
  double alpha_mean = 3.0, alpha_sd = 0.5;
  double beta_mean = 3.5, beta_sd = 0.5;
  double noise_sd = 1.0;
  // Value every factor takes at the anchor row (row 0). Empty leaves row 0
  // random like the rest.
  std::optional<double> anchor_value = 0.9;
  bool evaluate_functions = true;
  int grid_points = 401;
  double grid_lo = -0.95, grid_hi = 0.95;
  model::TfmOptions model{};
  glr::BootstrapScheme scheme = glr::BootstrapScheme::Residual;
  bool pooled = false;
  int threads = 0;

  void validate() const {
    if (n < 1 || T < 2) throw Error(ErrorCode::InvalidArgument, "simulation needs n >= 1 and T >= 2");
    if (p < 1 || p > 4) throw Error(ErrorCode::InvalidArgument, "simulation supports 1 <= p <= 4");
    if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1]");
    if (B < 0) throw Error(ErrorCode::InvalidArgument, "B must be >= 0");
    if (!(noise_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sd must be >= 0");
    if (grid_points < 2 || !(grid_lo < grid_hi)) throw Error(ErrorCode::InvalidArgument, "bad quadrature grid");
    if (anchor_value && std::abs(*anchor_value) < 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "anchor_value must be non-zero");
    }
  }
};

inline double mixed_transform(const SimConfig& cfg, int k, double x) {
  static const auto g = true_transforms();
  return cfg.rho * g[static_cast<std::size_t>(k)](x) + (1.0 - cfg.rho) * x;
}

struct SimParameters {
  Eigen::VectorXd alpha;  // n
  Eigen::MatrixXd beta;   // n x p
};

namespace detail {

inline constexpr std::uint64_t kParamTag = 0x70617261ULL;
inline constexpr std::uint64_t kRepTag = 0x72657073ULL;
inline constexpr std::uint64_t kTestTag = 0x74657374ULL;

inline double draw_nonzero(std::mt19937_64& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  for (;;) {
    const double v = dist(rng);
    if (std::abs(v) > 1e-8) return v;
  }
}

}  // namespace detail

// alpha_j ~ N(alpha_mean, alpha_sd^2), beta_jk ~ N(beta_mean, beta_sd^2);
// drawn once per (seed, n, T) and shared by every replication and rho.
inline SimParameters draw_parameters(const SimConfig& cfg) {
  auto rng = make_stream(cfg.seed, {detail::kParamTag, static_cast<std::uint64_t>(cfg.n),
                                    static_cast<std::uint64_t>(cfg.T)});
  SimParameters out;
  out.alpha.resize(cfg.n);
  out.beta.resize(cfg.n, cfg.p);
  for (int j = 0; j < cfg.n; ++j) out.alpha(j) = detail::draw_nonzero(rng, cfg.alpha_mean, cfg.alpha_sd);
  for (int j = 0; j < cfg.n; ++j)
    for (int k = 0; k < cfg.p; ++k) out.beta(j, k) = detail::draw_nonzero(rng, cfg.beta_mean, cfg.beta_sd);
  return out;
}

// Truth in the parametrisation the estimator identifies: transforms scaled
// so g*_k(x_{a,k}) = x_{a,k}, loadings scaled inversely.
struct SimTruth {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd beta;             // as generated
  Eigen::VectorXd anchor;           // x_{a,k}
  Eigen::VectorXd scale;            // c_k = g_k(x_{a,k}) / x_{a,k}
  Eigen::MatrixXd beta_identified;  // beta_jk * c_k
  Eigen::MatrixXd g_values;         // T x p, g_k(x_tk) as generated

  double g_identified(const SimConfig& cfg, int k, double u) const {
    return mixed_transform(cfg, k, u) / scale(k);
  }
};

struct SimSample {
  PanelData panel;
  SimTruth truth;
};

inline SimSample simulate_panel(const SimConfig& cfg, int rep, const SimParameters& params) {
  cfg.validate();
  auto rng = make_stream(cfg.seed, {detail::kRepTag, static_cast<std::uint64_t>(cfg.n),
                                    static_cast<std::uint64_t>(cfg.T), static_cast<std::uint64_t>(rep)});
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Eigen::MatrixXd X(cfg.T, cfg.p);
  for (int t = 0; t < cfg.T; ++t)
    for (int k = 0; k < cfg.p; ++k) X(t, k) = unif(rng);
  if (cfg.anchor_value) X.row(0).setConstant(*cfg.anchor_value);

  SimTruth truth;
  truth.alpha = params.alpha;
  truth.beta = params.beta;
  truth.g_values.resize(cfg.T, cfg.p);
  for (int t = 0; t < cfg.T; ++t)
    for (int k = 0; k < cfg.p; ++k) truth.g_values(t, k) = mixed_transform(cfg, k, X(t, k));

  Eigen::MatrixXd R = truth.g_values * params.beta.transpose();
  R.rowwise() += params.alpha.transpose();
  for (int j = 0; j < cfg.n; ++j)
    for (int t = 0; t < cfg.T; ++t) R(t, j) += cfg.noise_sd * noise(rng);

  const auto anchor = model::resolve_anchor(X, cfg.model);
  truth.anchor = X.row(anchor).transpose();
  truth.scale.resize(cfg.p);
  for (int k = 0; k < cfg.p; ++k) truth.scale(k) = truth.g_values(anchor, k) / truth.anchor(k);
  truth.beta_identified = params.beta * truth.scale.asDiagonal();

  SimSample out{PanelData::make(std::move(R), std::move(X)), std::move(truth)};
  return out;
}

inline SimSample simulate_panel(const SimConfig& cfg, int rep) {
  return simulate_panel(cfg, rep, draw_parameters(cfg));
}

struct MetricEstimate {
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error over replications
};

inline MetricEstimate mean_and_se(const std::vector<double>& v) {
  MetricEstimate m;
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double s = 0.0;
  for (double x : v) s += x;
  m.value = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.value) * (x - m.value);
    m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

struct ArmseResult {
  MetricEstimate alpha;
  MetricEstimate beta;
};

// ARMSE_alpha = (1/n) sum_j alpha_j^-2 MSE(alpha_hat_j),
// ARMSE_beta  = (1/np) sum_jk beta_jk^-2 MSE(beta_hat_jk).
// beta_truths holds one truth per replication (the identified loadings may
// vary with the anchor) or a single entry shared by all.
inline ArmseResult armse(const std::vector<Eigen::VectorXd>& alpha_hats,
                         const std::vector<Eigen::MatrixXd>& beta_hats, const Eigen::VectorXd& alpha,
                         const std::vector<Eigen::MatrixXd>& beta_truths) {
  if (alpha_hats.size() != beta_hats.size() || alpha_hats.empty()) {
    throw Error(ErrorCode::InvalidArgument, "armse: need matching, non-empty estimate lists");
  }
  if (beta_truths.size() != 1 && beta_truths.size() != beta_hats.size()) {
    throw Error(ErrorCode::InvalidArgument, "armse: one beta truth or one per replication");
  }
  if ((alpha.array().abs() < 1e-12).any()) throw Error(ErrorCode::InvalidArgument, "armse: zero alpha truth");
  std::vector<double> va, vb;
  for (std::size_t r = 0; r < alpha_hats.size(); ++r) {
    const auto& bt = beta_truths.size() == 1 ? beta_truths[0] : beta_truths[r];
    if ((bt.array().abs() < 1e-12).any()) throw Error(ErrorCode::InvalidArgument, "armse: zero beta truth");
    va.push_back(((alpha_hats[r] - alpha).array() / alpha.array()).square().mean());
    vb.push_back(((beta_hats[r] - bt).array() / bt.array()).square().mean());
  }
  return {mean_and_se(va), mean_and_se(vb)};
}

inline std::vector<double> quadrature_grid(double lo, double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

inline double trapezoid(const std::vector<double>& grid, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (grid[i] - grid[i - 1]);
  return s;
}

// Integrated squared error of one estimated transform and the squared norm of
// the truth, both by trapezoid quadrature on grid.
struct IseTerm {
  double ise = 0.0;
  double norm = 0.0;
};

inline IseTerm integrated_error(const Transform& estimate, const Transform& truth,
                                const std::vector<double>& grid) {
  std::vector<double> err(grid.size()), sq(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = truth(grid[i]);
    const double d = estimate(grid[i]) - g;
    err[i] = d * d;
    sq[i] = g * g;
  }
  return {trapezoid(grid, err), trapezoid(grid, sq)};
}

// ARMISE = (1/p) sum_k MISE_k {int g_k^2}^(-exponent); terms is reps x p.
// The per-replication normalisation makes the estimate exact when the truth
// is shared and still meaningful when it varies with the anchor.
inline MetricEstimate armise_from_terms(const std::vector<std::vector<IseTerm>>& terms, double exponent) {
  std::vector<double> v;
  for (const auto& rep : terms) {
    double s = 0.0;
    for (const auto& t : rep) s += t.ise * std::pow(t.norm, -exponent);
    v.push_back(s / static_cast<double>(rep.size()));
  }
  return mean_and_se(v);
}

// Convenience form over evaluators: ghats[r][k] estimates truths[k].
inline MetricEstimate armise(const std::vector<std::vector<Transform>>& ghats,
                             const std::vector<Transform>& truths, const std::vector<double>& grid,
                             double exponent = 2.0) {
  std::vector<std::vector<IseTerm>> terms;
  for (const auto& rep : ghats) {
    if (rep.size() != truths.size()) throw Error(ErrorCode::InvalidArgument, "armise: shape mismatch");
    std::vector<IseTerm> row;
    for (std::size_t k = 0; k < rep.size(); ++k) row.push_back(integrated_error(rep[k], truths[k], grid));
    terms.push_back(std::move(row));
  }
  return armise_from_terms(terms, exponent);
}

struct RepRecord {
  int rep = 0;
  bool ok = false;
  std::string error;
  double alpha_rel_sq = 0.0;  // (1/n) sum_j ((alpha_hat - alpha)/alpha)^2
  double beta_rel_sq = 0.0;
  std::vector<IseTerm> ise;  // per factor, empty when functions are not evaluated
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool reject = false;
  int nonconverged_assets = 0;
};

struct SimReport {
  SimConfig config;
  MetricEstimate armse_alpha, armse_beta;
  MetricEstimate armise;          // literal exponent -2
  MetricEstimate armise_inverse;  // exponent -1
  MetricEstimate size_or_power;   // NaN when B == 0
  int reps_completed = 0;
  std::uint64_t seed = 0;
  std::vector<RepRecord> records;
};

inline RepRecord run_replication(const SimConfig& cfg, const SimParameters& params, int rep) {
  RepRecord rec;
  rec.rep = rep;
  try {
    const auto sample = simulate_panel(cfg, rep, params);
    const auto& truth = sample.truth;
    const auto fit = model::estimate(sample.panel, cfg.model);
    rec.alpha_rel_sq = ((fit.alpha_hat - truth.alpha).array() / truth.alpha.array()).square().mean();
    rec.beta_rel_sq = ((fit.beta_hat - truth.beta_identified).array() / truth.beta_identified.array()).square().mean();
    for (bool c : fit.converged) rec.nonconverged_assets += c ? 0 : 1;
    if (cfg.evaluate_functions) {
      const auto grid = quadrature_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points);
      for (int k = 0; k < cfg.p; ++k) {
        const auto& ev = fit.ghat[static_cast<std::size_t>(k)];
        rec.ise.push_back(integrated_error([&](double u) { return ev(u); },
                                           [&](double u) { return truth.g_identified(cfg, k, u); }, grid));
      }
    }
    if (cfg.B > 0) {
      glr::GlrOptions gopts;
      gopts.model = cfg.model;
      gopts.scheme = cfg.scheme;
      gopts.pooled = cfg.pooled;
      gopts.threads = 1;
      const std::uint64_t test_seed = make_stream(cfg.seed, {detail::kTestTag, static_cast<std::uint64_t>(rep)})();
      const auto result = glr::glr_test(sample.panel, cfg.B, cfg.level, test_seed, gopts);
      rec.lambda = result.lambda;
      rec.p_value = result.p_value;
      rec.reject = result.reject;
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

// Replications run in parallel; aggregation is in replication order.
inline SimReport run_mc(const SimConfig& cfg) {
  cfg.validate();
  const auto params = draw_parameters(cfg);
  SimReport report;
  report.config = cfg;
  report.seed = cfg.seed;
  report.records.resize(static_cast<std::size_t>(cfg.reps));
  parallel_for(report.records.size(), cfg.threads, [&](std::size_t r) {
    report.records[r] = run_replication(cfg, params, static_cast<int>(r));
  });

  std::vector<double> va, vb, rejections;
  std::vector<std::vector<IseTerm>> terms;
  for (const auto& rec : report.records) {
    if (!rec.ok) continue;
    ++report.reps_completed;
    va.push_back(rec.alpha_rel_sq);
    vb.push_back(rec.beta_rel_sq);
    if (!rec.ise.empty()) terms.push_back(rec.ise);
    if (cfg.B > 0) rejections.push_back(rec.reject ? 1.0 : 0.0);
  }
  report.armse_alpha = mean_and_se(va);
  report.armse_beta = mean_and_se(vb);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.armise = terms.empty() ? MetricEstimate{nan, nan} : armise_from_terms(terms, 2.0);
  report.armise_inverse = terms.empty() ? MetricEstimate{nan, nan} : armise_from_terms(terms, 1.0);
  if (cfg.B > 0 && !rejections.empty()) {
    const double rate = mean_and_se(rejections).value;
    report.size_or_power = {rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(rejections.size()))};
  } else {
    report.size_or_power = {nan, nan};
  }
  return report;
}

struct PowerPoint {
  double rho = 0.0;
  double rate = 0.0;
  double se = 0.0;
  int reps_completed = 0;
};

// Rejection rate of the bootstrap test at each rho. Replication r uses the
// same factor and noise draws at every rho.
inline std::vector<PowerPoint> power_curve(SimConfig base, const std::vector<double>& rho_grid, int reps,
                                           int B, double level = 0.05) {
  base.reps = reps;
  base.B = B;
  base.level = level;
  base.evaluate_functions = false;
  if (B < 1) throw Error(ErrorCode::InvalidArgument, "power curve needs B >= 1");
  std::vector<PowerPoint> out;
  for (double rho : rho_grid) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho grid must lie in [0, 1]");
    SimConfig cfg = base;
    cfg.rho = rho;
    const auto report = run_mc(cfg);
    out.push_back({rho, report.size_or_power.value, report.size_or_power.se, report.reps_completed});
  }
  return out;
}

}  // namespace tfm::simlab
