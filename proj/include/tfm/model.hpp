#pragma once

// Transformed factor model
//
//   r_tj = alpha_j + sum_k beta_jk g_k(x_tk) + e_tj,
//
// identified by g_k(x_{a,k}) = x_{a,k} at an anchor observation a. Estimation
// backfits every asset, aggregates the per-asset component fits into common
// transforms at the observation points, re-smooths those into evaluators and
// finally regresses the de-meaned returns on the aggregated transforms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfm/backfitting.hpp"
#include "tfm/error.hpp"
#include "tfm/smoothing.hpp"
#include "tfm/util.hpp"

namespace tfm {

struct PanelData {
  Eigen::MatrixXd returns;  // T x n
  Eigen::MatrixXd factors;  // T x p
  std::vector<std::string> asset_labels;
  std::vector<std::string> factor_labels;

  Eigen::Index T() const { return returns.rows(); }
  Eigen::Index n() const { return returns.cols(); }
  Eigen::Index p() const { return factors.cols(); }

  static PanelData make(Eigen::MatrixXd returns, Eigen::MatrixXd factors) {
    PanelData panel{std::move(returns), std::move(factors), {}, {}};
    panel.fill_default_labels();
    return panel;
  }

  void fill_default_labels() {
    if (asset_labels.empty())
      for (Eigen::Index j = 0; j < n(); ++j) asset_labels.push_back("asset" + std::to_string(j + 1));
    if (factor_labels.empty())
      for (Eigen::Index k = 0; k < p(); ++k) factor_labels.push_back("x" + std::to_string(k + 1));
  }

  void validate() const {
    if (returns.rows() != factors.rows()) {
      throw Error(ErrorCode::InvalidArgument, "returns and factors have different row counts");
    }
    if (T() < 2) throw Error(ErrorCode::InvalidArgument, "panel needs T >= 2");
    if (n() < 1) throw Error(ErrorCode::InvalidArgument, "panel needs at least one asset");
    if (p() < 1) throw Error(ErrorCode::InvalidArgument, "panel needs at least one factor");
    if (!returns.allFinite()) throw Error(ErrorCode::NonFinite, "returns contain non-finite values");
    if (!factors.allFinite()) throw Error(ErrorCode::NonFinite, "factors contain non-finite values");
    if (!asset_labels.empty() && static_cast<Eigen::Index>(asset_labels.size()) != n()) {
      throw Error(ErrorCode::InvalidArgument, "asset label count does not match returns");
    }
    if (!factor_labels.empty() && static_cast<Eigen::Index>(factor_labels.size()) != p()) {
      throw Error(ErrorCode::InvalidArgument, "factor label count does not match factors");
    }
  }
};

namespace model {

using backfitting::BackfitOptions;
using backfitting::ComponentSmoothers;
using smoothing::Bandwidth;
using smoothing::KernelSpec;

enum class AnchorRule {
  Index,      // use anchor_index
  MaxMinAbs,  // argmax_t min_k |x_tk|
};

// How bandwidths left unset are chosen.
enum class BandwidthSelection { RuleOfThumb, CrossValidated };

struct TfmOptions {
  BackfitOptions backfit{};
  AnchorRule anchor_rule = AnchorRule::Index;
  Eigen::Index anchor_index = 0;
  std::vector<Bandwidth> resmooth_bandwidths;  // one per factor; empty = auto
  int resmooth_degree = 1;
  double exclusion_tolerance = 1e-6;
  bool recenter = false;
  BandwidthSelection selection = BandwidthSelection::RuleOfThumb;
};

inline Eigen::Index resolve_anchor(const Eigen::MatrixXd& factors, const TfmOptions& opts) {
  if (opts.anchor_rule == AnchorRule::MaxMinAbs) {
    Eigen::Index best = 0;
    double best_value = -1.0;
    for (Eigen::Index t = 0; t < factors.rows(); ++t) {
      const double v = factors.row(t).cwiseAbs().minCoeff();
      if (v > best_value) {
        best_value = v;
        best = t;
      }
    }
    return best;
  }
  if (opts.anchor_index < 0 || opts.anchor_index >= factors.rows()) {
    throw Error(ErrorCode::InvalidArgument,
                "anchor index " + std::to_string(opts.anchor_index) + " outside the panel");
  }
  return opts.anchor_index;
}

// With cross-validated selection, fills in explicit per-factor bandwidths:
// the cross-sectional mean return is backfitted with rule-of-thumb
// bandwidths, then h_k minimises leave-one-out CV on the partial residual of
// factor k. The same h_k is used for resmoothing. User bandwidths are kept.
inline TfmOptions resolve_bandwidths(const PanelData& panel, TfmOptions opts) {
  if (opts.selection != BandwidthSelection::CrossValidated || !opts.backfit.bandwidths.empty()) return opts;
  panel.validate();
  const Eigen::Index p = panel.p();
  const Eigen::VectorXd ybar = panel.returns.rowwise().mean();
  BackfitOptions pilot = opts.backfit;
  const auto af = backfitting::backfit_asset(ybar, panel.factors, pilot);
  const Eigen::VectorXd total = af.G_hat.rowwise().sum();
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::VectorXd xk = panel.factors.col(k);
    const Eigen::VectorXd partial = (ybar.array() - af.alpha_hat).matrix() - total + af.G_hat.col(k);
    const std::span<const double> xs(xk.data(), static_cast<std::size_t>(xk.size()));
    const int degree = opts.backfit.degree(k);
    const double base = smoothing::default_bandwidth(xs, degree).value;
    const double floor = smoothing::support_floor(xs, degree, opts.backfit.kernel);
    std::vector<double> candidates;
    for (int i = 0; i <= 12; ++i) candidates.push_back(std::max(floor, base * std::exp2(-2.0 + 0.25 * i)));
    try {
      opts.backfit.bandwidths.push_back(smoothing::cv_bandwidth(
          xs, {partial.data(), static_cast<std::size_t>(partial.size())}, degree, opts.backfit.kernel, candidates));
    } catch (const Error& e) {
      throw e.with_context(std::nullopt, static_cast<int>(k));
    }
  }
  if (opts.resmooth_bandwidths.empty()) opts.resmooth_bandwidths = opts.backfit.bandwidths;
  return opts;
}

struct AggregateResult {
  Eigen::MatrixXd gbar;                    // T x p
  std::vector<std::vector<int>> excluded;  // per factor, dropped asset indices
};

// components[k] holds the T x n matrix of centered component fits G_jk(x_tk).
//   gbar_k(x_tk) = x_{a,k} * mean_{j kept} G_jk(x_tk) / G_jk(x_{a,k})
// Asset j is dropped from factor k when |G_jk(x_{a,k})| falls below
// exclusion_tolerance times the standard deviation of all G_.k values.
inline AggregateResult aggregate_transform(const std::vector<Eigen::MatrixXd>& components,
                                           const Eigen::MatrixXd& factors, Eigen::Index anchor,
                                           double exclusion_tolerance) {
  const Eigen::Index T = factors.rows();
  const Eigen::Index p = factors.cols();
  if (static_cast<Eigen::Index>(components.size()) != p) {
    throw Error(ErrorCode::InvalidArgument, "one component matrix per factor required");
  }
  if (anchor < 0 || anchor >= T) throw Error(ErrorCode::InvalidArgument, "anchor row out of range");

  AggregateResult out;
  out.gbar = Eigen::MatrixXd::Zero(T, p);
  out.excluded.resize(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::MatrixXd& G = components[static_cast<std::size_t>(k)];
    if (G.rows() != T) throw Error(ErrorCode::InvalidArgument, "component matrix has wrong row count", std::nullopt, static_cast<int>(k));
    const double xa = factors(anchor, k);
    if (std::abs(xa) < 1e-12) {
      throw Error(ErrorCode::ZeroAnchorCovariate,
                  "anchor covariate is zero; choose another anchor observation", std::nullopt,
                  static_cast<int>(k));
    }
    const double mean_all = G.mean();
    const double sd_all = G.size() > 1
                              ? std::sqrt((G.array() - mean_all).square().sum() /
                                          static_cast<double>(G.size() - 1))
                              : 0.0;
    const double cutoff = exclusion_tolerance * sd_all;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(T);
    int kept = 0;
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      const double denom = G(anchor, j);
      if (!(std::abs(denom) >= cutoff) || denom == 0.0) {
        out.excluded[static_cast<std::size_t>(k)].push_back(static_cast<int>(j));
        continue;
      }
      sum += G.col(j) / denom;
      ++kept;
    }
    if (kept == 0) {
      throw Error(ErrorCode::AllAssetsExcluded,
                  "every asset has a near-zero component fit at the anchor", std::nullopt,
                  static_cast<int>(k));
    }
    out.gbar.col(k) = xa * (sum / static_cast<double>(kept));
    out.gbar(anchor, k) = xa;
  }
  return out;
}

// ghat_k(u): local polynomial smooth of gbar_k on x_k, evaluated on demand.
class TransformEvaluator {
 public:
  TransformEvaluator() = default;
  TransformEvaluator(Eigen::VectorXd xs, Eigen::VectorXd values, Bandwidth h, int degree = 1,
                     KernelSpec spec = {})
      : xs_(std::move(xs)), values_(std::move(values)), h_(h), degree_(degree), spec_(spec) {
    if (xs_.size() != values_.size()) {
      throw Error(ErrorCode::InvalidArgument, "transform evaluator inputs differ in length");
    }
    if (xs_.size() < degree_ + 1) {
      throw Error(ErrorCode::InsufficientSupport, "too few points for the transform smoother");
    }
    lower_ = xs_.minCoeff();
    upper_ = xs_.maxCoeff();
  }

  double operator()(double u) const {
    const auto fit = smoothing::local_poly_fit(xs(), values(), u, degree_, h_, spec_);
    return fit.value - offset_;
  }

  // Values at the observation points.
  Eigen::VectorXd at_observations() const {
    const smoothing::LinearSmoother S(xs(), degree_, h_, spec_);
    return S.apply(values_).array() - offset_;
  }

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const Bandwidth& bandwidth() const { return h_; }
  int degree() const { return degree_; }
  double offset() const { return offset_; }
  void set_offset(double offset) { offset_ = offset; }

 private:
  std::span<const double> xs() const { return {xs_.data(), static_cast<std::size_t>(xs_.size())}; }
  std::span<const double> values() const {
    return {values_.data(), static_cast<std::size_t>(values_.size())};
  }

  Eigen::VectorXd xs_;
  Eigen::VectorXd values_;
  Bandwidth h_{};
  int degree_ = 1;
  KernelSpec spec_{};
  double offset_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

inline TransformEvaluator smooth_transform(const Eigen::VectorXd& xs_k, const Eigen::VectorXd& gbar_k,
                                           const Bandwidth& h, KernelSpec spec = {}, int degree = 1) {
  return TransformEvaluator(xs_k, gbar_k, h, degree, spec);
}

// beta_j = (gbar' gbar)^{-1} gbar' (R_j - alpha_j 1); returns n x p.
inline Eigen::MatrixXd estimate_betas(const Eigen::MatrixXd& returns, const Eigen::VectorXd& alpha_hat,
                                      const Eigen::MatrixXd& gbar) {
  if (gbar.rows() != returns.rows() || alpha_hat.size() != returns.cols()) {
    throw Error(ErrorCode::InvalidArgument, "estimate_betas: shape mismatch");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gbar, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
  if (!(ratio * ratio >= smoothing::kRcondThreshold)) {
    throw Error(ErrorCode::CollinearTransforms,
                "aggregated transforms are collinear (reciprocal condition " +
                    std::to_string(ratio * ratio) + ")");
  }
  const Eigen::MatrixXd demeaned = returns.rowwise() - alpha_hat.transpose();
  return svd.solve(demeaned).transpose();
}

inline Eigen::MatrixXd estimate_betas(const PanelData& panel, const Eigen::VectorXd& alpha_hat,
                                      const Eigen::MatrixXd& gbar) {
  return estimate_betas(panel.returns, alpha_hat, gbar);
}

struct TfmFit {
  Eigen::VectorXd alpha_hat;  // n
  Eigen::MatrixXd beta_hat;   // n x p
  Eigen::MatrixXd gbar;       // T x p
  std::vector<TransformEvaluator> ghat;
  Eigen::Index anchor_index = 0;
  Eigen::VectorXd anchor_values;  // x_{a,k}
  std::vector<std::vector<int>> excluded_assets;
  double rss1 = 0.0;
  Eigen::MatrixXd residuals;  // T x n
  Eigen::VectorXd gbar_means;
  Eigen::VectorXd ghat_means;  // NaN where the observation-point smooth failed
  std::vector<Bandwidth> bandwidths;
  std::vector<Bandwidth> resmooth_bandwidths;
  std::vector<int> iterations;  // per asset
  std::vector<bool> converged;  // per asset
  Eigen::VectorXd factor_min, factor_max;
  std::vector<std::string> asset_labels, factor_labels;

  Eigen::Index n() const { return alpha_hat.size(); }
  Eigen::Index p() const { return beta_hat.cols(); }
};

// Reusable estimator for one factor matrix: smoothers, bandwidths and the
// anchor are resolved once and shared by every return panel on those factors.
class TfmEstimator {
 public:
  struct Core {
    Eigen::VectorXd alpha_hat;
    Eigen::MatrixXd gbar;
    Eigen::MatrixXd beta_hat;
    Eigen::MatrixXd residuals;
    double rss1 = 0.0;
    std::vector<std::vector<int>> excluded;
    std::vector<int> iterations;
    std::vector<bool> converged;
  };

  TfmEstimator(const Eigen::MatrixXd& factors, TfmOptions opts)
      : factors_(factors), opts_(std::move(opts)) {
    if (!factors_.allFinite()) throw Error(ErrorCode::NonFinite, "factors contain non-finite values");
    if (factors_.rows() < 2 || factors_.cols() < 1) {
      throw Error(ErrorCode::InvalidArgument, "factor matrix too small");
    }
    backfitting::detail::check_shape(factors_.rows(), factors_.cols(), opts_.backfit);
    anchor_ = resolve_anchor(factors_, opts_);
    smoothers_ = ComponentSmoothers(factors_, opts_.backfit);
  }

  Eigen::Index anchor() const { return anchor_; }
  const ComponentSmoothers& smoothers() const { return smoothers_; }
  const TfmOptions& options() const { return opts_; }

  Core fit_core(const Eigen::MatrixXd& returns) const {
    const Eigen::Index T = factors_.rows();
    const Eigen::Index n = returns.cols();
    const Eigen::Index p = factors_.cols();
    if (returns.rows() != T) throw Error(ErrorCode::InvalidArgument, "returns/factors row mismatch");
    if (!returns.allFinite()) throw Error(ErrorCode::NonFinite, "returns contain non-finite values");

    Core core;
    core.alpha_hat.resize(n);
    std::vector<Eigen::MatrixXd> components(static_cast<std::size_t>(p), Eigen::MatrixXd(T, n));
    for (Eigen::Index j = 0; j < n; ++j) {
      backfitting::AdditiveFit af;
      try {
        af = backfitting::backfit_with(returns.col(j), smoothers_, opts_.backfit);
      } catch (const Error& e) {
        throw e.with_context(static_cast<int>(j), std::nullopt);
      }
      core.alpha_hat(j) = af.alpha_hat;
      for (Eigen::Index k = 0; k < p; ++k) components[static_cast<std::size_t>(k)].col(j) = af.G_hat.col(k);
      core.iterations.push_back(af.iterations_used);
      core.converged.push_back(af.converged);
    }
    auto agg = aggregate_transform(components, factors_, anchor_, opts_.exclusion_tolerance);
    core.gbar = std::move(agg.gbar);
    core.excluded = std::move(agg.excluded);

    core.beta_hat = estimate_betas(returns, core.alpha_hat, core.gbar);
    core.residuals = (returns.rowwise() - core.alpha_hat.transpose()) - core.gbar * core.beta_hat.transpose();
    core.rss1 = core.residuals.squaredNorm();
    return core;
  }

  TfmFit fit(const PanelData& panel) const {
    panel.validate();
    if (panel.factors.rows() != factors_.rows() || panel.factors.cols() != factors_.cols() ||
        panel.factors != factors_) {
      throw Error(ErrorCode::InvalidArgument, "panel factors differ from the estimator's factors");
    }
    Core core = fit_core(panel.returns);
    const Eigen::Index p = factors_.cols();

    TfmFit fit;
    fit.alpha_hat = std::move(core.alpha_hat);
    fit.beta_hat = std::move(core.beta_hat);
    fit.gbar = std::move(core.gbar);
    fit.residuals = std::move(core.residuals);
    fit.rss1 = core.rss1;
    fit.excluded_assets = std::move(core.excluded);
    fit.iterations = std::move(core.iterations);
    fit.converged = std::move(core.converged);
    fit.anchor_index = anchor_;
    fit.anchor_values = factors_.row(anchor_).transpose();
    fit.bandwidths = smoothers_.bandwidths();
    fit.gbar_means = fit.gbar.colwise().mean().transpose();
    fit.factor_min = factors_.colwise().minCoeff().transpose();
    fit.factor_max = factors_.colwise().maxCoeff().transpose();
    fit.asset_labels = panel.asset_labels;
    fit.factor_labels = panel.factor_labels;
    fit.ghat_means = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());

    if (!opts_.resmooth_bandwidths.empty() && static_cast<Eigen::Index>(opts_.resmooth_bandwidths.size()) != p) {
      throw Error(ErrorCode::InvalidArgument, "one re-smoothing bandwidth per factor required");
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      const Eigen::VectorXd xk = factors_.col(k);
      const std::span<const double> xs(xk.data(), static_cast<std::size_t>(xk.size()));
      Bandwidth ht;
      try {
        ht = opts_.resmooth_bandwidths.empty()
                 ? smoothing::auto_bandwidth(xs, opts_.resmooth_degree, opts_.backfit.kernel)
                 : opts_.resmooth_bandwidths[static_cast<std::size_t>(k)];
      } catch (const Error& e) {
        throw e.with_context(std::nullopt, static_cast<int>(k));
      }
      fit.resmooth_bandwidths.push_back(ht);
      TransformEvaluator ev = smooth_transform(xk, fit.gbar.col(k), ht, opts_.backfit.kernel, opts_.resmooth_degree);
      try {
        fit.ghat_means(k) = ev.at_observations().mean();
        if (opts_.recenter) ev.set_offset(fit.ghat_means(k));
      } catch (const Error&) {
        // diagnostic only; leave NaN
      }
      fit.ghat.push_back(std::move(ev));
    }
    return fit;
  }

 private:
  Eigen::MatrixXd factors_;
  TfmOptions opts_;
  Eigen::Index anchor_ = 0;
  ComponentSmoothers smoothers_;
};

inline TfmFit estimate(const PanelData& panel, const TfmOptions& opts = {}) {
  panel.validate();
  const TfmEstimator estimator(panel.factors, resolve_bandwidths(panel, opts));
  return estimator.fit(panel);
}

// r_j = alpha_j + sum_k beta_jk ghat_k(x_k); every x_k must lie in the
// observed range of factor k.
inline Eigen::VectorXd predict(const TfmFit& fit, const Eigen::VectorXd& new_factors) {
  const Eigen::Index p = fit.p();
  if (new_factors.size() != p) throw Error(ErrorCode::InvalidArgument, "predict: wrong factor count");
  Eigen::VectorXd g(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double x = new_factors(k);
    const auto& ev = fit.ghat[static_cast<std::size_t>(k)];
    if (!(x >= ev.lower() && x <= ev.upper())) {
      throw Error(ErrorCode::OutOfRange,
                  "value " + std::to_string(x) + " outside the observed range [" +
                      std::to_string(ev.lower()) + ", " + std::to_string(ev.upper()) + "]",
                  std::nullopt, static_cast<int>(k));
    }
    g(k) = ev(x);
  }
  return fit.alpha_hat + fit.beta_hat * g;
}

struct ClampedPrediction {
  Eigen::VectorXd values;
  std::vector<bool> clamped;  // per factor
};

// As predict, but factor values outside the observed range are clamped to it
// and flagged.
inline ClampedPrediction predict_clamped(const TfmFit& fit, const Eigen::VectorXd& new_factors) {
  ClampedPrediction out;
  Eigen::VectorXd x = new_factors;
  out.clamped.assign(static_cast<std::size_t>(fit.p()), false);
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    const auto& ev = fit.ghat[static_cast<std::size_t>(k)];
    const double c = std::clamp(x(k), ev.lower(), ev.upper());
    if (c != x(k)) out.clamped[static_cast<std::size_t>(k)] = true;
    x(k) = c;
  }
  out.values = predict(fit, x);
  return out;
}

}  // namespace model
}  // namespace tfm
