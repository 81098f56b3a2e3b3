#pragma once

// Per-asset additive model backfitting with centered local polynomial
// component smooths.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"
#include "tfm/smoothing.hpp"
#include "tfm/util.hpp"

namespace tfm::backfitting {

using smoothing::Bandwidth;
using smoothing::KernelSpec;
using smoothing::LinearSmoother;
using smoothing::SmootherBackend;

struct BackfitOptions {
  int max_iterations = 100;
  // Bound on max |change| of any component value between sweeps, relative to
  // the sample standard deviation of the response.
  double tolerance = 1e-6;
  // Per-factor degrees and bandwidths. Empty means degree 1 everywhere and
  // auto bandwidths (rule of thumb, raised to the support floor).
  std::vector<int> degrees;
  std::vector<Bandwidth> bandwidths;
  KernelSpec kernel{};
  SmootherBackend backend = SmootherBackend::Auto;

  void validate() const {
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }

  int degree(Eigen::Index k) const {
    return degrees.empty() ? 1 : degrees.at(static_cast<std::size_t>(k));
  }
};

struct AdditiveFit {
  double alpha_hat = 0.0;
  Eigen::MatrixXd G_hat;  // T x p
  int iterations_used = 0;
  bool converged = false;
  Eigen::VectorXd residuals;
  std::vector<double> sweep_changes;  // scaled max change per sweep
};

// The p component smoothers for one factor matrix. They depend on the
// factors only, so a single set serves every asset and every bootstrap
// replicate that shares the factors.
class ComponentSmoothers {
 public:
  ComponentSmoothers() = default;

  ComponentSmoothers(const Eigen::MatrixXd& factors, const BackfitOptions& opts) {
    opts.validate();
    const Eigen::Index p = factors.cols();
    if (!opts.degrees.empty() && static_cast<Eigen::Index>(opts.degrees.size()) != p) {
      throw Error(ErrorCode::InvalidArgument, "one degree per factor required");
    }
    if (!opts.bandwidths.empty() && static_cast<Eigen::Index>(opts.bandwidths.size()) != p) {
      throw Error(ErrorCode::InvalidArgument, "one bandwidth per factor required");
    }
    smoothers_.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index k = 0; k < p; ++k) {
      const Eigen::VectorXd xk = factors.col(k);
      const std::span<const double> xs(xk.data(), static_cast<std::size_t>(xk.size()));
      const int degree = opts.degree(k);
      try {
        const Bandwidth h = opts.bandwidths.empty()
                                ? smoothing::auto_bandwidth(xs, degree, opts.kernel)
                                : opts.bandwidths[static_cast<std::size_t>(k)];
        smoothers_.emplace_back(xs, degree, h, opts.kernel, opts.backend);
      } catch (const Error& e) {
        throw e.with_context(std::nullopt, static_cast<int>(k));
      }
    }
  }

  std::size_t size() const { return smoothers_.size(); }
  const LinearSmoother& operator[](std::size_t k) const { return smoothers_[k]; }
  std::vector<Bandwidth> bandwidths() const {
    std::vector<Bandwidth> out;
    for (const auto& s : smoothers_) out.push_back(s.bandwidth());
    return out;
  }

 private:
  std::vector<LinearSmoother> smoothers_;
};

namespace detail {

inline void check_shape(Eigen::Index T, Eigen::Index p, const BackfitOptions& opts) {
  int max_degree = 0;
  for (Eigen::Index k = 0; k < p; ++k) max_degree = std::max(max_degree, opts.degree(k));
  if (T <= p * (max_degree + 1)) {
    throw Error(ErrorCode::InvalidArgument,
                "backfitting needs T > p*(degree+1); T=" + std::to_string(T));
  }
}

}  // namespace detail

// Backfit one response against pre-built component smoothers.
inline AdditiveFit backfit_with(const Eigen::VectorXd& y, const ComponentSmoothers& smoothers,
                                const BackfitOptions& opts) {
  opts.validate();
  const Eigen::Index T = y.size();
  const auto p = static_cast<Eigen::Index>(smoothers.size());
  if (!y.allFinite()) throw Error(ErrorCode::NonFinite, "response contains non-finite values");

  AdditiveFit fit;
  fit.alpha_hat = y.mean();
  fit.G_hat = Eigen::MatrixXd::Zero(T, p);
  const double sd = sample_sd(y);
  const double scale = sd > 0.0 ? sd : 1.0;

  // partial = y - alpha - sum_k G_k, kept current after every update
  Eigen::VectorXd partial = y.array() - fit.alpha_hat;
  Eigen::VectorXd target(T), smoothed(T);
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      target = partial + fit.G_hat.col(k);
      smoothers[static_cast<std::size_t>(k)].apply(
          std::span<const double>(target.data(), static_cast<std::size_t>(T)),
          std::span<double>(smoothed.data(), static_cast<std::size_t>(T)));
      smoothed.array() -= smoothed.mean();
      max_change = std::max(max_change, (smoothed - fit.G_hat.col(k)).cwiseAbs().maxCoeff());
      partial = target - smoothed;
      fit.G_hat.col(k) = smoothed;
    }
    fit.iterations_used = iter;
    fit.sweep_changes.push_back(max_change / scale);
    if (max_change / scale <= opts.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.residuals = y - Eigen::VectorXd::Constant(T, fit.alpha_hat) - fit.G_hat.rowwise().sum();
  return fit;
}

inline AdditiveFit backfit_asset(const Eigen::VectorXd& y, const Eigen::MatrixXd& factors,
                                 const BackfitOptions& opts) {
  opts.validate();
  if (y.size() != factors.rows()) {
    throw Error(ErrorCode::InvalidArgument, "response and factors differ in length");
  }
  if (!factors.allFinite()) throw Error(ErrorCode::NonFinite, "factors contain non-finite values");
  detail::check_shape(factors.rows(), factors.cols(), opts);
  const ComponentSmoothers smoothers(factors, opts);
  return backfit_with(y, smoothers, opts);
}

// max_{k,t} |G_k - S*_k (y - alpha 1 - sum_{l != k} G_l)| with explicit
// centered smoother matrices S*_k = (I - 11'/T) S_k. Meant for small T.
inline double backfit_residual_check(const AdditiveFit& fit, const Eigen::VectorXd& y,
                                     const Eigen::MatrixXd& factors, const BackfitOptions& opts) {
  const Eigen::Index T = factors.rows();
  const Eigen::Index p = factors.cols();
  const Eigen::VectorXd total = fit.G_hat.rowwise().sum();
  double defect = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::VectorXd xk = factors.col(k);
    const std::span<const double> xs(xk.data(), static_cast<std::size_t>(T));
    const int degree = opts.degree(k);
    const Bandwidth h = opts.bandwidths.empty() ? smoothing::auto_bandwidth(xs, degree, opts.kernel)
                                                : opts.bandwidths[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd S = smoothing::centered(smoothing::smoother_matrix(xs, degree, h, opts.kernel));
    const Eigen::VectorXd partial =
        y.array() - fit.alpha_hat - (total - fit.G_hat.col(k)).array();
    defect = std::max(defect, (fit.G_hat.col(k) - S * partial).cwiseAbs().maxCoeff());
  }
  return defect;
}

}  // namespace tfm::backfitting
