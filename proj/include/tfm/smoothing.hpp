#pragma once

// One-dimensional local polynomial regression.
//
// All fits are carried out in the scaled coordinate v = (x - u) / h, which
// keeps the weighted normal equations well conditioned for any bandwidth.
// The returned slope coefficients are converted back to covariate units.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"

namespace tfm::smoothing {

enum class KernelFamily { Epanechnikov, GaussianTruncated, Uniform };

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
};

inline constexpr double kRcondThreshold = 1e-12;

namespace detail {

// Truncation point of the Gaussian kernel, in standard deviations.
inline constexpr double kGaussCut = 3.0;

inline double gauss_mass() {
  static const double mass = std::erf(kGaussCut / std::numbers::sqrt2);
  return mass;
}

}  // namespace detail

inline double support_radius(KernelSpec spec) {
  return spec.family == KernelFamily::GaussianTruncated ? detail::kGaussCut : 1.0;
}

inline double kernel_eval(double u, KernelSpec spec) {
  const double a = std::abs(u);
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return a < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::Uniform:
      return a <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::GaussianTruncated:
      if (a > detail::kGaussCut) return 0.0;
      return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * detail::gauss_mass());
  }
  return 0.0;
}

inline double kernel_at_zero(KernelSpec spec) { return kernel_eval(0.0, spec); }

// R(K) = integral of K^2.
inline double kernel_roughness(KernelSpec spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov: return 0.6;
    case KernelFamily::Uniform: return 0.5;
    case KernelFamily::GaussianTruncated: {
      const double c = detail::kGaussCut;
      const double m = detail::gauss_mass();
      return std::erf(c) / (2.0 * std::sqrt(std::numbers::pi) * m * m);
    }
  }
  return 0.0;
}

// Coefficients (in powers of u) of the kernel on its support when it is a
// polynomial there; empty for the Gaussian.
inline std::optional<std::vector<double>> kernel_polynomial(KernelSpec spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov: return std::vector<double>{0.75, 0.0, -0.75};
    case KernelFamily::Uniform: return std::vector<double>{0.5};
    case KernelFamily::GaussianTruncated: return std::nullopt;
  }
  return std::nullopt;
}

inline std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::GaussianTruncated: return "gaussian";
    case KernelFamily::Uniform: return "uniform";
  }
  return "unknown";
}

inline KernelFamily parse_kernel(const std::string& name) {
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  if (name == "gaussian" || name == "gaussian-truncated") return KernelFamily::GaussianTruncated;
  if (name == "uniform") return KernelFamily::Uniform;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + name + "'");
}

enum class BandwidthOrigin { User, RuleOfThumb, CrossValidated };

inline std::string to_string(BandwidthOrigin origin) {
  switch (origin) {
    case BandwidthOrigin::User: return "user";
    case BandwidthOrigin::RuleOfThumb: return "rule-of-thumb";
    case BandwidthOrigin::CrossValidated: return "cross-validated";
  }
  return "unknown";
}

struct Bandwidth {
  double value = 1.0;
  BandwidthOrigin origin = BandwidthOrigin::User;

  static Bandwidth make(double value, BandwidthOrigin origin = BandwidthOrigin::User) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::InvalidArgument,
                  "bandwidth must be positive and finite, got " + std::to_string(value));
    }
    return Bandwidth{value, origin};
  }
};

struct LocalFit {
  double value = 0.0;
  std::vector<double> slope_coeffs;
  int effective_points = 0;
};

namespace detail {

inline void check_common(std::size_t T, int degree, const Bandwidth& h) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "degree must be non-negative");
  if (!(h.value > 0.0) || !std::isfinite(h.value)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive and finite");
  }
  if (T < static_cast<std::size_t>(degree) + 1) {
    throw Error(ErrorCode::InsufficientSupport,
                "need at least degree+1 observations, got " + std::to_string(T));
  }
}

// Kernel-weighted Gram matrix of (1, v, ..., v^d) at u, with the per-point
// K_h weights kept for the right-hand side.
struct LocalSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd weights;
  int effective = 0;
};

inline LocalSystem local_system(std::span<const double> xs, double u, int degree, double h,
                                KernelSpec spec) {
  const int m = degree + 1;
  LocalSystem sys;
  sys.gram = Eigen::MatrixXd::Zero(m, m);
  sys.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xs.size()));
  std::vector<double> moments(static_cast<std::size_t>(2 * degree + 1), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = (xs[i] - u) / h;
    const double k = kernel_eval(v, spec) / h;
    if (k <= 0.0) continue;
    sys.weights(static_cast<Eigen::Index>(i)) = k;
    ++sys.effective;
    double p = k;
    for (auto& mo : moments) {
      mo += p;
      p *= v;
    }
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) sys.gram(a, b) = moments[static_cast<std::size_t>(a + b)];
  return sys;
}

inline double reciprocal_condition(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return 0.0;
  return s(s.size() - 1) / s(0);
}

inline Eigen::JacobiSVD<Eigen::MatrixXd> checked_solver(const LocalSystem& sys, int degree,
                                                        double u) {
  if (sys.effective < degree + 1) {
    throw Error(ErrorCode::InsufficientSupport,
                "only " + std::to_string(sys.effective) + " observations with positive weight at u=" +
                    std::to_string(u) + " (need " + std::to_string(degree + 1) + ")");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double rc = reciprocal_condition(svd);
  if (!(rc >= kRcondThreshold)) {
    throw Error(ErrorCode::SingularDesign,
                "weighted design at u=" + std::to_string(u) +
                    " has reciprocal condition " + std::to_string(rc));
  }
  return svd;
}

inline double sample_sd(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace detail

// Minimiser of sum_t {y_t - sum_m c_m (x_t - u)^m}^2 K_h(x_t - u); value = c_0.
inline LocalFit local_poly_fit(std::span<const double> xs, std::span<const double> ys, double u,
                               int degree, const Bandwidth& h, KernelSpec spec = {}) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidArgument, "xs and ys differ in length");
  }
  detail::check_common(xs.size(), degree, h);
  const auto sys = detail::local_system(xs, u, degree, h.value, spec);
  const auto svd = detail::checked_solver(sys, degree, u);

  const int m = degree + 1;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = sys.weights(static_cast<Eigen::Index>(i));
    if (w <= 0.0) continue;
    const double v = (xs[i] - u) / h.value;
    double p = w * ys[i];
    for (int a = 0; a < m; ++a) {
      rhs(a) += p;
      p *= v;
    }
  }
  const Eigen::VectorXd coef = svd.solve(rhs);

  LocalFit fit;
  fit.value = coef(0);
  fit.effective_points = sys.effective;
  fit.slope_coeffs.resize(static_cast<std::size_t>(degree));
  double scale = 1.0;
  for (int a = 1; a < m; ++a) {
    scale *= h.value;
    fit.slope_coeffs[static_cast<std::size_t>(a - 1)] = coef(a) / scale;
  }
  return fit;
}

// Weights w with w . ys == local_poly_fit(xs, ys, u, ...).value for every ys.
inline Eigen::VectorXd equivalent_kernel_row(std::span<const double> xs, double u, int degree,
                                             const Bandwidth& h, KernelSpec spec = {}) {
  detail::check_common(xs.size(), degree, h);
  const auto sys = detail::local_system(xs, u, degree, h.value, spec);
  const auto svd = detail::checked_solver(sys, degree, u);
  const int m = degree + 1;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
  e1(0) = 1.0;
  const Eigen::VectorXd b = svd.solve(e1);

  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = sys.weights(static_cast<Eigen::Index>(i));
    if (w <= 0.0) continue;
    const double v = (xs[i] - u) / h.value;
    double p = 1.0, acc = 0.0;
    for (int a = 0; a < m; ++a) {
      acc += b(a) * p;
      p *= v;
    }
    row(static_cast<Eigen::Index>(i)) = w * acc;
  }
  return row;
}

// Rows of the equivalent kernel stacked at u = xs[0..T-1].
inline Eigen::MatrixXd smoother_matrix(std::span<const double> xs, int degree, const Bandwidth& h,
                                       KernelSpec spec = {}) {
  const auto T = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd S(T, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    S.row(t) = equivalent_kernel_row(xs, xs[static_cast<std::size_t>(t)], degree, h, spec).transpose();
  }
  return S;
}

// (I - 11'/T) S: every column has its mean removed.
inline Eigen::MatrixXd centered(const Eigen::MatrixXd& S) {
  return S.rowwise() - S.colwise().mean();
}

// Normal-reference rule rescaled for the Epanechnikov kernel:
// h = 2.34 * sd(xs) * T^(-1/5).
inline Bandwidth default_bandwidth(std::span<const double> xs, int degree = 1) {
  (void)degree;
  if (xs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "rule-of-thumb bandwidth needs at least 2 observations");
  }
  const double sd = detail::sample_sd(xs);
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (!(sd > 1e-14 * std::max(1.0, scale)) || !std::isfinite(sd)) {
    throw Error(ErrorCode::DegenerateCovariate, "covariate has zero spread");
  }
  const double T = static_cast<double>(xs.size());
  return Bandwidth{2.34 * sd * std::pow(T, -0.2), BandwidthOrigin::RuleOfThumb};
}

// Smallest global bandwidth for which every observation sees at least
// degree+1 distinct covariate values with positive kernel weight.
inline double support_floor(std::span<const double> xs, int degree, KernelSpec spec = {}) {
  std::vector<double> u(xs.begin(), xs.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  const auto m = static_cast<std::ptrdiff_t>(u.size());
  if (m < degree + 1) {
    throw Error(ErrorCode::InsufficientSupport,
                "covariate has fewer than degree+1 distinct values");
  }
  double worst = 0.0;
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    // k-th nearest other distinct value by merging left and right runs
    std::ptrdiff_t l = i - 1, r = i + 1;
    double d = 0.0;
    for (int k = 0; k < degree; ++k) {
      const double dl = l >= 0 ? u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(l)]
                               : std::numeric_limits<double>::infinity();
      const double dr = r < m ? u[static_cast<std::size_t>(r)] - u[static_cast<std::size_t>(i)]
                              : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        d = dl;
        --l;
      } else {
        d = dr;
        ++r;
      }
    }
    worst = std::max(worst, d);
  }
  return 1.01 * worst / support_radius(spec);
}

// Rule of thumb, raised to the support floor when isolated observations would
// otherwise leave a local fit undetermined.
inline Bandwidth auto_bandwidth(std::span<const double> xs, int degree = 1, KernelSpec spec = {}) {
  Bandwidth h = default_bandwidth(xs, degree);
  h.value = std::max(h.value, support_floor(xs, degree, spec));
  return h;
}

// Leave-one-out cross-validation over a candidate grid. An empty grid means
// the rule of thumb times 2^s for s in [-2, 1] (13 points).
inline Bandwidth cv_bandwidth(std::span<const double> xs, std::span<const double> ys, int degree,
                              KernelSpec spec = {}, std::vector<double> candidates = {}) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidArgument, "xs and ys differ in length");
  }
  if (candidates.empty()) {
    const double base = default_bandwidth(xs, degree).value;
    for (int i = 0; i <= 12; ++i) candidates.push_back(base * std::exp2(-2.0 + 0.25 * i));
  }
  double best_score = std::numeric_limits<double>::infinity();
  double best_h = 0.0;
  const int m = degree + 1;
  for (double h : candidates) {
    if (!(h > 0.0) || !std::isfinite(h)) continue;
    double score = 0.0;
    bool ok = true;
    for (std::size_t t = 0; t < xs.size() && ok; ++t) {
      const auto sys = detail::local_system(xs, xs[t], degree, h, spec);
      if (sys.effective < m + 1) {
        ok = false;
        break;
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
      if (!(detail::reciprocal_condition(svd) >= kRcondThreshold)) {
        ok = false;
        break;
      }
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
      e1(0) = 1.0;
      const Eigen::VectorXd b = svd.solve(e1);
      double fitted = 0.0, self = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = sys.weights(static_cast<Eigen::Index>(i));
        if (w <= 0.0) continue;
        const double v = (xs[i] - xs[t]) / h;
        double p = 1.0, acc = 0.0;
        for (int a = 0; a < m; ++a) {
          acc += b(a) * p;
          p *= v;
        }
        fitted += w * acc * ys[i];
        if (i == t) self = w * acc;
      }
      if (self >= 1.0 - 1e-10) {
        ok = false;
        break;
      }
      const double r = (ys[t] - fitted) / (1.0 - self);
      score += r * r;
    }
    if (ok && score < best_score) {
      best_score = score;
      best_h = h;
    }
  }
  if (!(best_h > 0.0)) {
    throw Error(ErrorCode::InsufficientSupport, "no admissible bandwidth among the CV candidates");
  }
  return Bandwidth{best_h, BandwidthOrigin::CrossValidated};
}

enum class SmootherBackend { Auto, Dense, Sorted };

// The linear map y -> (local polynomial fit of y at every observation point)
// for a fixed covariate vector. Construction does all y-independent work, so
// repeated application (backfitting sweeps, bootstrap replicates) is cheap.
//
// Sorted backend: for kernels that are polynomials on their support the
// fitted value at x_t is sum_q gamma_{t,q} * sum_{i in window(t)} z_i^q y_i,
// where z is the standardised covariate; window sums come from prefix sums,
// so one application costs O(T * (degree + 3)).
class LinearSmoother {
 public:
  LinearSmoother() = default;

  LinearSmoother(std::span<const double> xs, int degree, const Bandwidth& h, KernelSpec spec = {},
                 SmootherBackend backend = SmootherBackend::Auto)
      : degree_(degree), h_(h), spec_(spec), size_(static_cast<Eigen::Index>(xs.size())) {
    detail::check_common(xs.size(), degree, h);
    const auto poly = kernel_polynomial(spec);
    if (backend == SmootherBackend::Auto) {
      backend = poly ? SmootherBackend::Sorted : SmootherBackend::Dense;
    }
    if (backend == SmootherBackend::Sorted && !poly) {
      throw Error(ErrorCode::InvalidArgument, "sorted smoother needs a polynomial kernel");
    }
    backend_ = backend;
    if (backend_ == SmootherBackend::Dense) {
      matrix_ = smoother_matrix(xs, degree, h, spec);
    } else {
      build_sorted(xs, *poly);
    }
  }

  Eigen::Index size() const { return size_; }
  int degree() const { return degree_; }
  const Bandwidth& bandwidth() const { return h_; }
  KernelSpec kernel() const { return spec_; }
  SmootherBackend backend() const { return backend_; }

  void apply(std::span<const double> y, std::span<double> out) const {
    if (static_cast<Eigen::Index>(y.size()) != size_ || static_cast<Eigen::Index>(out.size()) != size_) {
      throw Error(ErrorCode::InvalidArgument, "smoother applied to a vector of the wrong length");
    }
    if (backend_ == SmootherBackend::Dense) {
      Eigen::Map<const Eigen::VectorXd> yv(y.data(), size_);
      Eigen::Map<Eigen::VectorXd> ov(out.data(), size_);
      ov.noalias() = matrix_ * yv;
      return;
    }
    const auto T = static_cast<std::size_t>(size_);
    const auto nq = static_cast<std::size_t>(nq_);
    std::vector<double> prefix((T + 1) * nq, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
      const double yi = y[order_[i]];
      const double z = z_sorted_[i];
      const double* prev = &prefix[i * nq];
      double* next = &prefix[(i + 1) * nq];
      double p = yi;
      for (std::size_t q = 0; q < nq; ++q) {
        next[q] = prev[q] + p;
        p *= z;
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      const double* hi = &prefix[hi_[t] * nq];
      const double* lo = &prefix[lo_[t] * nq];
      const double* g = &gamma_[t * nq];
      double acc = 0.0;
      for (std::size_t q = 0; q < nq; ++q) acc += g[q] * (hi[q] - lo[q]);
      out[t] = acc;
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(size_);
    apply(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
          std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
  }

  // Explicit T x T matrix (oracle/diagnostic use).
  Eigen::MatrixXd dense() const {
    if (backend_ == SmootherBackend::Dense) return matrix_;
    Eigen::MatrixXd S(size_, size_);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(size_);
    for (Eigen::Index i = 0; i < size_; ++i) {
      e(i) = 1.0;
      S.col(i) = apply(e);
      e(i) = 0.0;
    }
    return S;
  }

 private:
  void build_sorted(std::span<const double> xs, const std::vector<double>& kpoly) {
    const auto T = xs.size();
    const double h = h_.value;
    const double radius = support_radius(spec_);
    const int m = degree_ + 1;
    const int kdeg = static_cast<int>(kpoly.size()) - 1;
    nq_ = degree_ + kdeg + 1;

    order_.resize(T);
    for (std::size_t i = 0; i < T; ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> sorted(T);
    for (std::size_t i = 0; i < T; ++i) sorted[i] = xs[order_[i]];

    double centre = 0.0;
    for (double x : sorted) centre += x;
    centre /= static_cast<double>(T);
    double scale = T > 1 ? detail::sample_sd(sorted) : 0.0;
    if (!(scale > 0.0)) scale = 1.0;
    z_sorted_.resize(T);
    for (std::size_t i = 0; i < T; ++i) z_sorted_[i] = (sorted[i] - centre) / scale;

    lo_.resize(T);
    hi_.resize(T);
    gamma_.assign(T * static_cast<std::size_t>(nq_), 0.0);

    // binomial coefficients up to nq-1
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(nq_));
    for (int s = 0; s < nq_; ++s) {
      binom[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(s + 1), 1.0);
      for (int q = 1; q < s; ++q) {
        binom[static_cast<std::size_t>(s)][static_cast<std::size_t>(q)] =
            binom[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(q - 1)] +
            binom[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(q)];
      }
    }

    std::vector<double> moments(static_cast<std::size_t>(2 * degree_ + 1));
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
    e1(0) = 1.0;
    std::vector<double> a(static_cast<std::size_t>(nq_));

    for (std::size_t t = 0; t < T; ++t) {
      const double u = xs[t];
      // same membership predicate as the direct fit
      const auto lo = std::partition_point(sorted.begin(), sorted.end(),
                                           [&](double x) { return (x - u) / h < -radius; });
      const auto hi = std::partition_point(lo, sorted.end(),
                                           [&](double x) { return (x - u) / h <= radius; });
      lo_[t] = static_cast<std::size_t>(lo - sorted.begin());
      hi_[t] = static_cast<std::size_t>(hi - sorted.begin());

      std::fill(moments.begin(), moments.end(), 0.0);
      int effective = 0;
      for (auto it = lo; it != hi; ++it) {
        const double v = (*it - u) / h;
        const double k = kernel_eval(v, spec_) / h;
        if (k <= 0.0) continue;
        ++effective;
        double p = k;
        for (auto& mo : moments) {
          mo += p;
          p *= v;
        }
      }
      detail::LocalSystem sys;
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) gram(r, c) = moments[static_cast<std::size_t>(r + c)];
      sys.gram = gram;
      sys.effective = effective;
      const auto svd = detail::checked_solver(sys, degree_, u);
      const Eigen::VectorXd b = svd.solve(e1);

      // weight(v) = (1/h) * kpoly(v) * sum_m b_m v^m = sum_s a_s v^s
      std::fill(a.begin(), a.end(), 0.0);
      for (int r = 0; r <= kdeg; ++r)
        for (int c = 0; c < m; ++c)
          a[static_cast<std::size_t>(r + c)] += kpoly[static_cast<std::size_t>(r)] * b(c) / h;

      // v = (z - uz) / hz
      const double uz = (u - centre) / scale;
      const double hz = h / scale;
      double* g = &gamma_[t * static_cast<std::size_t>(nq_)];
      double hinv = 1.0;
      for (int s = 0; s < nq_; ++s) {
        const double as = a[static_cast<std::size_t>(s)] * hinv;
        double negu = 1.0;  // (-uz)^(s-q), built from q = s downwards
        for (int q = s; q >= 0; --q) {
          g[q] += as * binom[static_cast<std::size_t>(s)][static_cast<std::size_t>(q)] * negu;
          negu *= -uz;
        }
        hinv /= hz;
      }
    }
  }

  int degree_ = 1;
  Bandwidth h_{};
  KernelSpec spec_{};
  Eigen::Index size_ = 0;
  SmootherBackend backend_ = SmootherBackend::Dense;

  Eigen::MatrixXd matrix_;

  int nq_ = 0;
  std::vector<std::size_t> order_;
  std::vector<double> z_sorted_;
  std::vector<std::size_t> lo_, hi_;
  std::vector<double> gamma_;
};

}  // namespace tfm::smoothing
