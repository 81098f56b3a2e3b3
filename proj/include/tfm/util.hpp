#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"

namespace tfm {

// Independent stream for (seed, key...). Streams for different keys are
// decorrelated through seed_seq mixing.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count). Work is handed out by index; callers write
// results into slot i, so the outcome does not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

inline double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

// Ordinary least squares of every column of Y on the design X.
struct LinearFit {
  Eigen::MatrixXd coefficients;  // q x n
  Eigen::MatrixXd fitted;        // T x n
  Eigen::MatrixXd residuals;     // T x n
};

class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::MatrixXd& design, double rcond = 1e-12) : design_(design) {
    qr_.compute(design);
    qr_.setThreshold(rcond);
    if (qr_.rank() < design.cols()) {
      throw Error(ErrorCode::RankDeficientDesign,
                  "design of " + std::to_string(design.cols()) + " columns has rank " +
                      std::to_string(qr_.rank()));
    }
  }

  LinearFit fit(const Eigen::MatrixXd& Y) const {
    LinearFit out;
    out.coefficients = qr_.solve(Y);
    out.fitted = design_ * out.coefficients;
    out.residuals = Y - out.fitted;
    return out;
  }

  const Eigen::MatrixXd& design() const { return design_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

// [1, X]
inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

}  // namespace tfm
