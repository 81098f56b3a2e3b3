// Simulate a panel with nonlinear factor transforms, fit the model and run
// the linearity test.

#include <iostream>

#include "tfm/glr.hpp"
#include "tfm/model.hpp"
#include "tfm/simlab.hpp"

int main() {
  tfm::simlab::SimConfig cfg;
  cfg.n = 10;
  cfg.T = 300;
  cfg.p = 2;
  cfg.seed = 42;
  const auto sample = tfm::simlab::simulate_panel(cfg, 0);

  const auto fit = tfm::model::estimate(sample.panel);
  std::cout << "rss1 = " << fit.rss1 << "\n";
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    const auto& g = fit.ghat[static_cast<std::size_t>(k)];
    std::cout << "ghat_" << k + 1 << "(0.5) = " << g(0.5) << "  bandwidth " << fit.bandwidths[k].value << "\n";
  }

  const auto test = tfm::glr::glr_test(sample.panel, 99, 0.05, 7);
  std::cout << "lambda = " << test.lambda << ", p-value = " << test.p_value
            << (test.reject ? " (linearity rejected)" : "") << "\n";
  return 0;
}
