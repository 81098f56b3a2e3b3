#pragma once

// Command-line front end: fit, test, simulate, power, diagnose and cv.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tfm/dataio.hpp"
#include "tfm/error.hpp"
#include "tfm/glr.hpp"
#include "tfm/model.hpp"
#include "tfm/report.hpp"
#include "tfm/simlab.hpp"
#include "tfm/smoothing.hpp"

namespace tfm::cli {

namespace fs = std::filesystem;

struct GlobalArgs {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = "tfm_out";
  std::string format = "csv";
};

struct DataArgs {
  std::string returns;
  std::string factors;
  std::string date_column;
  std::vector<std::string> asset_columns;
  std::vector<std::string> factor_columns;
  bool skip_preamble = false;
  std::string missing = "drop";
  std::vector<std::string> bandwidths;  // k=v
  std::string bandwidth_selection = "rule-of-thumb";
  std::string anchor = "0";
  int degree = 1;
  std::string kernel = "epanechnikov";
  double tolerance = 1e-6;
  int max_iterations = 100;
  int grid_points = 101;
};

struct TestArgs {
  int B = 200;
  double level = 0.05;
  std::string bootstrap = "residual";
  bool pooled = false;
};

struct SimArgs {
  int n = 20;
  int T = 200;
  int p = 4;
  double rho = 1.0;
  int reps = 100;
  int B = 0;
  double level = 0.05;
  double noise_sd = 1.0;
  std::vector<double> rho_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::string bootstrap = "residual";
  bool pooled = false;
  std::string bandwidth_selection = "rule-of-thumb";
};

// Input and configuration problems exit with 1, numerical failures with 2.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::Io:
    case ErrorCode::EmptyIntersection:
    case ErrorCode::InsufficientHistory:
      return 1;
    default:
      return 2;
  }
}

inline std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

namespace detail {

inline void add_data_flags(CLI::App* sub, DataArgs& d) {
  sub->add_option("--returns", d.returns, "Returns CSV (date column plus one column per asset)")->required();
  sub->add_option("--factors", d.factors, "Factors CSV (date column plus one column per factor)")->required();
  sub->add_option("--date-column", d.date_column, "Name of the date column (default: first column)");
  sub->add_option("--asset-columns", d.asset_columns, "Comma-separated subset of return columns")->delimiter(',');
  sub->add_option("--factor-columns", d.factor_columns, "Comma-separated subset of factor columns")->delimiter(',');
  sub->add_flag("--skip-preamble", d.skip_preamble, "Skip descriptive text above the header row");
  sub->add_option("--missing", d.missing, "Rows with missing values: drop or error")
      ->check(CLI::IsMember({"drop", "error"}));
  sub->add_option("--bandwidth", d.bandwidths, "Bandwidth for factor k as k=v (k: 1-based index or column name)");
  sub->add_option("--bandwidth-selection", d.bandwidth_selection, "Unset bandwidths: rule-of-thumb or cv")
      ->check(CLI::IsMember({"rule-of-thumb", "cv"}));
  sub->add_option("--anchor", d.anchor, "Anchor row (0-based) or max-min-abs");
  sub->add_option("--degree", d.degree, "Local polynomial degree")->check(CLI::Range(0, 3));
  sub->add_option("--kernel", d.kernel, "epanechnikov, gaussian or uniform")
      ->check(CLI::IsMember({"epanechnikov", "gaussian", "uniform"}));
  sub->add_option("--tolerance", d.tolerance, "Backfitting stopping tolerance (relative to sd of returns)");
  sub->add_option("--max-iterations", d.max_iterations, "Backfitting sweep limit");
  sub->add_option("--grid-points", d.grid_points, "Points per curve in plot data")->check(CLI::Range(2, 100000));
}

inline void add_test_flags(CLI::App* sub, TestArgs& t) {
  sub->add_option("--B", t.B, "Bootstrap replicates")->check(CLI::PositiveNumber);
  sub->add_option("--level", t.level, "Nominal level");
  sub->add_option("--bootstrap", t.bootstrap, "residual or wild")->check(CLI::IsMember({"residual", "wild"}));
  sub->add_flag("--pooled", t.pooled, "Residual scheme draws from all assets' residuals");
}

inline void add_sim_flags(CLI::App* sub, SimArgs& s, bool power) {
  sub->add_option("--n", s.n, "Assets");
  sub->add_option("--T", s.T, "Observations");
  sub->add_option("--p", s.p, "Factors (1 to 4)");
  sub->add_option("--reps", s.reps, "Monte Carlo replications");
  sub->add_option("--level", s.level, "Nominal level");
  sub->add_option("--noise-sd", s.noise_sd, "Error standard deviation");
  sub->add_option("--bootstrap", s.bootstrap, "residual or wild")->check(CLI::IsMember({"residual", "wild"}));
  sub->add_flag("--pooled", s.pooled, "Residual scheme draws from all assets' residuals");
  sub->add_option("--bandwidth-selection", s.bandwidth_selection, "rule-of-thumb or cv")
      ->check(CLI::IsMember({"rule-of-thumb", "cv"}));
  if (power) {
    sub->add_option("--B", s.B, "Bootstrap replicates")->check(CLI::PositiveNumber);
    sub->add_option("--rho-grid", s.rho_grid, "Comma-separated mixture weights")->delimiter(',');
  } else {
    sub->add_option("--rho", s.rho, "Mixture weight of the nonlinear transforms");
    sub->add_option("--B", s.B, "Bootstrap replicates per replication (0 skips the test)");
  }
}

inline dataio::LoadedPanel load(const DataArgs& d) {
  dataio::DatasetManifest m;
  m.returns_path = d.returns;
  m.factors_path = d.factors;
  m.date_column = d.date_column;
  m.asset_columns = d.asset_columns;
  m.factor_columns = d.factor_columns;
  m.skip_preamble = d.skip_preamble;
  m.missing_policy = d.missing == "error" ? dataio::MissingPolicy::Error : dataio::MissingPolicy::DropRow;
  auto loaded = dataio::load_panel(m);
  loaded.panel.fill_default_labels();
  return loaded;
}

inline model::TfmOptions model_options(const DataArgs& d, const PanelData& panel) {
  model::TfmOptions opts;
  opts.backfit.tolerance = d.tolerance;
  opts.backfit.max_iterations = d.max_iterations;
  opts.backfit.kernel.family = smoothing::parse_kernel(d.kernel);
  const Eigen::Index p = panel.p();
  opts.backfit.degrees.assign(static_cast<std::size_t>(p), d.degree);
  opts.resmooth_degree = d.degree;
  if (d.bandwidth_selection == "cv") opts.selection = model::BandwidthSelection::CrossValidated;

  if (d.anchor == "max-min-abs") {
    opts.anchor_rule = model::AnchorRule::MaxMinAbs;
  } else {
    long long row = -1;
    const auto res = std::from_chars(d.anchor.data(), d.anchor.data() + d.anchor.size(), row);
    if (res.ec != std::errc() || res.ptr != d.anchor.data() + d.anchor.size() || row < 0 || row >= panel.T()) {
      throw Error(ErrorCode::InvalidArgument, "--anchor: expected a row in [0, " + std::to_string(panel.T() - 1) +
                                                  "] or max-min-abs, got '" + d.anchor + "'");
    }
    opts.anchor_index = static_cast<Eigen::Index>(row);
  }

  if (!d.bandwidths.empty()) {
    std::vector<std::optional<double>> given(static_cast<std::size_t>(p));
    for (const auto& spec : d.bandwidths) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--bandwidth: expected k=v, got '" + spec + "'");
      const std::string key = spec.substr(0, eq);
      const std::string val = spec.substr(eq + 1);
      std::optional<std::size_t> k;
      const auto it = std::find(panel.factor_labels.begin(), panel.factor_labels.end(), key);
      if (it != panel.factor_labels.end()) {
        k = static_cast<std::size_t>(it - panel.factor_labels.begin());
      } else {
        std::size_t idx = 0;
        const auto r = std::from_chars(key.data(), key.data() + key.size(), idx);
        if (r.ec == std::errc() && r.ptr == key.data() + key.size() && idx >= 1 && idx <= static_cast<std::size_t>(p))
          k = idx - 1;
      }
      if (!k) throw Error(ErrorCode::InvalidArgument, "--bandwidth: unknown factor '" + key + "'");
      double h = 0.0;
      const auto r = std::from_chars(val.data(), val.data() + val.size(), h);
      if (r.ec != std::errc() || r.ptr != val.data() + val.size() || !(h > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "--bandwidth: invalid value '" + val + "'");
      }
      given[*k] = h;
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      smoothing::Bandwidth h;
      if (given[ks]) {
        h = smoothing::Bandwidth::make(*given[ks]);
      } else {
        const Eigen::VectorXd xk = panel.factors.col(k);
        h = smoothing::auto_bandwidth(std::span<const double>(xk.data(), static_cast<std::size_t>(xk.size())), d.degree,
                                      opts.backfit.kernel);
      }
      opts.backfit.bandwidths.push_back(h);
      opts.resmooth_bandwidths.push_back(h);
    }
  }
  return opts;
}

inline glr::GlrOptions glr_options(const std::string& bootstrap, bool pooled, int threads) {
  glr::GlrOptions g;
  g.scheme = bootstrap == "wild" ? glr::BootstrapScheme::Wild : glr::BootstrapScheme::Residual;
  g.pooled = pooled;
  g.threads = threads;
  return g;
}

inline simlab::SimConfig sim_config(const SimArgs& s, const GlobalArgs& g) {
  simlab::SimConfig c;
  c.n = s.n;
  c.T = s.T;
  c.p = s.p;
  c.rho = s.rho;
  c.reps = s.reps;
  c.B = s.B;
  c.level = s.level;
  c.noise_sd = s.noise_sd;
  c.seed = g.seed;
  c.threads = g.threads;
  c.scheme = s.bootstrap == "wild" ? glr::BootstrapScheme::Wild : glr::BootstrapScheme::Residual;
  c.pooled = s.pooled;
  if (s.bandwidth_selection == "cv") c.model.selection = model::BandwidthSelection::CrossValidated;
  return c;
}

inline void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
  }
}

inline std::string ini_quote(const std::string& v) {
  std::string q = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') q.push_back('\\');
    q.push_back(c);
  }
  return q + "\"";
}

inline void echo_options(std::ostream& out, const CLI::App& app) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help" || opt->get_lnames().front() == "config") continue;
    const std::string name = opt->get_lnames().front();
    if (opt->get_type_size() == 0) {  // flag
      out << name << '=' << (opt->count() > 0 ? "true" : "false") << '\n';
      continue;
    }
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      std::string d = opt->get_default_str();
      if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      if (d == "{}") d.clear();  // CLI11's rendering of an empty vector
      if (opt->get_expected_max() > 1) {
        std::stringstream ss(d);
        for (std::string item; std::getline(ss, item, ',');) values.push_back(item);
      } else if (!d.empty()) {
        values.push_back(d);
      }
    }
    if (values.empty()) continue;
    if (opt->get_expected_max() > 1) {
      out << name << "=[";
      for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << ini_quote(values[i]);
      out << "]\n";
    } else {
      out << name << '=' << ini_quote(values.back()) << '\n';
    }
  }
}

// Global options plus the section of the subcommand that ran, in the ini
// dialect accepted by --config.
inline void write_config_echo(const CLI::App& app, const CLI::App& sub, const fs::path& dir) {
  std::ofstream out(dir / "run_config.ini", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + (dir / "run_config.ini").string() + "'");
  echo_options(out, app);
  out << '[' << sub.get_name() << "]\n";
  echo_options(out, sub);
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Transformed factor models for asset returns", "tfm"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from an ini file (as written to run_config.ini)");

  GlobalArgs g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--format", g.format, "csv or structured-text (json)")
      ->check(CLI::IsMember({"csv", "structured-text", "json"}));

  DataArgs data;
  TestArgs test;
  SimArgs sim;
  SimArgs pow;
  pow.T = 500;
  pow.B = 100;
  int horizon = 30;
  int min_training = 0;

  auto* fit_cmd = app.add_subcommand("fit", "Estimate the transformed factor model");
  detail::add_data_flags(fit_cmd, data);

  auto* test_cmd = app.add_subcommand("test", "Bootstrap GLR test of linearity");
  detail::add_data_flags(test_cmd, data);
  detail::add_test_flags(test_cmd, test);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo accuracy study");
  detail::add_sim_flags(sim_cmd, sim, false);

  auto* pow_cmd = app.add_subcommand("power", "Rejection rate over a grid of mixture weights");
  detail::add_sim_flags(pow_cmd, pow, true);

  auto* diag_cmd = app.add_subcommand("diagnose", "Linear-model fit and cross-sectional zeta diagnostic");
  detail::add_data_flags(diag_cmd, data);

  auto* cv_cmd = app.add_subcommand("cv", "Rolling one-step prediction comparison");
  detail::add_data_flags(cv_cmd, data);
  cv_cmd->add_option("--horizon", horizon, "Number of final days predicted")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--min-training", min_training, "Minimum training rows (0: automatic)");
  diag_cmd->add_option("--horizon", horizon, "Unused; accepted for symmetry with cv");

  for (auto* sub : app.get_subcommands(std::function<bool(CLI::App*)>{})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "tfm: error: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    const auto format = report::parse_format(g.format);
    const fs::path dir = g.out_dir;
    detail::prepare_out_dir(dir);
    const fs::path plots = dir / "plots";

    if (fit_cmd->parsed()) {
      const auto loaded = detail::load(data);
      const auto opts = detail::model_options(data, loaded.panel);
      const auto fit = model::estimate(loaded.panel, opts);
      report::write_fit(fit, loaded.panel.factors, loaded.dates, dir, format);
      auto series = dataio::ghat_series(fit, data.grid_points);
      series.push_back(dataio::coefficient_series(fit));
      dataio::emit_plot_data(series, plots);
      out << "rss1 " << dataio::format_double(fit.rss1) << '\n';
    } else if (test_cmd->parsed()) {
      const auto loaded = detail::load(data);
      auto gopts = detail::glr_options(test.bootstrap, test.pooled, g.threads);
      gopts.model = detail::model_options(data, loaded.panel);
      const auto result = glr::glr_test(loaded.panel, test.B, test.level, g.seed, gopts);
      report::write_test(result, gopts, dir, format);
      out << "lambda " << dataio::format_double(result.lambda) << " p_value " << dataio::format_double(result.p_value)
          << '\n';
    } else if (sim_cmd->parsed()) {
      const auto cfg = detail::sim_config(sim, g);
      const auto rep = simlab::run_mc(cfg);
      report::write_sim_report(rep, dir, format);
      out << "reps_completed " << rep.reps_completed << '\n';
    } else if (pow_cmd->parsed()) {
      const auto cfg = detail::sim_config(pow, g);
      const auto curve = simlab::power_curve(cfg, pow.rho_grid, pow.reps, pow.B, pow.level);
      report::write_power(curve, cfg, dir, format);
      dataio::emit_plot_data({dataio::power_series(curve)}, plots);
      for (const auto& pt : curve) out << "rho " << pt.rho << " rate " << dataio::format_double(pt.rate) << '\n';
    } else if (diag_cmd->parsed()) {
      const auto loaded = detail::load(data);
      const auto ols = dataio::fftfm_fit(loaded.panel);
      const auto diag = dataio::diagnose_zeta(loaded.panel, ols, data.grid_points);
      report::write_diagnostic(diag, loaded.panel, loaded.dates, dir, format);
      const auto fit = model::estimate(loaded.panel, detail::model_options(data, loaded.panel));
      report::write_fit(fit, loaded.panel.factors, loaded.dates, dir, format);
      auto series = dataio::zeta_series(diag);
      for (auto& s : dataio::ghat_series(fit, data.grid_points)) series.push_back(std::move(s));
      series.push_back(dataio::coefficient_series(fit));
      dataio::emit_plot_data(series, plots);
      out << "T " << loaded.panel.T() << " dropped_rows " << loaded.report.dropped_rows << '\n';
    } else if (cv_cmd->parsed()) {
      const auto loaded = detail::load(data);
      dataio::CvOptions copts;
      copts.horizon = horizon;
      copts.min_training = min_training;
      copts.threads = g.threads;
      copts.model = detail::model_options(data, loaded.panel);
      // Bandwidths from the full sample would look ahead; let each training
      // window pick its own unless the user fixed them.
      if (data.bandwidths.empty()) {
        copts.model.backfit.bandwidths.clear();
        copts.model.resmooth_bandwidths.clear();
      }
      if (copts.model.anchor_rule == model::AnchorRule::Index && copts.model.anchor_index >= loaded.panel.T() - horizon) {
        throw Error(ErrorCode::InvalidArgument, "--anchor must lie in the first training window");
      }
      const auto cv = dataio::cv_compare(loaded.panel, copts);
      report::write_cv(cv, loaded.panel, loaded.dates, dir, format);
      out << "ratio " << dataio::format_double(cv.ratio) << '\n';
    }
    detail::write_config_echo(app, *app.get_subcommands().front(), dir);
  } catch (const Error& e) {
    err << "tfm: error: " << one_line(e.what()) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "tfm: error: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 0;
}

}  // namespace tfm::cli
