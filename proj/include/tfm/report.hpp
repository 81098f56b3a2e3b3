#pragma once

// Serialisation of fits, test results, simulation reports and real-data
// diagnostics as delimited text or JSON. Layouts are described in FORMATS.md.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "tfm/dataio.hpp"
#include "tfm/error.hpp"
#include "tfm/glr.hpp"
#include "tfm/model.hpp"
#include "tfm/simlab.hpp"

namespace tfm::report {

using json = nlohmann::ordered_json;
using dataio::format_double;

enum class Format { Csv, Json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json" || s == "structured-text") return Format::Json;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + s + "'");
}

// Rows of (key, value) with values pre-formatted.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

inline void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  auto out = open_out(path);
  out << "key,value\n";
  for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

// NaN and infinities become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string label_at(const std::vector<std::string>& labels, Eigen::Index i, const char* prefix) {
  return i < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(i)]
                                                      : prefix + std::to_string(i + 1);
}

// ---- fit -------------------------------------------------------------------

inline KeyValues fit_summary(const model::TfmFit& fit, const std::vector<std::string>& dates) {
  KeyValues kv;
  int converged = 0, max_iter = 0;
  for (std::size_t j = 0; j < fit.converged.size(); ++j) {
    converged += fit.converged[j] ? 1 : 0;
    max_iter = std::max(max_iter, fit.iterations[j]);
  }
  kv.emplace_back("n", std::to_string(fit.n()));
  kv.emplace_back("T", std::to_string(fit.gbar.rows()));
  kv.emplace_back("p", std::to_string(fit.p()));
  kv.emplace_back("rss1", format_double(fit.rss1));
  kv.emplace_back("anchor_row", std::to_string(fit.anchor_index));
  if (!dates.empty()) kv.emplace_back("anchor_date", dates.at(static_cast<std::size_t>(fit.anchor_index)));
  kv.emplace_back("converged_assets", std::to_string(converged));
  kv.emplace_back("max_iterations_used", std::to_string(max_iter));
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    const auto l = label_at(fit.factor_labels, k, "x");
    const auto ks = static_cast<std::size_t>(k);
    kv.emplace_back("anchor_value_" + l, format_double(fit.anchor_values(k)));
    kv.emplace_back("bandwidth_" + l, format_double(fit.bandwidths[ks].value));
    kv.emplace_back("bandwidth_origin_" + l, smoothing::to_string(fit.bandwidths[ks].origin));
    kv.emplace_back("resmooth_bandwidth_" + l, format_double(fit.resmooth_bandwidths[ks].value));
    kv.emplace_back("excluded_assets_" + l, std::to_string(fit.excluded_assets[ks].size()));
    kv.emplace_back("gbar_mean_" + l, format_double(fit.gbar_means(k)));
    kv.emplace_back("ghat_mean_" + l, format_double(fit.ghat_means(k)));
    kv.emplace_back("factor_min_" + l, format_double(fit.factor_min(k)));
    kv.emplace_back("factor_max_" + l, format_double(fit.factor_max(k)));
  }
  return kv;
}

inline json fit_to_json(const model::TfmFit& fit, const Eigen::MatrixXd& factors,
                        const std::vector<std::string>& dates) {
  json j;
  json summary = json::object();
  for (const auto& [k, v] : fit_summary(fit, dates)) summary[k] = v;
  j["summary"] = summary;
  json fs = json::array();
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    json excluded = json::array();
    for (int a : fit.excluded_assets[ks]) excluded.push_back(label_at(fit.asset_labels, a, "asset"));
    fs.push_back({{"label", label_at(fit.factor_labels, k, "x")},
                  {"anchor_value", num(fit.anchor_values(k))},
                  {"bandwidth", num(fit.bandwidths[ks].value)},
                  {"bandwidth_origin", smoothing::to_string(fit.bandwidths[ks].origin)},
                  {"resmooth_bandwidth", num(fit.resmooth_bandwidths[ks].value)},
                  {"excluded_assets", excluded},
                  {"gbar_mean", num(fit.gbar_means(k))},
                  {"ghat_mean", num(fit.ghat_means(k))},
                  {"x", std::vector<double>(factors.col(k).data(), factors.col(k).data() + factors.rows())},
                  {"gbar", std::vector<double>(fit.gbar.col(k).data(), fit.gbar.col(k).data() + fit.gbar.rows())}});
  }
  j["factors"] = fs;
  json as = json::array();
  for (Eigen::Index a = 0; a < fit.n(); ++a) {
    std::vector<double> beta(static_cast<std::size_t>(fit.p()));
    for (Eigen::Index k = 0; k < fit.p(); ++k) beta[static_cast<std::size_t>(k)] = fit.beta_hat(a, k);
    as.push_back({{"label", label_at(fit.asset_labels, a, "asset")},
                  {"alpha", num(fit.alpha_hat(a))},
                  {"beta", beta},
                  {"iterations", fit.iterations[static_cast<std::size_t>(a)]},
                  {"converged", static_cast<bool>(fit.converged[static_cast<std::size_t>(a)])}});
  }
  j["assets"] = as;
  j["dates"] = dates;
  return j;
}

inline void write_fit(const model::TfmFit& fit, const Eigen::MatrixXd& factors, const std::vector<std::string>& dates,
                      const std::filesystem::path& dir, Format format) {
  if (format == Format::Json) {
    write_json(dir / "fit.json", fit_to_json(fit, factors, dates));
    return;
  }
  write_key_values(dir / "fit_summary.csv", fit_summary(fit, dates));
  {
    auto out = open_out(dir / "fit_coefficients.csv");
    out << "asset,alpha";
    for (Eigen::Index k = 0; k < fit.p(); ++k) out << ",beta_" << label_at(fit.factor_labels, k, "x");
    out << ",iterations,converged\n";
    for (Eigen::Index a = 0; a < fit.n(); ++a) {
      out << label_at(fit.asset_labels, a, "asset") << ',' << format_double(fit.alpha_hat(a));
      for (Eigen::Index k = 0; k < fit.p(); ++k) out << ',' << format_double(fit.beta_hat(a, k));
      out << ',' << fit.iterations[static_cast<std::size_t>(a)] << ','
          << (fit.converged[static_cast<std::size_t>(a)] ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_out(dir / "fit_transforms.csv");
    out << "date";
    for (Eigen::Index k = 0; k < fit.p(); ++k) {
      const auto l = label_at(fit.factor_labels, k, "x");
      out << ",x_" << l << ",gbar_" << l;
    }
    out << '\n';
    for (Eigen::Index t = 0; t < fit.gbar.rows(); ++t) {
      out << (dates.empty() ? std::to_string(t) : dates.at(static_cast<std::size_t>(t)));
      for (Eigen::Index k = 0; k < fit.p(); ++k) out << ',' << format_double(factors(t, k)) << ',' << format_double(fit.gbar(t, k));
      out << '\n';
    }
  }
}

// ---- test ------------------------------------------------------------------

inline KeyValues test_summary(const glr::TestResult& r, const glr::GlrOptions& opts) {
  return {{"lambda", format_double(r.lambda)},
          {"rss0", format_double(r.rss0)},
          {"rss1", format_double(r.rss1)},
          {"critical_value", format_double(r.critical_value)},
          {"p_value", format_double(r.p_value)},
          {"level", format_double(r.level)},
          {"reject", r.reject ? "1" : "0"},
          {"B", std::to_string(r.B)},
          {"seed", std::to_string(r.seed)},
          {"scheme", glr::to_string(opts.scheme)},
          {"pooled", opts.pooled ? "1" : "0"},
          {"redraws", std::to_string(r.redraws)}};
}

inline void write_test(const glr::TestResult& r, const glr::GlrOptions& opts, const std::filesystem::path& dir,
                       Format format) {
  if (format == Format::Json) {
    json j = {{"lambda", num(r.lambda)},
              {"rss0", num(r.rss0)},
              {"rss1", num(r.rss1)},
              {"critical_value", num(r.critical_value)},
              {"p_value", num(r.p_value)},
              {"level", r.level},
              {"reject", r.reject},
              {"B", r.B},
              {"seed", r.seed},
              {"scheme", glr::to_string(opts.scheme)},
              {"pooled", opts.pooled},
              {"redraws", r.redraws},
              {"bootstrap_sample", r.bootstrap_sample}};
    write_json(dir / "test_result.json", j);
    return;
  }
  write_key_values(dir / "test_result.csv", test_summary(r, opts));
  auto out = open_out(dir / "bootstrap_sample.csv");
  out << "b,lambda_star\n";
  for (std::size_t b = 0; b < r.bootstrap_sample.size(); ++b) out << b << ',' << format_double(r.bootstrap_sample[b]) << '\n';
}

// ---- simulate / power ------------------------------------------------------

inline KeyValues sim_config_kv(const simlab::SimConfig& c) {
  return {{"n", std::to_string(c.n)},
          {"T", std::to_string(c.T)},
          {"p", std::to_string(c.p)},
          {"rho", format_double(c.rho)},
          {"reps", std::to_string(c.reps)},
          {"B", std::to_string(c.B)},
          {"level", format_double(c.level)},
          {"seed", std::to_string(c.seed)},
          {"noise_sd", format_double(c.noise_sd)},
          {"anchor_value", c.anchor_value ? format_double(*c.anchor_value) : "none"},
          {"scheme", glr::to_string(c.scheme)},
          {"pooled", c.pooled ? "1" : "0"},
          {"bandwidth_selection",
           c.model.selection == model::BandwidthSelection::CrossValidated ? "cv" : "rule-of-thumb"}};
}

inline void write_sim_report(const simlab::SimReport& r, const std::filesystem::path& dir, Format format) {
  auto metric_rows = [&] {
    return std::vector<std::tuple<std::string, simlab::MetricEstimate>>{
        {"armse_alpha", r.armse_alpha},
        {"armse_beta", r.armse_beta},
        {"armise", r.armise},
        {"armise_inverse_norm", r.armise_inverse},
        {"rejection_rate", r.size_or_power}};
  };
  if (format == Format::Json) {
    json cfg = json::object();
    for (const auto& [k, v] : sim_config_kv(r.config)) cfg[k] = v;
    json metrics = json::object();
    for (const auto& [name, m] : metric_rows()) metrics[name] = {{"value", num(m.value)}, {"se", num(m.se)}};
    json reps = json::array();
    for (const auto& rec : r.records) {
      json ise = json::array();
      for (const auto& t : rec.ise) ise.push_back({{"ise", num(t.ise)}, {"norm", num(t.norm)}});
      reps.push_back({{"rep", rec.rep},
                      {"ok", rec.ok},
                      {"error", rec.error},
                      {"alpha_rel_sq", num(rec.alpha_rel_sq)},
                      {"beta_rel_sq", num(rec.beta_rel_sq)},
                      {"ise", ise},
                      {"lambda", num(rec.lambda)},
                      {"p_value", num(rec.p_value)},
                      {"reject", rec.reject},
                      {"nonconverged_assets", rec.nonconverged_assets}});
    }
    write_json(dir / "sim_report.json", {{"config", cfg},
                                         {"reps_completed", r.reps_completed},
                                         {"metrics", metrics},
                                         {"replications", reps}});
    return;
  }
  {
    auto out = open_out(dir / "sim_summary.csv");
    out << "metric,value,se\n";
    for (const auto& [k, v] : sim_config_kv(r.config)) out << "config_" << k << ',' << v << ",\n";
    out << "reps_completed," << r.reps_completed << ",\n";
    for (const auto& [name, m] : metric_rows()) out << name << ',' << format_double(m.value) << ',' << format_double(m.se) << '\n';
  }
  auto out = open_out(dir / "sim_replications.csv");
  out << "rep,ok,alpha_rel_sq,beta_rel_sq";
  for (int k = 0; k < r.config.p; ++k) out << ",ise_" << k + 1 << ",norm_" << k + 1;
  out << ",lambda,p_value,reject,nonconverged_assets,error\n";
  for (const auto& rec : r.records) {
    out << rec.rep << ',' << (rec.ok ? 1 : 0) << ',' << format_double(rec.alpha_rel_sq) << ','
        << format_double(rec.beta_rel_sq);
    for (int k = 0; k < r.config.p; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      if (ks < rec.ise.size()) {
        out << ',' << format_double(rec.ise[ks].ise) << ',' << format_double(rec.ise[ks].norm);
      } else {
        out << ",nan,nan";
      }
    }
    std::string err = rec.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << ',' << format_double(rec.lambda) << ',' << format_double(rec.p_value) << ',' << (rec.reject ? 1 : 0) << ','
        << rec.nonconverged_assets << ',' << err << '\n';
  }
}

inline void write_power(const std::vector<simlab::PowerPoint>& curve, const simlab::SimConfig& base,
                        const std::filesystem::path& dir, Format format) {
  if (format == Format::Json) {
    json cfg = json::object();
    for (const auto& [k, v] : sim_config_kv(base)) cfg[k] = v;
    json pts = json::array();
    for (const auto& p : curve) {
      pts.push_back({{"rho", p.rho}, {"rejection_rate", num(p.rate)}, {"mc_se", num(p.se)}, {"reps_completed", p.reps_completed}});
    }
    write_json(dir / "power_curve.json", {{"config", cfg}, {"points", pts}});
    return;
  }
  auto out = open_out(dir / "power_curve.csv");
  out << "rho,rejection_rate,mc_se,reps_completed\n";
  for (const auto& p : curve) {
    out << format_double(p.rho) << ',' << format_double(p.rate) << ',' << format_double(p.se) << ',' << p.reps_completed << '\n';
  }
}

// ---- diagnose / cv ---------------------------------------------------------

inline void write_diagnostic(const dataio::DiagnosticResult& d, const PanelData& panel,
                             const std::vector<std::string>& dates, const std::filesystem::path& dir, Format format) {
  const Eigen::Index p = panel.p();
  if (format == Format::Json) {
    json ols = json::array();
    for (Eigen::Index a = 0; a < d.ols.rows(); ++a) {
      std::vector<double> beta;
      for (Eigen::Index k = 0; k < p; ++k) beta.push_back(d.ols(a, k + 1));
      ols.push_back({{"asset", label_at(panel.asset_labels, a, "asset")}, {"alpha", num(d.ols(a, 0))}, {"beta", beta}});
    }
    json zeta = json::object();
    for (Eigen::Index k = 0; k < p; ++k) {
      zeta[label_at(panel.factor_labels, k, "x")] =
          std::vector<double>(d.zeta.col(k).data(), d.zeta.col(k).data() + d.zeta.rows());
    }
    json curves = json::array();
    for (const auto& c : d.smoothed_curves) {
      curves.push_back({{"label", c.label}, {"bandwidth", c.bandwidth.value}, {"u", c.u}, {"smoothed_zeta", c.value}});
    }
    write_json(dir / "diagnostic.json", {{"dates", dates}, {"ols", ols}, {"zeta_hat", zeta}, {"smoothed_curves", curves}});
    return;
  }
  {
    auto out = open_out(dir / "ols_coefficients.csv");
    out << "asset,alpha";
    for (Eigen::Index k = 0; k < p; ++k) out << ",beta_" << label_at(panel.factor_labels, k, "x");
    out << '\n';
    for (Eigen::Index a = 0; a < d.ols.rows(); ++a) {
      out << label_at(panel.asset_labels, a, "asset");
      for (Eigen::Index c = 0; c < d.ols.cols(); ++c) out << ',' << format_double(d.ols(a, c));
      out << '\n';
    }
  }
  auto out = open_out(dir / "zeta_hat.csv");
  out << "date";
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto l = label_at(panel.factor_labels, k, "x");
    out << ",x_" << l << ",zeta_" << l;
  }
  out << '\n';
  for (Eigen::Index t = 0; t < d.zeta.rows(); ++t) {
    out << (dates.empty() ? std::to_string(t) : dates.at(static_cast<std::size_t>(t)));
    for (Eigen::Index k = 0; k < p; ++k) out << ',' << format_double(panel.factors(t, k)) << ',' << format_double(d.zeta(t, k));
    out << '\n';
  }
}

inline void write_cv(const dataio::CvResult& cv, const PanelData& panel, const std::vector<std::string>& dates,
                     const std::filesystem::path& dir, Format format) {
  auto day_label = [&](Eigen::Index t) { return dates.empty() ? std::to_string(t) : dates.at(static_cast<std::size_t>(t)); };
  if (format == Format::Json) {
    json days = json::array();
    for (std::size_t i = 0; i < cv.days.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const Eigen::RowVectorXd actual = panel.returns.row(cv.days[i]);
      days.push_back({{"date", day_label(cv.days[i])},
                      {"sq_error_fftfm", (cv.pred_fftfm.row(r) - actual).squaredNorm()},
                      {"sq_error_tfm", (cv.pred_tfm.row(r) - actual).squaredNorm()}});
    }
    write_json(dir / "cv_result.json", {{"horizon", cv.days.size()},
                                        {"cv_fftfm", num(cv.cv_fftfm)},
                                        {"cv_tfm", num(cv.cv_tfm)},
                                        {"ratio", num(cv.ratio)},
                                        {"degenerate", cv.degenerate},
                                        {"clamped_days", cv.clamped_predictions},
                                        {"days", days}});
    return;
  }
  write_key_values(dir / "cv_result.csv", {{"horizon", std::to_string(cv.days.size())},
                                           {"cv_fftfm", format_double(cv.cv_fftfm)},
                                           {"cv_tfm", format_double(cv.cv_tfm)},
                                           {"ratio", format_double(cv.ratio)},
                                           {"degenerate", cv.degenerate ? "1" : "0"},
                                           {"clamped_days", std::to_string(cv.clamped_predictions)}});
  auto out = open_out(dir / "cv_days.csv");
  out << "date,sq_error_fftfm,sq_error_tfm\n";
  for (std::size_t i = 0; i < cv.days.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Eigen::RowVectorXd actual = panel.returns.row(cv.days[i]);
    out << day_label(cv.days[i]) << ',' << format_double((cv.pred_fftfm.row(r) - actual).squaredNorm()) << ','
        << format_double((cv.pred_tfm.row(r) - actual).squaredNorm()) << '\n';
  }
}

}  // namespace tfm::report
