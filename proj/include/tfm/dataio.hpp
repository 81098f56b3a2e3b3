#pragma once

// Real-data pipeline: CSV ingestion of return and factor tables, the linear
// factor model baseline, the cross-sectional zeta diagnostic, rolling
// out-of-sample comparison and plot-data emission.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "tfm/error.hpp"
#include "tfm/glr.hpp"
#include "tfm/model.hpp"
#include "tfm/simlab.hpp"
#include "tfm/smoothing.hpp"
#include "tfm/util.hpp"

namespace tfm::dataio {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

// yyyymmdd, yyyymm or yyyy-mm-dd, normalised to digits only.
inline std::optional<std::string> normalize_date(std::string_view raw) {
  const auto s = trim(raw);
  std::string digits;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    digits = std::string(s.substr(0, 4)) + std::string(s.substr(5, 2)) + std::string(s.substr(8, 2));
  } else {
    digits = std::string(s);
  }
  if (digits.size() != 8 && digits.size() != 6) return std::nullopt;
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return digits;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row
};

// Reads a comma-delimited table with a header row. With skip_preamble, text
// before the header (the line directly preceding the first date-led row) is
// ignored, and reading stops at the first blank or non-date-led line after
// the data starts.
inline CsvTable read_csv(const std::filesystem::path& path, bool skip_preamble = false) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  auto date_led = [](const std::string& line) {
    if (trim(line).empty()) return false;
    const auto fields = split_csv_line(line);
    return fields.size() > 1 && normalize_date(fields[0]).has_value();
  };

  std::size_t header_line = 0;
  if (skip_preamble) {
    bool found = false;
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
      if (!date_led(lines[i]) && lines[i].find(',') != std::string::npos && date_led(lines[i + 1])) {
        header_line = i;
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::ParseError, "'" + path.string() + "': no header row followed by dated data");
  } else {
    while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
    if (header_line >= lines.size()) throw Error(ErrorCode::ParseError, "'" + path.string() + "': empty file");
  }

  CsvTable table;
  table.header = split_csv_line(lines[header_line]);
  for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) {
      if (skip_preamble) break;
      continue;
    }
    if (skip_preamble && !date_led(lines[i])) break;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, "'" + path.string() + "' line " + std::to_string(i + 1) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(static_cast<int>(i + 1));
  }
  return table;
}

enum class MissingPolicy { DropRow, Error };

struct DatasetManifest {
  std::filesystem::path returns_path;
  std::filesystem::path factors_path;
  std::string date_column;                  // empty: first column
  std::vector<std::string> asset_columns;   // empty: every non-date column
  std::vector<std::string> factor_columns;  // empty: every non-date column
  MissingPolicy missing_policy = MissingPolicy::DropRow;
  bool skip_preamble = false;
  std::vector<std::string> missing_tokens{"", "NA", "NaN", "nan", "NULL", "."};
  std::vector<double> missing_sentinels{-99.99, -999.0};
};

struct LoadReport {
  int returns_rows = 0;
  int factors_rows = 0;
  int joined_rows = 0;
  int dropped_rows = 0;
  std::vector<std::string> dropped_dates;
};

struct LoadedPanel {
  PanelData panel;
  std::vector<std::string> dates;
  LoadReport report;
};

namespace detail {

struct ParsedTable {
  std::vector<std::string> labels;
  std::map<std::string, std::vector<double>> by_date;
};

inline ParsedTable parse_table(const CsvTable& table, const std::filesystem::path& path,
                               const DatasetManifest& manifest, const std::vector<std::string>& wanted) {
  std::size_t date_col = 0;
  if (!manifest.date_column.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), manifest.date_column);
    if (it == table.header.end()) {
      throw Error(ErrorCode::ParseError, "'" + path.string() + "': no date column '" + manifest.date_column + "'");
    }
    date_col = static_cast<std::size_t>(it - table.header.begin());
  }
  std::vector<std::size_t> cols;
  ParsedTable out;
  if (wanted.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == date_col) continue;
      cols.push_back(c);
      out.labels.push_back(table.header[c]);
    }
  } else {
    for (const auto& name : wanted) {
      const auto it = std::find(table.header.begin(), table.header.end(), name);
      if (it == table.header.end()) {
        throw Error(ErrorCode::ParseError, "'" + path.string() + "': no column '" + name + "'");
      }
      cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
      out.labels.push_back(name);
    }
  }
  if (cols.empty()) throw Error(ErrorCode::ParseError, "'" + path.string() + "': no data columns");

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = "'" + path.string() + "' line " + std::to_string(table.line_numbers[r]);
    const auto date = normalize_date(row[date_col]);
    if (!date) throw Error(ErrorCode::ParseError, where + ": unrecognised date '" + row[date_col] + "'");
    std::vector<double> values;
    values.reserve(cols.size());
    for (auto c : cols) {
      const std::string& cell = row[c];
      if (std::find(manifest.missing_tokens.begin(), manifest.missing_tokens.end(), cell) !=
          manifest.missing_tokens.end()) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (first != last && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) {
        throw Error(ErrorCode::ParseError, where + ": cannot parse '" + cell + "' in column '" + table.header[c] + "'");
      }
      if (std::find(manifest.missing_sentinels.begin(), manifest.missing_sentinels.end(), v) !=
          manifest.missing_sentinels.end()) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      values.push_back(v);
    }
    if (!out.by_date.emplace(*date, std::move(values)).second) {
      throw Error(ErrorCode::ParseError, where + ": duplicate date " + *date);
    }
  }
  return out;
}

}  // namespace detail

// Inner join of the two tables on date, in ascending date order.
inline LoadedPanel load_panel(const DatasetManifest& manifest) {
  for (const auto& p : {manifest.returns_path, manifest.factors_path}) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::Io, "file not found: '" + p.string() + "'");
  }
  const auto rt = read_csv(manifest.returns_path, manifest.skip_preamble);
  const auto ft = read_csv(manifest.factors_path, manifest.skip_preamble);
  const auto returns = detail::parse_table(rt, manifest.returns_path, manifest, manifest.asset_columns);
  const auto factors = detail::parse_table(ft, manifest.factors_path, manifest, manifest.factor_columns);

  LoadedPanel out;
  out.report.returns_rows = static_cast<int>(returns.by_date.size());
  out.report.factors_rows = static_cast<int>(factors.by_date.size());
  std::vector<std::pair<const std::vector<double>*, const std::vector<double>*>> kept;
  for (const auto& [date, rvals] : returns.by_date) {
    const auto it = factors.by_date.find(date);
    if (it == factors.by_date.end()) continue;
    ++out.report.joined_rows;
    const bool missing = std::any_of(rvals.begin(), rvals.end(), [](double v) { return std::isnan(v); }) ||
                         std::any_of(it->second.begin(), it->second.end(), [](double v) { return std::isnan(v); });
    if (missing) {
      if (manifest.missing_policy == MissingPolicy::Error) {
        throw Error(ErrorCode::ParseError, "missing value on date " + date);
      }
      ++out.report.dropped_rows;
      out.report.dropped_dates.push_back(date);
      continue;
    }
    out.dates.push_back(date);
    kept.emplace_back(&rvals, &it->second);
  }
  if (out.report.joined_rows == 0) {
    throw Error(ErrorCode::EmptyIntersection, "returns and factors share no dates");
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyIntersection, "every joined row has a missing value");

  const auto T = static_cast<Eigen::Index>(kept.size());
  PanelData& panel = out.panel;
  panel.returns.resize(T, static_cast<Eigen::Index>(returns.labels.size()));
  panel.factors.resize(T, static_cast<Eigen::Index>(factors.labels.size()));
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& [r, f] = kept[static_cast<std::size_t>(t)];
    for (std::size_t j = 0; j < r->size(); ++j) panel.returns(t, static_cast<Eigen::Index>(j)) = (*r)[j];
    for (std::size_t k = 0; k < f->size(); ++k) panel.factors(t, static_cast<Eigen::Index>(k)) = (*f)[k];
  }
  panel.asset_labels = returns.labels;
  panel.factor_labels = factors.labels;
  return out;
}

// Writes a dated table: header "date,<labels...>".
inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& dates,
                        const std::vector<std::string>& labels, const Eigen::MatrixXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << "date";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out << dates.at(static_cast<std::size_t>(t));
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(t, c));
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

inline void write_panel(const PanelData& panel, const std::vector<std::string>& dates,
                        const std::filesystem::path& returns_path, const std::filesystem::path& factors_path) {
  write_table(returns_path, dates, panel.asset_labels, panel.returns);
  write_table(factors_path, dates, panel.factor_labels, panel.factors);
}

// Synthetic yyyymmdd labels for undated panels (consecutive integers from
// 19000101 are enough for ordering; they are not calendar dates).
inline std::vector<std::string> sequential_dates(Eigen::Index T) {
  std::vector<std::string> d;
  for (Eigen::Index t = 0; t < T; ++t) d.push_back(std::to_string(19000101 + t));
  return d;
}

// Linear factor model r_tj = a_j + sum_k b_jk x_tk + e; rows are assets,
// columns (a_j, b_j1, ..., b_jp). Same fit as the GLR null.
inline Eigen::MatrixXd fftfm_fit(const PanelData& panel) { return glr::rss_null(panel).coefficients; }

struct Curve {
  std::string label;
  std::vector<double> u;
  std::vector<double> value;
  smoothing::Bandwidth bandwidth;
};

struct DiagnosticResult {
  Eigen::MatrixXd ols;   // n x (p+1)
  Eigen::MatrixXd zeta;  // T x p
  std::vector<Curve> smoothed_curves;
};

// Local linear smooth of ys on xs at grid_points equispaced points spanning
// the data; grid points without local support are skipped.
inline Curve smooth_curve(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, int grid_points,
                          std::string label, smoothing::KernelSpec spec = {}) {
  const std::span<const double> xv(xs.data(), static_cast<std::size_t>(xs.size()));
  const std::span<const double> yv(ys.data(), static_cast<std::size_t>(ys.size()));
  Curve c;
  c.label = std::move(label);
  c.bandwidth = smoothing::auto_bandwidth(xv, 1, spec);
  const double lo = xs.minCoeff(), hi = xs.maxCoeff();
  for (int i = 0; i < grid_points; ++i) {
    const double u = grid_points == 1 ? lo : lo + (hi - lo) * i / (grid_points - 1);
    try {
      const auto fit = smoothing::local_poly_fit(xv, yv, u, 1, c.bandwidth, spec);
      c.u.push_back(u);
      c.value.push_back(fit.value);
    } catch (const Error&) {
    }
  }
  return c;
}

// For every t, regress r_tj - a_j on the estimated loadings (b_j1..b_jp)
// across assets; zeta_tk is the fitted coefficient.
inline DiagnosticResult diagnose_zeta(const PanelData& panel, const Eigen::MatrixXd& ols, int grid_points = 101) {
  panel.validate();
  const Eigen::Index p = panel.p();
  if (ols.rows() != panel.n() || ols.cols() != p + 1) {
    throw Error(ErrorCode::InvalidArgument, "diagnose_zeta: coefficient matrix has the wrong shape");
  }
  if (panel.n() < p) {
    throw Error(ErrorCode::RankDeficientLoadings, "need at least p assets for the cross-sectional regression");
  }
  const Eigen::MatrixXd loadings = ols.rightCols(p);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(loadings);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) throw Error(ErrorCode::RankDeficientLoadings, "loading matrix is rank deficient");

  DiagnosticResult out;
  out.ols = ols;
  const Eigen::MatrixXd excess = (panel.returns.rowwise() - ols.col(0).transpose()).transpose();  // n x T
  out.zeta = qr.solve(excess).transpose();
  for (Eigen::Index k = 0; k < p; ++k) {
    const std::string label = panel.factor_labels.empty() ? "x" + std::to_string(k + 1)
                                                          : panel.factor_labels[static_cast<std::size_t>(k)];
    out.smoothed_curves.push_back(smooth_curve(panel.factors.col(k), out.zeta.col(k), grid_points, label));
  }
  return out;
}

struct CvOptions {
  int horizon = 30;
  int min_training = 0;  // 0: max(20, 5(p+1))
  model::TfmOptions model{};
  int threads = 0;
};

struct CvResult {
  double cv_fftfm = 0.0;
  double cv_tfm = 0.0;
  double ratio = 1.0;
  bool degenerate = false;
  int clamped_predictions = 0;  // days where at least one factor was clamped
  std::vector<Eigen::Index> days;
  Eigen::MatrixXd pred_fftfm;  // horizon x n
  Eigen::MatrixXd pred_tfm;    // horizon x n
};

// Expanding-window one-step comparison over the last `horizon` rows: each day
// is predicted from models fitted on strictly earlier rows only.
inline CvResult cv_compare(const PanelData& panel, const CvOptions& opts = {}) {
  panel.validate();
  const Eigen::Index T = panel.T(), n = panel.n(), p = panel.p();
  if (opts.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const Eigen::Index min_train = opts.min_training > 0 ? opts.min_training : std::max<Eigen::Index>(20, 5 * (p + 1));
  if (T - opts.horizon < min_train) {
    throw Error(ErrorCode::InsufficientHistory,
                "need at least " + std::to_string(min_train) + " training rows before the last " +
                    std::to_string(opts.horizon) + " days; panel has T=" + std::to_string(T));
  }
  const auto H = static_cast<std::size_t>(opts.horizon);
  CvResult out;
  out.pred_fftfm.resize(opts.horizon, n);
  out.pred_tfm.resize(opts.horizon, n);
  std::vector<char> clamped(H, 0);
  for (std::size_t i = 0; i < H; ++i) out.days.push_back(T - opts.horizon + static_cast<Eigen::Index>(i));

  parallel_for(H, opts.threads, [&](std::size_t i) {
    const Eigen::Index day = out.days[i];
    PanelData train = PanelData::make(panel.returns.topRows(day), panel.factors.topRows(day));
    const Eigen::VectorXd x = panel.factors.row(day).transpose();

    const Eigen::MatrixXd ols = fftfm_fit(train);
    out.pred_fftfm.row(static_cast<Eigen::Index>(i)) = (ols.col(0) + ols.rightCols(p) * x).transpose();

    const auto fit = model::estimate(train, opts.model);
    const auto pred = model::predict_clamped(fit, x);
    out.pred_tfm.row(static_cast<Eigen::Index>(i)) = pred.values.transpose();
    clamped[i] = std::any_of(pred.clamped.begin(), pred.clamped.end(), [](bool b) { return b; }) ? 1 : 0;
  });

  double sf = 0.0, st = 0.0;
  for (std::size_t i = 0; i < H; ++i) {
    const Eigen::RowVectorXd actual = panel.returns.row(out.days[i]);
    sf += (out.pred_fftfm.row(static_cast<Eigen::Index>(i)) - actual).squaredNorm();
    st += (out.pred_tfm.row(static_cast<Eigen::Index>(i)) - actual).squaredNorm();
    out.clamped_predictions += clamped[i];
  }
  const double denom = static_cast<double>(opts.horizon) * static_cast<double>(n);
  out.cv_fftfm = sf / denom;
  out.cv_tfm = st / denom;
  if (out.cv_fftfm < 1e-10 && out.cv_tfm < 1e-10) {
    out.ratio = 1.0;
    out.degenerate = true;
  } else {
    out.ratio = out.cv_fftfm / out.cv_tfm;
  }
  return out;
}

// One delimited (x, y, ...) data set for an external plotting tool.
struct PlotSeries {
  std::string name;  // file stem
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;  // optional leading text column
  std::string row_label_column = "label";
  Eigen::MatrixXd data;
};

// Writes <name>.csv per series plus manifest.csv listing them.
inline std::vector<std::filesystem::path> emit_plot_data(const std::vector<PlotSeries>& series,
                                                         const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& s : series) {
    const auto path = out_dir / (s.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    bool first = true;
    if (!s.row_labels.empty()) {
      out << s.row_label_column;
      first = false;
    }
    for (const auto& c : s.columns) {
      out << (first ? "" : ",") << c;
      first = false;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < s.data.rows(); ++r) {
      first = true;
      if (!s.row_labels.empty()) {
        out << s.row_labels.at(static_cast<std::size_t>(r));
        first = false;
      }
      for (Eigen::Index c = 0; c < s.data.cols(); ++c) {
        out << (first ? "" : ",") << format_double(s.data(r, c));
        first = false;
      }
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  const auto manifest = out_dir / "manifest.csv";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + manifest.string() + "'");
  out << "file,rows,columns,description\n";
  for (const auto& s : series) {
    out << s.name << ".csv," << s.data.rows() << ',' << s.data.cols() + (s.row_labels.empty() ? 0 : 1) << ",\""
        << s.description << "\"\n";
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + manifest.string() + "'");
  written.push_back(manifest);
  return written;
}

inline std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

// ghat_k on an equispaced grid over the observed range, with the identity.
inline std::vector<PlotSeries> ghat_series(const model::TfmFit& fit, int grid_points = 101) {
  std::vector<PlotSeries> out;
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    const auto& ev = fit.ghat[static_cast<std::size_t>(k)];
    const std::string label = fit.factor_labels.empty() ? "x" + std::to_string(k + 1) : fit.factor_labels[static_cast<std::size_t>(k)];
    std::vector<std::array<double, 2>> rows;
    for (int i = 0; i < grid_points; ++i) {
      const double u = ev.lower() + (ev.upper() - ev.lower()) * i / std::max(1, grid_points - 1);
      try {
        rows.push_back({u, ev(u)});
      } catch (const Error&) {
      }
    }
    PlotSeries s;
    s.name = "ghat_" + file_safe(label);
    s.description = "estimated transform of factor " + label + " with identity reference";
    s.columns = {"u", "ghat", "identity"};
    s.data.resize(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      s.data.row(static_cast<Eigen::Index>(r)) << rows[r][0], rows[r][1], rows[r][0];
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<PlotSeries> zeta_series(const DiagnosticResult& diag) {
  std::vector<PlotSeries> out;
  for (const auto& c : diag.smoothed_curves) {
    PlotSeries s;
    s.name = "zeta_" + file_safe(c.label);
    s.description = "smoothed cross-sectional zeta against factor " + c.label + " with identity reference";
    s.columns = {"u", "smoothed_zeta", "identity"};
    s.data.resize(static_cast<Eigen::Index>(c.u.size()), 3);
    for (std::size_t r = 0; r < c.u.size(); ++r) s.data.row(static_cast<Eigen::Index>(r)) << c.u[r], c.value[r], c.u[r];
    out.push_back(std::move(s));
  }
  return out;
}

inline PlotSeries coefficient_series(const model::TfmFit& fit) {
  PlotSeries s;
  s.name = "coefficients";
  s.description = "per-asset intercept and loadings on the transformed factors";
  s.row_label_column = "asset";
  s.row_labels = fit.asset_labels;
  if (s.row_labels.empty())
    for (Eigen::Index j = 0; j < fit.n(); ++j) s.row_labels.push_back("asset" + std::to_string(j + 1));
  s.columns.push_back("alpha");
  for (Eigen::Index k = 0; k < fit.p(); ++k) {
    s.columns.push_back("beta_" + (fit.factor_labels.empty() ? "x" + std::to_string(k + 1) : fit.factor_labels[static_cast<std::size_t>(k)]));
  }
  s.data.resize(fit.n(), fit.p() + 1);
  s.data.col(0) = fit.alpha_hat;
  s.data.rightCols(fit.p()) = fit.beta_hat;
  return s;
}

inline PlotSeries power_series(const std::vector<simlab::PowerPoint>& curve, const std::string& name = "power_curve") {
  PlotSeries s;
  s.name = name;
  s.description = "rejection rate against the mixture weight rho";
  s.columns = {"rho", "rejection_rate", "mc_se", "reps_completed"};
  s.data.resize(static_cast<Eigen::Index>(curve.size()), 4);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    s.data.row(static_cast<Eigen::Index>(i)) << curve[i].rho, curve[i].rate, curve[i].se, curve[i].reps_completed;
  }
  return s;
}

}  // namespace tfm::dataio
