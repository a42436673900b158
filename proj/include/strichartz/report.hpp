#pragma once

// Experiment reports: CSV tables, a JSON summary with fits, SVG plots, and
// an atomic temp-dir-then-rename writer.
//
// CSV schema: experiment,N_or_T,seed,quantity,value,err_est
// Numbers are printed with %.17g so every fit can be recomputed exactly from
// the table rows. A leading '#' line carries the config hash and the
// resolved config.

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strichartz/error.hpp"
#include "strichartz/fit.hpp"

namespace strichartz {

inline constexpr const char* kArtifactVersion = "1.0.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ReportRow {
  std::string experiment;
  long long N_or_T = 0;
  std::optional<std::uint64_t> seed;
  std::string quantity;
  double value = 0.0;
  double err_est = 0.0;
};

struct Check {
  std::string experiment;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// A fitted series whose points are stored as table rows with a blank seed.
struct SeriesRef {
  std::string experiment;
  std::string quantity;
  GrowthModel model = GrowthModel::log;
};

struct ExperimentReport {
  nlohmann::json config;
  std::string config_hash;
  std::vector<std::string> experiments;  ///< in run order
  std::map<std::string, std::vector<ReportRow>> tables;
  std::map<std::string, nlohmann::json> summaries;
  std::vector<SeriesRef> series;
  std::vector<Check> checks;
  std::map<std::string, std::string> errors;

  std::string stem() const { return config_hash.substr(0, 16); }

  void add_row(ReportRow r) { tables[r.experiment].push_back(std::move(r)); }

  bool check(const std::string& experiment, const std::string& name, bool passed, const std::string& detail) {
    checks.push_back({experiment, name, passed, detail});
    return passed;
  }

  /// Adds a series' points as rows and its fit to the summary.
  void add_series(const std::string& experiment, const GrowthSeries& s, const std::vector<double>& err = {}) {
    for (std::size_t i = 0; i < s.points.size(); ++i)
      add_row({experiment, std::llround(s.points[i].x), std::nullopt, s.name, s.points[i].value,
               i < err.size() ? err[i] : 0.0});
    series.push_back({experiment, s.name, s.model});
    nlohmann::json j = {{"model", to_string(s.model)}, {"points", s.points.size()}};
    if (s.fit) j["fit"] = {{"a", s.fit->a}, {"b", s.fit->b}, {"r2", s.fit->r2}};
    summaries[experiment]["series"][s.name] = j;
  }

  bool all_passed() const {
    if (!errors.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  nlohmann::json summary_json() const {
    nlohmann::json checks_j = nlohmann::json::array();
    for (const auto& c : checks)
      checks_j.push_back({{"experiment", c.experiment}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    nlohmann::json series_j = nlohmann::json::array();
    for (const auto& s : series)
      series_j.push_back({{"experiment", s.experiment}, {"quantity", s.quantity}, {"model", to_string(s.model)}});
    return {{"environment", {{"artifact_version", kArtifactVersion}, {"config_sha256", config_hash}}},
            {"config", config},
            {"experiments", experiments},
            {"results", summaries},
            {"series", series_j},
            {"checks", checks_j},
            {"errors", errors},
            {"all_passed", all_passed()}};
  }
};

inline std::string csv_header_comment(const ExperimentReport& r) {
  return "# config_sha256=" + r.config_hash + " config=" + r.config.dump() + "\n";
}

inline std::string to_csv(const ExperimentReport& r, const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << csv_header_comment(r) << "experiment,N_or_T,seed,quantity,value,err_est\n";
  for (const auto& row : rows)
    os << row.experiment << ',' << row.N_or_T << ',' << (row.seed ? std::to_string(*row.seed) : "") << ','
       << row.quantity << ',' << format_double(row.value) << ',' << format_double(row.err_est) << '\n';
  return os.str();
}

inline std::vector<ReportRow> parse_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error("malformed CSV row: " + line);
    ReportRow r;
    r.experiment = f[0];
    r.N_or_T = std::stoll(f[1]);
    if (!f[2].empty()) r.seed = std::stoull(f[2]);
    r.quantity = f[3];
    r.value = std::strtod(f[4].c_str(), nullptr);
    r.err_est = std::strtod(f[5].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

/// Rebuilds a fitted series from table rows (blank seed, matching quantity).
inline GrowthSeries series_from_rows(const std::vector<ReportRow>& rows, const SeriesRef& ref) {
  GrowthSeries s{ref.quantity, ref.model, {}, {}};
  for (const auto& r : rows)
    if (r.experiment == ref.experiment && r.quantity == ref.quantity && !r.seed)
      s.points.push_back({static_cast<double>(r.N_or_T), r.value});
  bool positive = std::all_of(s.points.begin(), s.points.end(), [&](const GrowthPoint& p) {
    return ref.model == GrowthModel::log_window || p.x > 0.0;
  });
  if (positive) s.refit();
  return s;
}

inline std::optional<GrowthModel> model_from_string(const std::string& name) {
  for (auto m : {GrowthModel::log, GrowthModel::nlogn, GrowthModel::sqrtlog, GrowthModel::log_window})
    if (name == to_string(m)) return m;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// SVG line plots.

/// One growth series against ln N (or ln(2 + 2T)) with the fitted curve.
/// For the N ln N model the plotted quantity is value / N.
inline std::optional<std::string> render_svg(const GrowthSeries& s, const std::string& title) {
  if (s.points.empty()) return std::nullopt;
  const bool per_n = s.model == GrowthModel::nlogn;
  auto xmap = [&](double x) { return s.model == GrowthModel::log_window ? std::log(2.0 + 2.0 * x) : std::log(x); };
  auto ymap = [&](double x, double y) { return per_n ? y / x : y; };
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : s.points)
    if (s.model == GrowthModel::log_window || p.x > 0.0) pts.emplace_back(xmap(p.x), ymap(p.x, p.value));
  if (pts.empty()) return std::nullopt;

  std::vector<std::pair<double, double>> curve;
  if (s.fit) {
    const double x0 = s.points.front().x, x1 = s.points.back().x;
    for (int i = 0; i <= 100; ++i) {
      const double xs = x0 > 0.0 ? x0 * std::pow(x1 / x0, i / 100.0) : x0 + (x1 - x0) * i / 100.0;
      curve.emplace_back(xmap(xs), ymap(xs, s.fit->predict(s.model, xs)));
    }
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto* set : {&pts, &curve})
    for (auto [x, y] : *set) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax == xmin) { xmin -= 1.0; xmax += 1.0; }
  if (ymax == ymin) { ymin -= 1.0; ymax += 1.0; }
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4, yv = ymin + (ymax - ymin) * i / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << format_double(std::round(xv * 1000) / 1000) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << format_double(std::round(yv * 10000) / 10000) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << (s.model == GrowthModel::log_window ? "ln(2+2T)" : "ln N") << "</text>\n";
  if (!curve.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : curve) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1\" points=\"";
  for (auto [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
  os << "\"/>\n";
  for (auto [x, y] : pts) os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"#2c3e50\"/>\n";
  std::string legend = s.name + (per_n ? " / N" : "");
  if (s.fit)
    legend += "  fit " + std::string(to_string(s.model)) + ": a=" + format_double(std::round(s.fit->a * 1e6) / 1e6) +
              " b=" + format_double(std::round(s.fit->b * 1e6) / 1e6) +
              " R2=" + format_double(std::round(s.fit->r2 * 1e6) / 1e6);
  os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 12 << "\" font-size=\"12\">" << legend << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

/// Writes one SVG per series into dir; returns notices for skipped series.
inline std::vector<std::string> emit_plots(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::vector<std::string> notices;
  for (const auto& ref : r.series) {
    const auto it = r.tables.find(ref.experiment);
    if (it == r.tables.end()) {
      notices.push_back("no table for " + ref.experiment + "; plot skipped");
      continue;
    }
    const GrowthSeries s = series_from_rows(it->second, ref);
    const auto svg = render_svg(s, ref.experiment + ": " + ref.quantity);
    if (!svg) {
      notices.push_back("empty series " + ref.experiment + "/" + ref.quantity + "; plot skipped");
      continue;
    }
    std::ofstream(dir / (ref.experiment + "-" + ref.quantity + "-" + r.stem() + ".svg")) << *svg;
  }
  return notices;
}

/// Writes <out>/report-<stem>/ by filling a temporary sibling directory and
/// renaming it into place. Returns the final directory.
inline std::filesystem::path write_report(const ExperimentReport& r, const std::filesystem::path& out,
                                          bool plots = true) {
  namespace fs = std::filesystem;
  fs::create_directories(out);
  const fs::path final_dir = out / ("report-" + r.stem());
  const fs::path tmp = out / (".tmp-report-" + r.stem());
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  for (const auto& [exp, rows] : r.tables)
    std::ofstream(tmp / (exp + "-" + r.stem() + ".csv")) << to_csv(r, rows);
  std::ofstream(tmp / ("summary-" + r.stem() + ".json")) << r.summary_json().dump(2) << '\n';
  if (plots) emit_plots(r, tmp);
  fs::remove_all(final_dir);
  fs::rename(tmp, final_dir);
  return final_dir;
}

/// Loads tables and series definitions back from a written report directory.
inline ExperimentReport read_report(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  ExperimentReport r;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("summary-", 0) == 0 && entry.path().extension() == ".json") {
      std::ifstream in(entry.path());
      const auto j = nlohmann::json::parse(in);
      r.config = j.at("config");
      r.config_hash = j.at("environment").at("config_sha256");
      for (const auto& s : j.at("series")) {
        const auto model = model_from_string(s.at("model"));
        if (model) r.series.push_back({s.at("experiment"), s.at("quantity"), *model});
      }
      for (auto it = j.at("results").begin(); it != j.at("results").end(); ++it) r.summaries[it.key()] = it.value();
    } else if (entry.path().extension() == ".csv") {
      std::ifstream in(entry.path());
      for (auto& row : parse_csv(in)) r.tables[row.experiment].push_back(row);
    }
  }
  if (r.config_hash.empty()) throw Error("no summary JSON in " + dir.string());
  return r;
}

}  // namespace strichartz
