#include "kal/report_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kal {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void row(std::ostream& out, std::initializer_list<double> xs) {
  bool first = true;
  for (double x : xs) {
    if (!first) out << ',';
    out << format_double(x);
    first = false;
  }
  out << '\n';
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string escape_xml(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

void write_energy_csv(const std::string& path, const std::vector<EnergyReport>& reports) {
  auto out = open_out(path);
  out << kEnergyHeader << '\n';
  for (const auto& r : reports)
    row(out, {r.t, r.normH, r.normH1, r.I1, r.A1, r.B1, r.diss_residual, r.hist_lhs, r.hist_rhs});
  finish(out, path);
}

void write_decomposition_csv(const std::string& path,
                             const std::vector<DecompositionPoint>& series) {
  auto out = open_out(path);
  out << kDecompositionHeader << '\n';
  for (const auto& p : series) row(out, {p.t, p.H1_full, p.H1_w1, p.H1_w2, p.additivity_defect});
  finish(out, path);
}

void write_pair_csv(const std::string& path, const std::vector<PairPoint>& series) {
  auto out = open_out(path);
  out << kPairHeader << '\n';
  for (const auto& p : series) row(out, {p.t, p.Atilde1, p.E});
  finish(out, path);
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  auto out = open_out(path);
  out << kConvergenceHeader << '\n';
  for (const auto& r : rows)
    out << format_double(r.dt) << ',' << format_double(r.error) << ','
        << (r.ratio ? format_double(*r.ratio) : std::string()) << ',' << (r.valid ? 1 : 0)
        << '\n';
  finish(out, path);
}

std::size_t CsvTable::index(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t i = index(name);
  std::vector<double> c;
  c.reserve(rows.size());
  for (const auto& r : rows) c.push_back(r[i]);
  return c;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> r;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (cell.empty()) {
        r.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        try {
          r.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" +
                                   cell + "'");
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (r.size() != t.header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " columns");
    t.rows.push_back(std::move(r));
  }
  return t;
}

json probe_to_json(const ProbeReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"id", e.id},
                       {"radius", e.radius},
                       {"entry_time", opt(e.entry_time)},
                       {"stayed", e.stayed},
                       {"long_time_sup", e.long_time_sup}});
  return {{"threshold_R", report.threshold_R},
          {"max_entry_time", opt(report.max_entry_time)},
          {"absorbed", report.absorbed},
          {"max_long_time_sup", report.max_long_time_sup},
          {"entries", entries}};
}

json pair_summary_to_json(const PairSummary& s) {
  json terms = json::object();
  for (const auto& t : s.terms) terms[t.name] = t.value;
  return {{"T", s.T},
          {"C_Atilde1", s.C_Atilde1},
          {"Phi_T", s.Phi_T},
          {"bound_rhs", s.bound_rhs},
          {"lhs", s.lhs},
          {"rhs", s.rhs},
          {"holds", s.holds},
          {"max_identity_defect", s.max_identity_defect},
          {"terms", terms}};
}

json RunManifest::to_json() const {
  return {{"config_digest", config_digest},
          {"tool_version", tool_version},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"command", command},
          {"outputs", outputs}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

std::string render_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels) {
  if (series.empty()) throw std::invalid_argument("empty series");
  constexpr double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 50;

  // transformed points per series
  std::vector<std::vector<std::pair<double, double>>> pts;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw std::invalid_argument("series '" + s.name + "' is empty or ragged");
    auto& p = pts.emplace_back();
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      if (labels.log_y) {
        if (y <= 0) continue;
        y = std::log10(y);
      }
      p.emplace_back(s.x[i], y);
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw std::invalid_argument("no plottable points");
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << escape_xml(labels.title) << "</text>\n";
  // axes
  o << "<line class=\"axis\" x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\""
    << fixed(left + pw) << "\" y2=\"" << fixed(top + ph) << "\" stroke=\"black\"/>\n";
  o << "<line class=\"axis\" x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\""
    << fixed(left) << "\" y2=\"" << fixed(top + ph) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    o << "<text x=\"" << fixed(X(fx)) << "\" y=\"" << fixed(top + ph + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(fx) << "</text>\n";
    const std::string ylab = labels.log_y ? "1e" + tick_label(fy) : tick_label(fy);
    o << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(Y(fy) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << ylab << "</text>\n";
  }
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 10)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(labels.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\""
    << " transform=\"rotate(-90 16 " << fixed(top + ph / 2) << ")\">"
    << escape_xml(labels.ylabel + (labels.log_y ? " (log10)" : "")) << "</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t s = 0; s < pts.size(); ++s) {
    if (pts[s].empty()) continue;
    o << "<path class=\"series\" fill=\"none\" stroke=\"" << colors[s % 5]
      << "\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < pts[s].size(); ++i)
      o << (i == 0 ? "M" : " L") << fixed(X(pts[s][i].first)) << ' '
        << fixed(Y(pts[s][i].second));
    o << "\"><title>" << escape_xml(series[s].name) << "</title></path>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void emit_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels,
              const std::string& path) {
  const std::string svg = render_svg(series, labels);
  auto out = open_out(path);
  out << svg;
  finish(out, path);
}

}  // namespace kal
