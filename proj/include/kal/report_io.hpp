#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kal/decomposition.hpp"
#include "kal/energy.hpp"
#include "kal/experiments.hpp"

namespace kal {

inline constexpr const char* kToolVersion = "0.1.0";

// Column orders are fixed; doubles are written with 17 significant digits.
inline constexpr const char* kEnergyHeader =
    "t,normH,normH1,I1,A1,B1,diss_residual,hist_lhs,hist_rhs";
inline constexpr const char* kDecompositionHeader = "t,H1_full,H1_w1,H1_w2,additivity_defect";
inline constexpr const char* kPairHeader = "t,Atilde1,E";
inline constexpr const char* kConvergenceHeader = "dt,error,ratio,valid";
inline constexpr const char* kProbeSeriesHeader = "id,radius,t,normH";

std::string format_double(double x);

void write_energy_csv(const std::string& path, const std::vector<EnergyReport>& reports);
void write_decomposition_csv(const std::string& path,
                             const std::vector<DecompositionPoint>& series);
void write_pair_csv(const std::string& path, const std::vector<PairPoint>& series);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // throws std::invalid_argument for an unknown column
  std::size_t index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

// numeric CSV only; empty cells read as NaN
CsvTable read_csv(const std::string& path);

nlohmann::json probe_to_json(const ProbeReport& report);
nlohmann::json pair_summary_to_json(const PairSummary& s);

struct RunManifest {
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;
  std::string started_at;
  std::string finished_at;
  std::string command;
  std::vector<std::string> outputs;  // relative to the run directory

  nlohmann::json to_json() const;
};

std::string utc_timestamp();

void write_json(const std::string& path, const nlohmann::json& j);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotLabels {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_y = false;
};

// One <path> per series with class "series". Non-positive values are dropped
// on a log axis. Throws std::invalid_argument on empty input.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels);
void emit_svg(const std::vector<PlotSeries>& series, const PlotLabels& labels,
              const std::string& path);

}  // namespace kal
