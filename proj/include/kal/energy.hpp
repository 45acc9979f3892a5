#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kal/dynamics.hpp"
#include "kal/model.hpp"

namespace kal {

// ||(u, v, eta)||^2 in the phase space and in its regular analogue
double norm_H_sq(const SystemState& s, const ProblemSpec& spec);
double norm_H1_sq(const SystemState& s, const ProblemSpec& spec);
// same quantities by collocation quadrature of the physical fields
double norm_H_sq_physical(const SystemState& s, const ProblemSpec& spec);
double norm_H1_sq_physical(const SystemState& s, const ProblemSpec& spec);

// int G(u) dx + int h u dx
double potential_term(const SpectralField& u, const ProblemSpec& spec);
// (g(u), w) by quadrature
double source_dot(const SpectralField& u, const SpectralField& w, const ProblemSpec& spec);

double eval_I1(const SystemState& s, const ProblemSpec& spec);

struct LyapunovFunctionals {
  double A1 = 0.0;
  double B1 = 0.0;
};

LyapunovFunctionals eval_A1_B1(const SystemState& s, const ProblemSpec& spec);

// -1/2 eps' ||v||^2 + ||grad v||^2 + delta2/2 ||eta||^2_M2 + delta (f(v), v)
double dissipation_rate(const SystemState& s, const ProblemSpec& spec);

struct EnergyReport {
  double t = 0.0;
  double normH = 0.0;   // squared
  double normH1 = 0.0;  // squared
  double I1 = 0.0;
  double A1 = 0.0;
  double B1 = 0.0;
  double diss_residual = 0.0;  // 0 on the first record
  double hist_lhs = 0.0;
  double hist_rhs = 0.0;
  double dissipation = 0.0;  // D at this record, not written to CSV
};

EnergyReport evaluate_report(const SystemState& s, const ProblemSpec& spec);

// Observer that evaluates one EnergyReport per step, with the residual
// (I1^{n+1} - I1^n)/dt + D^{n+1}.
class EnergyRecorder {
 public:
  EnergyRecorder(const ProblemSpec& spec, double dt, std::size_t stride = 1)
      : spec_(&spec), dt_(dt), stride_(stride == 0 ? 1 : stride) {}

  Observer observer();
  const std::vector<EnergyReport>& reports() const { return reports_; }
  // per-step maxima, kept even when reports are thinned by the stride
  double max_residual() const { return max_residual_; }
  double max_I1_increase() const { return max_increase_; }
  double max_abs_I1() const { return max_abs_I1_; }

 private:
  const ProblemSpec* spec_;
  double dt_;
  std::size_t stride_;
  std::vector<EnergyReport> reports_;
  bool have_prev_ = false;
  double prev_I1_ = 0.0;
  double max_residual_ = -INFINITY;
  double max_increase_ = -INFINITY;
  double max_abs_I1_ = 0.0;
};

struct DissipationSummary {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double max_I1 = 0.0;
};

// recomputes residuals from consecutive reports spaced dt apart
DissipationSummary monitor_dissipation(const std::vector<EnergyReport>& reports, double dt);

struct PairConstants {
  double C_delta = 0.0;   // C~_delta
  double C2_delta = 1.0;  // C~_{2,delta}
};

struct PairPoint {
  double t = 0.0;
  double Atilde1 = 0.0;
  double E = 0.0;
};

struct PairTerm {
  std::string name;
  double value = 0.0;
};

struct PairSummary {
  double T = 0.0;
  double C_Atilde1 = 0.0;
  double Phi_T = 0.0;
  double bound_rhs = 0.0;  // 2 C/T + 2 Phi/T
  double lhs = 0.0;        // T * Atilde1(T)
  double rhs = 0.0;        // C + Phi
  bool holds = false;      // lhs <= rhs + 1e-3 (1 + |rhs|)
  double max_identity_defect = 0.0;  // max |E - 2 Atilde1| / max(1, |E|)
  std::vector<PairTerm> terms;
};

struct PairReport {
  std::vector<PairPoint> series;
  PairSummary summary;
};

// 1/2 (||grad w||^2 + eps ||w_t||^2 + ||eta||^2_M2) for the difference state
double eval_Atilde1(const SystemState& diff, const ProblemSpec& spec);
double eval_E(const SystemState& diff, const ProblemSpec& spec);

// Both trajectories must store every state on the same grid.
PairReport eval_pair(const Trajectory& traj1, const Trajectory& traj2, const ProblemSpec& spec,
                     const PairConstants& constants = {});

}  // namespace kal
