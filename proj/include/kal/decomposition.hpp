#pragma once

#include <cstddef>
#include <vector>

#include "kal/dynamics.hpp"
#include "kal/model.hpp"

namespace kal {

// full solution w = w1 + w2: part1 carries the data and no forcing, part2
// starts at zero and carries the forcing of the full solution
struct TriState {
  SystemState full;
  SystemState part1;
  SystemState part2;
};

TriState make_tristate(const ProblemSpec& spec, const SystemState& initial);

TriState step_decomposed(const TriState& tri, const ProblemSpec& spec, const StepperConfig& cfg);

// ||(w1 + w2, v1 + v2, eta_a + eta_b) - (w, v, eta)||_H
double additivity_defect(const TriState& tri, const ProblemSpec& spec);

struct DecompositionPoint {
  double t = 0.0;
  double H1_full = 0.0;  // squared norms
  double H1_w1 = 0.0;
  double H1_w2 = 0.0;
  double additivity_defect = 0.0;
  double normH_full = 0.0;  // ||full||_H, not squared
  double hist_a_residual = 0.0;  // history check on eta_a at M3
  double hist_a_rhs = 0.0;
};

struct DecompositionRun {
  std::vector<DecompositionPoint> series;  // every `stride` steps
  double max_relative_defect = 0.0;       // max defect / (1 + ||full||_H), all steps
  double min_hist_margin = 0.0;           // min residual / (1 + rhs), all steps
};

DecompositionRun run_decomposition(const ProblemSpec& spec, const StepperConfig& cfg,
                                   double T_final, const SystemState& initial,
                                   std::size_t stride = 1);

struct DecayFit {
  double rate = 0.0;
  double floor = 0.0;
  double r2 = 0.0;
  std::size_t n_fit = 0;  // points used in the log fit
};

// y ~ y0 e^{-rate t} + floor. floor is the mean over the last floor_window
// fraction; the rate is a log-linear fit over the leading points where
// y - floor still exceeds transient_cut * (y0 - floor).
DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y,
                               double floor_window = 0.1, double transient_cut = 1e-2);

struct W2BoundReport {
  double sup_after_burnin = 0.0;
  double sup_full = 0.0;
  double final_value = 0.0;
  // false when the last tenth of the series climbs above everything before it
  bool bounded = true;
};

W2BoundReport check_w2_bound(const std::vector<double>& t, const std::vector<double>& y,
                             double burnin = 0.0);

}  // namespace kal
