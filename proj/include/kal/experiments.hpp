#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kal/dynamics.hpp"
#include "kal/energy.hpp"
#include "kal/model.hpp"

namespace kal {

// worker count: KAL_THREADS if set, else hardware concurrency
std::size_t worker_count();

// runs fn(0..n-1) on up to worker_count() threads; rethrows the first error
// by index order
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct EnsembleSpec {
  std::size_t n_traj = 10;  // per radius
  std::vector<double> radius_set{1.0, 10.0};
  std::uint64_t seed = 1;
  double T_final = 40.0;
  double threshold_R = 0.0;  // compared against ||.||_H^2
};

// Random initial data with coefficient variance k^{-2}, scaled so that
// ||(u0, u1, 0)||_H = radius.
SystemState sample_initial_state(const ProblemSpec& spec, double radius, std::uint64_t seed);

struct ProbeEntry {
  std::size_t id = 0;
  double radius = 0.0;
  std::optional<double> entry_time;  // first time ||.||_H^2 <= threshold_R
  bool stayed = false;               // never above threshold_R * 1.02 after entry
  double long_time_sup = 0.0;        // sup of ||.||_H^2 over t >= T_final / 2
};

struct ProbeReport {
  double threshold_R = 0.0;
  std::vector<ProbeEntry> entries;
  std::optional<double> max_entry_time;  // empty if some trajectory never entered
  bool absorbed = false;                 // every trajectory entered and stayed
  double max_long_time_sup = 0.0;
};

// ||.||_H^2 at every step of one ensemble member
struct ProbeSeries {
  std::size_t id = 0;
  double radius = 0.0;
  std::vector<double> t;
  std::vector<double> normH;
};

// ids run over radius_set first index, then trajectory index
std::vector<ProbeSeries> run_probe_series(const ProblemSpec& spec, const StepperConfig& cfg,
                                          const EnsembleSpec& ens);

ProbeReport evaluate_probe(const std::vector<ProbeSeries>& series, double threshold_R);

ProbeReport run_absorbing_probe(const ProblemSpec& spec, const StepperConfig& cfg,
                                const EnsembleSpec& ens);

struct PairStudy {
  PairReport report;
  double Atilde1_0 = 0.0;
  double Atilde1_T = 0.0;
};

PairStudy run_pair_study(const ProblemSpec& spec, const StepperConfig& cfg,
                         const SystemState& ic1, const SystemState& ic2, double T,
                         const PairConstants& constants = {}, std::size_t stride = 1);

struct ConvergenceRow {
  double dt = 0.0;
  double error = 0.0;
  std::optional<double> ratio;  // error(previous dt) / error(dt)
  bool valid = true;            // false when dt is not at least 20x the reference dt
};

std::vector<ConvergenceRow> run_convergence_study(const ProblemSpec& spec,
                                                  const std::vector<double>& dts, double T,
                                                  double dt_ref);

}  // namespace kal
