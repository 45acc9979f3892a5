#include "kal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kal/errors.hpp"

namespace kal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("KAL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::mutex mu;
  std::size_t next = 0;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SystemState sample_initial_state(const ProblemSpec& spec, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  SystemState s = zero_state(spec);
  const std::size_t K = spec.grid->n_modes();
  const std::size_t active = std::max<std::size_t>(1, K / 2);
  std::mt19937_64 gen(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < active; ++k) {
    const double sd = 1.0 / static_cast<double>(k + 1);
    s.u[k] = sd * normal(gen);
    s.v[k] = sd * normal(gen);
  }
  const double n = phase_norm(s, spec);
  if (!(n > 0.0)) throw NumericalError("sampled initial state has zero norm");
  const double scale = radius / n;
  for (std::size_t k = 0; k < K; ++k) {
    s.u[k] *= scale;
    s.v[k] *= scale;
  }
  return s;
}

std::vector<ProbeSeries> run_probe_series(const ProblemSpec& spec, const StepperConfig& cfg,
                                          const EnsembleSpec& ens) {
  if (ens.n_traj < 1) throw std::invalid_argument("ensemble needs at least one trajectory");
  for (double r : ens.radius_set)
    if (!(r > 0.0)) throw std::invalid_argument("ensemble radii must be positive");
  const std::size_t total = ens.n_traj * ens.radius_set.size();
  std::vector<ProbeSeries> out(total);
  parallel_for(total, [&](std::size_t id) {
    ProbeSeries& ps = out[id];
    ps.id = id;
    ps.radius = ens.radius_set[id / ens.n_traj];
    const SystemState init = sample_initial_state(spec, ps.radius, ens.seed * 1000003ULL + id);
    Observer ob = [&ps, &spec](const SystemState& s, std::size_t) {
      ps.t.push_back(s.t);
      ps.normH.push_back(norm_H_sq(s, spec));
    };
    try {
      simulate(spec, cfg, ens.T_final, init, {ob});
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "probe aborted in trajectory " << id << ": " << e.what();
      throw NumericalError(os.str());
    }
  });
  return out;
}

ProbeReport evaluate_probe(const std::vector<ProbeSeries>& series, double threshold_R) {
  ProbeReport rep;
  rep.threshold_R = threshold_R;
  rep.absorbed = !series.empty();
  double max_entry = 0.0;
  bool all_entered = !series.empty();
  for (const auto& ps : series) {
    ProbeEntry e;
    e.id = ps.id;
    e.radius = ps.radius;
    const double T = ps.t.empty() ? 0.0 : ps.t.back();
    std::size_t first = ps.t.size();
    for (std::size_t i = 0; i < ps.t.size(); ++i) {
      if (ps.t[i] >= 0.5 * T) e.long_time_sup = std::max(e.long_time_sup, ps.normH[i]);
      if (first == ps.t.size() && ps.normH[i] <= threshold_R) first = i;
    }
    if (first < ps.t.size()) {
      e.entry_time = ps.t[first];
      e.stayed = true;
      for (std::size_t i = first; i < ps.t.size(); ++i)
        if (ps.normH[i] > threshold_R * 1.02) {
          e.stayed = false;
          break;
        }
      max_entry = std::max(max_entry, *e.entry_time);
    } else {
      all_entered = false;
    }
    rep.absorbed = rep.absorbed && e.entry_time && e.stayed;
    rep.max_long_time_sup = std::max(rep.max_long_time_sup, e.long_time_sup);
    rep.entries.push_back(e);
  }
  if (all_entered) rep.max_entry_time = max_entry;
  return rep;
}

ProbeReport run_absorbing_probe(const ProblemSpec& spec, const StepperConfig& cfg,
                                const EnsembleSpec& ens) {
  return evaluate_probe(run_probe_series(spec, cfg, ens), ens.threshold_R);
}

PairStudy run_pair_study(const ProblemSpec& spec, const StepperConfig& cfg,
                         const SystemState& ic1, const SystemState& ic2, double T,
                         const PairConstants& constants, std::size_t stride) {
  if (stride == 0) stride = 1;
  std::vector<Trajectory> tr(2);
  const SystemState* ics[2] = {&ic1, &ic2};
  parallel_for(2, [&](std::size_t i) { tr[i] = simulate(spec, cfg, T, *ics[i], {}, stride); });
  PairStudy st;
  st.report = eval_pair(tr[0], tr[1], spec, constants);
  st.Atilde1_0 = st.report.series.front().Atilde1;
  st.Atilde1_T = st.report.series.back().Atilde1;
  return st;
}

std::vector<ConvergenceRow> run_convergence_study(const ProblemSpec& spec,
                                                  const std::vector<double>& dts, double T,
                                                  double dt_ref) {
  if (dts.empty()) throw std::invalid_argument("convergence study needs at least one dt");
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1])) throw std::invalid_argument("dts must be decreasing");
  StepperConfig ref;
  ref.dt = dt_ref;
  ref.scheme = Scheme::ReferenceRK4;
  const SystemState init = initial_state(spec);
  std::vector<SystemState> finals(dts.size() + 1);
  parallel_for(dts.size() + 1, [&](std::size_t i) {
    if (i == 0) {
      finals[0] = simulate(spec, ref, T, init).final_state;
    } else {
      StepperConfig c;
      c.dt = dts[i - 1];
      finals[i] = simulate(spec, c, T, init).final_state;
    }
  });
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    ConvergenceRow r;
    r.dt = dts[i];
    r.error = phase_norm(difference(finals[i + 1], finals[0]), spec);
    r.valid = dts[i] >= 20.0 * dt_ref * (1.0 - 1e-12);
    if (!rows.empty() && r.error > 0.0) r.ratio = rows.back().error / r.error;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kal
