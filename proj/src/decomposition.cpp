#include "kal/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kal/energy.hpp"
#include "kal/errors.hpp"

namespace kal {

TriState make_tristate(const ProblemSpec& spec, const SystemState& initial) {
  TriState tri;
  tri.full = initial;
  tri.part1 = initial;
  tri.part2 = zero_state(spec, initial.t);
  return tri;
}

TriState step_decomposed(const TriState& tri, const ProblemSpec& spec, const StepperConfig& cfg) {
  ImexStepInfo info;
  TriState out;
  out.full = step_imex(tri.full, spec, cfg, &info);
  // same coefficient and same explicit forcing as the full step
  const SpectralField none(info.forcing.size());
  out.part1 = advance_frozen(tri.part1, spec, cfg.dt, info.coefficient, none);
  out.part2 = advance_frozen(tri.part2, spec, cfg.dt, info.coefficient, info.forcing);
  return out;
}

double additivity_defect(const TriState& tri, const ProblemSpec& spec) {
  SystemState sum = tri.part1;
  sum.u = tri.part1.u + tri.part2.u;
  sum.v = tri.part1.v + tri.part2.v;
  auto& e = sum.eta.raw();
  const auto& eb = tri.part2.eta.raw();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
  return phase_norm(difference(sum, tri.full), spec);
}

DecompositionRun run_decomposition(const ProblemSpec& spec, const StepperConfig& cfg,
                                   double T_final, const SystemState& initial,
                                   std::size_t stride) {
  if (stride == 0) stride = 1;
  const std::size_t n = step_count(T_final, cfg.dt);
  DecompositionRun run;
  run.min_hist_margin = INFINITY;
  TriState tri = make_tristate(spec, initial);
  const double t0 = initial.t;

  auto record = [&](std::size_t step) {
    DecompositionPoint p;
    p.t = tri.full.t;
    p.H1_full = norm_H1_sq(tri.full, spec);
    p.H1_w1 = norm_H1_sq(tri.part1, spec);
    p.H1_w2 = norm_H1_sq(tri.part2, spec);
    p.additivity_defect = additivity_defect(tri, spec);
    p.normH_full = phase_norm(tri.full, spec);
    const auto hd = check_history_dissipation(tri.part1.eta, *spec.history, *spec.grid,
                                              spec.kernel, HistoryLevel::M3);
    p.hist_a_residual = hd.residual;
    p.hist_a_rhs = hd.rhs;
    run.max_relative_defect =
        std::max(run.max_relative_defect, p.additivity_defect / (1.0 + p.normH_full));
    run.min_hist_margin = std::min(run.min_hist_margin, hd.residual / (1.0 + hd.rhs));
    if (step % stride == 0) run.series.push_back(p);
  };

  record(0);
  for (std::size_t k = 1; k <= n; ++k) {
    tri = step_decomposed(tri, spec, cfg);
    const double t = t0 + static_cast<double>(k) * cfg.dt;
    tri.full.t = tri.part1.t = tri.part2.t = t;
    if (!all_finite(tri.full) || !all_finite(tri.part1) || !all_finite(tri.part2)) {
      std::ostringstream os;
      os << "non-finite decomposition state at step " << k << " (t = " << t << ")";
      throw NumericalError(os.str());
    }
    record(k);
  }
  return run;
}

DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y,
                               double floor_window, double transient_cut) {
  if (t.size() != y.size()) throw std::invalid_argument("t and y differ in length");
  if (y.size() < 10) throw std::invalid_argument("decay fit needs at least 10 points");
  if (!(floor_window > 0.0 && floor_window < 1.0))
    throw std::invalid_argument("floor_window must lie in (0, 1)");
  for (double v : y)
    if (!(v >= 0.0)) throw std::invalid_argument("decay fit needs a non-negative series");

  const std::size_t n = y.size();
  const std::size_t nw =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(floor_window * n)));
  double c = 0.0;
  for (std::size_t i = n - nw; i < n; ++i) c += y[i];
  c /= static_cast<double>(nw);

  DecayFit fit;
  fit.floor = c;
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - c));
  if (spread <= 1e-12 * std::max(1.0, std::abs(c))) {
    fit.rate = 0.0;
    fit.r2 = 1.0;
    return fit;
  }

  const double y0 = y.front() - c;
  if (!(y0 > 0.0)) throw NumericalError("decay fit degenerate: series starts at or below its floor");
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < n - nw; ++i) {
    const double r = y[i] - c;
    if (!(r > transient_cut * y0)) break;
    xs.push_back(t[i]);
    ls.push_back(std::log(r));
  }
  if (xs.size() < 3) throw NumericalError("decay fit degenerate: fewer than 3 transient points");

  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ls[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ls[i] - my);
    syy += (ls[i] - my) * (ls[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("decay fit degenerate: no time spread");
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.n_fit = xs.size();
  return fit;
}

W2BoundReport check_w2_bound(const std::vector<double>& t, const std::vector<double>& y,
                             double burnin) {
  if (t.size() != y.size()) throw std::invalid_argument("t and y differ in length");
  W2BoundReport r;
  if (y.empty()) return r;
  const std::size_t n = y.size();
  const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
  double sup_tail = 0.0, sup_before = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) {
      r.bounded = false;
      r.sup_full = r.sup_after_burnin = INFINITY;
      r.final_value = y.back();
      return r;
    }
    r.sup_full = std::max(r.sup_full, y[i]);
    if (t[i] >= burnin) {
      r.sup_after_burnin = std::max(r.sup_after_burnin, y[i]);
      if (i >= tail_start) sup_tail = std::max(sup_tail, y[i]);
      else sup_before = std::max(sup_before, y[i]);
    }
  }
  r.final_value = y.back();
  r.bounded = sup_tail <= 1.05 * sup_before;
  return r;
}

}  // namespace kal
