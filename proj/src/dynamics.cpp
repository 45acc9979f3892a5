#include "kal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kal/errors.hpp"

namespace kal {

namespace {

double euclid_sq(const SystemState& s) {
  double r = 0.0;
  for (double x : s.u.coeffs) r += x * x;
  for (double x : s.v.coeffs) r += x * x;
  for (double x : s.eta.raw()) r += x * x;
  return r;
}

double eps_checked(const ProblemSpec& spec, double t) {
  const double e = spec.eps.value(t);
  if (!(e > 0.0)) {
    std::ostringstream os;
    os << "eps(t) = " << e << " is not positive at t = " << t;
    throw NumericalError(os.str());
  }
  return e;
}

// x + a * d, component-wise
SystemState axpy(const SystemState& x, double a, const StateDerivative& d) {
  SystemState r = x;
  for (std::size_t k = 0; k < r.u.size(); ++k) {
    r.u[k] += a * d.du[k];
    r.v[k] += a * d.dv[k];
  }
  auto& e = r.eta.raw();
  const auto& de = d.deta.raw();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += a * de[i];
  return r;
}

// per-mode 2x2 backward-Euler solve:
// u' = u + dt v',  e (v' - v) = dt (-c lam u' - lam v' - mem + F)
void solve_modes(const SystemState& s, std::span<const double> lam, double e, double dt,
                 double c, const SpectralField& F, const SpectralField& mem, SpectralField& u1,
                 SpectralField& v1) {
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const double den = e + dt * lam[k] + dt * dt * c * lam[k];
    v1[k] = (e * s.v[k] + dt * (F[k] - mem[k] - c * lam[k] * s.u[k])) / den;
    u1[k] = s.u[k] + dt * v1[k];
  }
}

}  // namespace

SystemState zero_state(const ProblemSpec& spec, double t) {
  const std::size_t K = spec.grid->n_modes();
  SystemState s;
  s.t = t;
  s.u = SpectralField(K);
  s.v = SpectralField(K);
  s.eta = HistoryField(spec.history->size(), K);
  return s;
}

SystemState initial_state(const ProblemSpec& spec) {
  SystemState s = zero_state(spec);
  if (spec.u0.size() != s.u.size() || spec.u1.size() != s.v.size())
    throw ConfigError("initial data does not match the mode count");
  s.u = spec.u0;
  s.v = spec.u1;
  return s;
}

double kirchhoff_coefficient(const SpectralField& u, const ProblemSpec& spec) {
  const double g2 = dot_H2(u, u, *spec.grid);
  return 1.0 + std::pow(g2, 0.5 * spec.m);
}

SpectralField explicit_forcing(const SpectralField& u, const SpectralField& v,
                               const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  auto up = to_physical(u, grid);
  auto vp = to_physical(v, grid);
  std::vector<double> w(up.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    w[j] = spec.nonlin.g.value(up[j]) - spec.delta * spec.nonlin.f.value(vp[j]);
  SpectralField F = from_physical(w, grid);
  if (spec.h.size() != F.size()) throw ConfigError("forcing h does not match the mode count");
  for (std::size_t k = 0; k < F.size(); ++k) F[k] += spec.h[k];
  return F;
}

StateDerivative rhs(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const double e = eps_checked(spec, s.t);
  const double c = kirchhoff_coefficient(s.u, spec);
  const SpectralField F = explicit_forcing(s.u, s.v, spec);
  const SpectralField mem = memory_term(s.eta, *spec.history, grid);
  const auto lam = grid.eigenvalues();
  StateDerivative d;
  d.du = s.v;
  d.dv = SpectralField(s.u.size());
  for (std::size_t k = 0; k < s.u.size(); ++k)
    d.dv[k] = (-c * lam[k] * s.u[k] - lam[k] * s.v[k] - mem[k] + F[k]) / e;
  d.deta = transport_rhs(s.eta, s.v, *spec.history);
  return d;
}

SystemState advance_frozen(const SystemState& s, const ProblemSpec& spec, double dt,
                           double c, const SpectralField& F) {
  const auto& grid = *spec.grid;
  const double e = eps_checked(spec, s.t + dt);
  const SpectralField mem = memory_term(s.eta, *spec.history, grid);
  const auto lam = grid.eigenvalues();
  SystemState r;
  r.t = s.t + dt;
  r.u = SpectralField(s.u.size());
  r.v = SpectralField(s.u.size());
  solve_modes(s, lam, e, dt, c, F, mem, r.u, r.v);
  r.eta = advance_transport_implicit(s.eta, r.v, dt, *spec.history);
  return r;
}

SystemState step_imex(const SystemState& s, const ProblemSpec& spec, const StepperConfig& cfg,
                      ImexStepInfo* info) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double dt = cfg.dt;
  const SpectralField F = explicit_forcing(s.u, s.v, spec);
  const auto& grid = *spec.grid;
  const double e = eps_checked(spec, s.t + dt);
  const SpectralField mem = memory_term(s.eta, *spec.history, grid);
  const auto lam = grid.eigenvalues();
  const std::size_t K = s.u.size();

  SpectralField u1(K), v1(K);
  auto solve = [&](double c) { solve_modes(s, lam, e, dt, c, F, mem, u1, v1); };

  double c = kirchhoff_coefficient(s.u, spec);
  solve(c);
  std::vector<double> trace;
  int it = 0;
  if (cfg.newton_max_iter > 0) {
    bool converged = false;
    for (; it < cfg.newton_max_iter; ++it) {
      const double c_new = kirchhoff_coefficient(u1, spec);
      const double rel = std::abs(c_new - c) / c;
      trace.push_back(rel);
      if (!std::isfinite(rel)) break;
      if (rel <= cfg.newton_tol) {
        converged = true;
        break;
      }
      c = c_new;
      solve(c);
    }
    if (!converged) {
      std::ostringstream os;
      os << "Kirchhoff fixed point did not converge at t = " << s.t << " after " << it
         << " sweeps; relative changes:";
      for (double r : trace) os << ' ' << r;
      throw NumericalError(os.str());
    }
  }

  SystemState r;
  r.t = s.t + dt;
  r.u = std::move(u1);
  r.v = std::move(v1);
  r.eta = advance_transport_implicit(s.eta, r.v, dt, *spec.history);
  if (info) {
    info->coefficient = c;
    info->forcing = F;
    info->iterations = it;
    info->trace = std::move(trace);
  }
  return r;
}

double stability_bound(const ProblemSpec& spec, const SystemState& s, double dt_hint) {
  const auto& grid = *spec.grid;
  const double lamK = grid.eigenvalues().back();
  const double e = std::min(eps_checked(spec, s.t), eps_checked(spec, s.t + dt_hint));
  const double c = kirchhoff_coefficient(s.u, spec);
  const double rho_wave = lamK / e + std::sqrt(c * lamK / e) + spec.kernel.delta1() * lamK / e;
  const double ds_min = *std::min_element(spec.history->upwind_ds.begin(),
                                          spec.history->upwind_ds.end());
  const double rho = std::max(rho_wave, 1.0 / ds_min);
  // real-axis stability limit of classical RK4
  return 2.78 / rho;
}

SystemState step_reference(const SystemState& s, const ProblemSpec& spec,
                           const StepperConfig& cfg) {
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double bound = stability_bound(spec, s, dt);
  if (dt > bound) {
    std::ostringstream os;
    os << "reference dt = " << dt << " exceeds the explicit stability bound " << bound;
    throw NumericalError(os.str());
  }
  const StateDerivative k1 = rhs(s, spec);
  SystemState s2 = axpy(s, 0.5 * dt, k1);
  s2.t = s.t + 0.5 * dt;
  const StateDerivative k2 = rhs(s2, spec);
  SystemState s3 = axpy(s, 0.5 * dt, k2);
  s3.t = s.t + 0.5 * dt;
  const StateDerivative k3 = rhs(s3, spec);
  SystemState s4 = axpy(s, dt, k3);
  s4.t = s.t + dt;
  const StateDerivative k4 = rhs(s4, spec);

  SystemState r = s;
  r.t = s.t + dt;
  const double w = dt / 6.0;
  for (std::size_t k = 0; k < r.u.size(); ++k) {
    r.u[k] += w * (k1.du[k] + 2 * k2.du[k] + 2 * k3.du[k] + k4.du[k]);
    r.v[k] += w * (k1.dv[k] + 2 * k2.dv[k] + 2 * k3.dv[k] + k4.dv[k]);
  }
  auto& e = r.eta.raw();
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] += w * (k1.deta.raw()[i] + 2 * k2.deta.raw()[i] + 2 * k3.deta.raw()[i] +
                 k4.deta.raw()[i]);

  const double before = euclid_sq(s), after = euclid_sq(r);
  if (before > 1e-300 && !(after <= 100.0 * before)) {
    std::ostringstream os;
    os << "reference integrator unstable at t = " << s.t << ": norm grew by "
       << std::sqrt(after / before) << "x in one step";
    throw NumericalError(os.str());
  }
  return r;
}

SystemState step(const SystemState& s, const ProblemSpec& spec, const StepperConfig& cfg) {
  return cfg.scheme == Scheme::ImexEuler ? step_imex(s, spec, cfg) : step_reference(s, spec, cfg);
}

std::size_t step_count(double T_final, double dt) {
  if (!(T_final >= 0.0)) throw std::invalid_argument("T_final must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double n = T_final / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-6 * std::max(1.0, n))
    throw std::invalid_argument("T_final must be a whole number of steps");
  return static_cast<std::size_t>(r);
}

bool all_finite(const SystemState& s) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(s.u.coeffs) && ok(s.v.coeffs) && ok(s.eta.raw());
}

Trajectory simulate(const ProblemSpec& spec, const StepperConfig& cfg, double T_final,
                    const SystemState& initial, const std::vector<Observer>& observers,
                    std::size_t store_stride) {
  Trajectory tr;
  tr.dt = cfg.dt;
  tr.n_steps = step_count(T_final, cfg.dt);
  tr.stride = store_stride;
  SystemState s = initial;
  const double t0 = initial.t;
  for (const auto& ob : observers) ob(s, 0);
  if (store_stride > 0) tr.states.push_back(s);
  for (std::size_t n = 1; n <= tr.n_steps; ++n) {
    s = step(s, spec, cfg);
    s.t = t0 + static_cast<double>(n) * cfg.dt;
    if (!all_finite(s)) {
      std::ostringstream os;
      os << "non-finite state at step " << n << " (t = " << s.t << ")";
      throw NumericalError(os.str());
    }
    for (const auto& ob : observers) ob(s, n);
    if (store_stride > 0 && n % store_stride == 0) tr.states.push_back(s);
  }
  tr.final_state = std::move(s);
  return tr;
}

Trajectory simulate(const ProblemSpec& spec, const StepperConfig& cfg, double T_final,
                    const std::vector<Observer>& observers, std::size_t store_stride) {
  return simulate(spec, cfg, T_final, initial_state(spec), observers, store_stride);
}

double phase_norm(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const double r = dot_H2(s.u, s.u, grid) + spec.eps.value(s.t) * dot_L2(s.v, s.v) +
                   weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M2);
  return std::sqrt(std::max(r, 0.0));
}

SystemState difference(const SystemState& a, const SystemState& b) {
  SystemState r = a;
  r.u = a.u - b.u;
  r.v = a.v - b.v;
  auto& e = r.eta.raw();
  const auto& eb = b.eta.raw();
  if (e.size() != eb.size()) throw std::invalid_argument("history size mismatch");
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= eb[i];
  return r;
}

}  // namespace kal
