#include "kal/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kal {

namespace {

// -Lap f as a spectral field, i.e. lambda_k f_k
SpectralField neg_laplacian(const SpectralField& f, const DomainGrid& grid) {
  SpectralField r = f;
  const auto lam = grid.eigenvalues();
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= lam[k];
  return r;
}

double grad_sq_physical(const SpectralField& f, const DomainGrid& grid) {
  auto g = gradient_physical(f, grid);
  for (double& x : g) x *= x;
  return quadrature_closed(g, grid);
}

// (eta, u)_M2 = sum_j w_j (grad eta_j, grad u)
double history_dot(const HistoryField& eta, const SpectralField& u, const ProblemSpec& spec) {
  return dot_L2(memory_term(eta, *spec.history, *spec.grid), u);
}

// trapezoid over a uniform grid of spacing h
double trapz(const std::vector<double>& q, double h) {
  if (q.size() < 2) return 0.0;
  double s = 0.5 * (q.front() + q.back());
  for (std::size_t i = 1; i + 1 < q.size(); ++i) s += q[i];
  return s * h;
}

// int_0^T int_r^T q(tau) dtau dr via the suffix integral Q(r) = int_r^T q
double nested_trapz(const std::vector<double>& q, double h) {
  const std::size_t n = q.size();
  if (n < 2) return 0.0;
  std::vector<double> Q(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) Q[i] = Q[i + 1] + 0.5 * h * (q[i] + q[i + 1]);
  return trapz(Q, h);
}

}  // namespace

double norm_H_sq(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  return dot_H2(s.u, s.u, grid) + spec.eps.value(s.t) * dot_L2(s.v, s.v) +
         weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M2);
}

double norm_H1_sq(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  return dot_H3(s.u, s.u, grid) + spec.eps.value(s.t) * dot_H2(s.v, s.v, grid) +
         weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M3);
}

double norm_H_sq_physical(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const auto& hg = *spec.history;
  double hist = 0.0;
  for (std::size_t j = 0; j < hg.size(); ++j)
    hist += hg.weights[j] * grad_sq_physical(s.eta.snapshot_field(j), grid);
  return grad_sq_physical(s.u, grid) +
         spec.eps.value(s.t) * quadrature_L2_sq(to_physical(s.v, grid), grid) + hist;
}

double norm_H1_sq_physical(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const auto& hg = *spec.history;
  double hist = 0.0;
  for (std::size_t j = 0; j < hg.size(); ++j)
    hist += hg.weights[j] *
            quadrature_L2_sq(to_physical(neg_laplacian(s.eta.snapshot_field(j), grid), grid), grid);
  return quadrature_L2_sq(to_physical(neg_laplacian(s.u, grid), grid), grid) +
         spec.eps.value(s.t) * grad_sq_physical(s.v, grid) + hist;
}

double potential_term(const SpectralField& u, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  auto up = to_physical(u, grid);
  double sG = 0.0;
  for (double x : up) sG += spec.nonlin.G(x);
  return grid.spacing() * sG + dot_L2(spec.h, u);
}

double source_dot(const SpectralField& u, const SpectralField& w, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  auto up = to_physical(u, grid);
  auto wp = to_physical(w, grid);
  double s = 0.0;
  for (std::size_t j = 0; j < up.size(); ++j) s += spec.nonlin.g.value(up[j]) * wp[j];
  return grid.spacing() * s;
}

double eval_I1(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const double g2 = dot_H2(s.u, s.u, grid);
  const double m = spec.m;
  return 0.5 * spec.eps.value(s.t) * dot_L2(s.v, s.v) + 0.5 * g2 +
         std::pow(g2, 0.5 * (m + 2.0)) / (m + 2.0) +
         0.5 * weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M2) -
         potential_term(s.u, spec);
}

LyapunovFunctionals eval_A1_B1(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  const double al = spec.lyapunov.alpha;
  const double m = spec.m;
  const double e = spec.eps.value(s.t);
  const double de = spec.eps.derivative(s.t);
  const SpectralField vaux = s.v + al * s.u;
  const double u2 = dot_L2(s.u, s.u);
  const double g2 = dot_H2(s.u, s.u, grid);
  const double gm2 = std::pow(g2, 0.5 * (m + 2.0));
  const double eta2 = weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M2);
  const double vaux2 = dot_L2(vaux, vaux);

  LyapunovFunctionals r;
  r.A1 = 0.5 * e * vaux2 - 0.5 * al * al * e * u2 + 0.5 * g2 + gm2 / (m + 2.0) +
         0.5 * al * g2 + 0.5 * eta2 - potential_term(s.u, spec);
  r.B1 = -0.5 * de * vaux2 - al * e * dot_L2(s.v, s.v) + 0.5 * al * al * de * u2 + al * g2 +
         al * gm2 + dot_H2(s.v, s.v, grid) + 0.5 * spec.kernel.delta2() * eta2 +
         al * history_dot(s.eta, s.u, spec) - al * source_dot(s.u, s.u, spec) -
         al * dot_L2(spec.h, s.u);
  return r;
}

double dissipation_rate(const SystemState& s, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  auto vp = to_physical(s.v, grid);
  double fv = 0.0;
  for (double x : vp) fv += spec.nonlin.f.value(x) * x;
  fv *= grid.spacing();
  return -0.5 * spec.eps.derivative(s.t) * dot_L2(s.v, s.v) + dot_H2(s.v, s.v, grid) +
         0.5 * spec.kernel.delta2() *
             weighted_norm_sq(s.eta, *spec.history, grid, HistoryLevel::M2) +
         spec.delta * fv;
}

EnergyReport evaluate_report(const SystemState& s, const ProblemSpec& spec) {
  EnergyReport r;
  r.t = s.t;
  r.normH = norm_H_sq(s, spec);
  r.normH1 = norm_H1_sq(s, spec);
  r.I1 = eval_I1(s, spec);
  const auto ab = eval_A1_B1(s, spec);
  r.A1 = ab.A1;
  r.B1 = ab.B1;
  const auto hd = check_history_dissipation(s.eta, *spec.history, *spec.grid, spec.kernel);
  r.hist_lhs = hd.lhs;
  r.hist_rhs = hd.rhs;
  r.dissipation = dissipation_rate(s, spec);
  return r;
}

Observer EnergyRecorder::observer() {
  return [this](const SystemState& s, std::size_t step) {
    EnergyReport r = evaluate_report(s, *spec_);
    if (have_prev_) {
      r.diss_residual = (r.I1 - prev_I1_) / dt_ + r.dissipation;
      max_residual_ = std::max(max_residual_, r.diss_residual);
      max_increase_ = std::max(max_increase_, (r.I1 - prev_I1_) / (1.0 + std::abs(r.I1)));
    }
    max_abs_I1_ = std::max(max_abs_I1_, std::abs(r.I1));
    prev_I1_ = r.I1;
    have_prev_ = true;
    if (step % stride_ == 0) reports_.push_back(r);
  };
}

DissipationSummary monitor_dissipation(const std::vector<EnergyReport>& reports, double dt) {
  DissipationSummary d;
  if (reports.empty()) return d;
  d.max_residual = -INFINITY;
  d.max_I1 = std::abs(reports.front().I1);
  for (std::size_t n = 1; n < reports.size(); ++n) {
    const double r = (reports[n].I1 - reports[n - 1].I1) / dt + reports[n].dissipation;
    d.residuals.push_back(r);
    d.max_residual = std::max(d.max_residual, r);
    d.max_I1 = std::max(d.max_I1, std::abs(reports[n].I1));
  }
  if (d.residuals.empty()) d.max_residual = 0.0;
  return d;
}

double eval_Atilde1(const SystemState& d, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  return 0.5 * dot_H2(d.u, d.u, grid) + 0.5 * spec.eps.value(d.t) * dot_L2(d.v, d.v) +
         0.5 * weighted_norm_sq(d.eta, *spec.history, grid, HistoryLevel::M2);
}

double eval_E(const SystemState& d, const ProblemSpec& spec) {
  const auto& grid = *spec.grid;
  return dot_H2(d.u, d.u, grid) + spec.eps.value(d.t) * dot_L2(d.v, d.v) +
         weighted_norm_sq(d.eta, *spec.history, grid, HistoryLevel::M2);
}

PairReport eval_pair(const Trajectory& t1, const Trajectory& t2, const ProblemSpec& spec,
                     const PairConstants& C) {
  if (t1.states.size() != t2.states.size() || t1.stride != t2.stride || t1.dt != t2.dt ||
      t1.states.size() < 2)
    throw std::invalid_argument("pair trajectories are not on the same stored time grid");
  const std::size_t n = t1.states.size();
  for (std::size_t i = 0; i < n; ++i)
    if (t1.states[i].t != t2.states[i].t)
      throw std::invalid_argument("pair trajectories are not on the same stored time grid");

  const auto& grid = *spec.grid;
  const double m = spec.m;
  const double h = t1.dt * static_cast<double>(t1.stride);
  const double p1 = spec.nonlin.p1;
  const double q_exp = (p1 + 1.0) / p1;
  const double hx = grid.spacing();

  PairReport rep;
  rep.series.reserve(n);
  std::vector<double> qa(n), qb(n), qc(n), qd(n), qe(n), qf1(n), qf2(n), qu(n), qg1(n), qg2(n);
  double max_def = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SystemState& s1 = t1.states[i];
    const SystemState& s2 = t2.states[i];
    const SystemState d = difference(s1, s2);
    const double A = eval_Atilde1(d, spec);
    const double E = eval_E(d, spec);
    rep.series.push_back({s1.t, A, E});
    max_def = std::max(max_def, std::abs(E - 2.0 * A) / std::max(1.0, std::abs(E)));

    const double n1 = std::sqrt(dot_H2(s1.u, s1.u, grid));
    const double n2 = std::sqrt(dot_H2(s2.u, s2.u, grid));
    const double c1 = std::pow(n1, m), c2 = std::pow(n2, m);

    // int grad(u1)_t (grad ubar)^2 dx on the closed grid
    auto gv1 = gradient_physical(s1.v, grid);
    auto gd = gradient_physical(d.u, grid);
    for (std::size_t j = 0; j < gv1.size(); ++j) gv1[j] *= gd[j] * gd[j];
    qa[i] = std::pow(n1, m - 1.0) * quadrature_closed(gv1, grid);
    qb[i] = (c1 - c2) * dot_H2(s2.u, d.v, grid);
    qc[i] = c1 * dot_H2(d.u, d.u, grid);
    qd[i] = spec.eps.derivative(s1.t) * dot_L2(d.u, d.v);
    qe[i] = (c1 - c2) * dot_H2(s2.u, d.u, grid);

    auto v1p = to_physical(s1.v, grid);
    auto v2p = to_physical(s2.v, grid);
    auto dup = to_physical(d.u, grid);
    auto dvp = to_physical(d.v, grid);
    auto u1p = to_physical(s1.u, grid);
    auto u2p = to_physical(s2.u, grid);
    double f1 = 0, f2 = 0, uu = 0, g1 = 0, g2 = 0;
    for (std::size_t j = 0; j < v1p.size(); ++j) {
      f1 += std::pow(std::abs(spec.nonlin.f.value(v1p[j])), q_exp);
      f2 += std::pow(std::abs(spec.nonlin.f.value(v2p[j])), q_exp);
      uu += std::pow(std::abs(dup[j]), p1 + 1.0);
      const double dg = spec.nonlin.g.value(u1p[j]) - spec.nonlin.g.value(u2p[j]);
      g1 += dg * dvp[j];
      g2 += dg * dup[j];
    }
    qf1[i] = hx * f1;
    qf2[i] = hx * f2;
    qu[i] = hx * uu;
    qg1[i] = hx * g1;
    qg2[i] = hx * g2;
  }

  const SystemState& a0 = t1.states.front();
  const SystemState& b0 = t2.states.front();
  const SystemState& aT = t1.states.back();
  const SystemState& bT = t2.states.back();
  const SystemState d0 = difference(a0, b0);
  const SystemState dT = difference(aT, bT);
  const double T = aT.t - a0.t;
  const double c1T = std::pow(dot_H2(aT.u, aT.u, grid), 0.5 * m);
  const double c10 = std::pow(dot_H2(a0.u, a0.u, grid), 0.5 * m);
  const double gdT = dot_H2(dT.u, dT.u, grid);
  const double gd0 = dot_H2(d0.u, d0.u, grid);
  const double A0 = eval_Atilde1(d0, spec);
  const double AT = eval_Atilde1(dT, spec);

  auto& terms = rep.summary.terms;
  auto put = [&terms](const char* name, double v) {
    terms.push_back({name, v});
    return v;
  };
  double Cs = 0.0;
  Cs += put("C:-C2/2 |grad u1(T)|^m |grad ubar(T)|^2", -0.5 * C.C2_delta * c1T * gdT);
  Cs += put("C:+C2/2 |grad u1(0)|^m |grad ubar(0)|^2", 0.5 * C.C2_delta * c10 * gd0);
  Cs += put("C:-C2 C_delta", -C.C2_delta * C.C_delta);
  Cs += put("C:+C2 A~(0)", C.C2_delta * A0);
  Cs += put("C:-eps(T)(ubar,ubar_t)(T)", -spec.eps.value(aT.t) * dot_L2(dT.u, dT.v));
  Cs += put("C:+eps(0)(ubar,ubar_t)(0)", spec.eps.value(a0.t) * dot_L2(d0.u, d0.v));
  Cs += put("C:-1/2 |grad ubar(T)|^2", -0.5 * gdT);
  Cs += put("C:+1/2 |grad ubar(0)|^2", 0.5 * gd0);

  const double Iqa = trapz(qa, h), Iqb = trapz(qb, h), Iqc = trapz(qc, h);
  const double holder = spec.delta *
                        (std::pow(trapz(qf1, h), 1.0 / q_exp) + std::pow(trapz(qf2, h), 1.0 / q_exp)) *
                        std::pow(trapz(qu, h), 1.0 / (p1 + 1.0));
  double Phi = 0.0;
  Phi += put("Phi:+m C2/2 int |grad u1|^(m-1) grad(u1)_t (grad ubar)^2", 0.5 * m * C.C2_delta * Iqa);
  Phi += put("Phi:-C2 int (c1-c2) grad u2 grad ubar_t", -C.C2_delta * Iqb);
  Phi += put("Phi:+1/2 int |grad u1|^m |grad ubar|^2", 0.5 * Iqc);
  Phi += put("Phi:+int eps' ubar ubar_t", trapz(qd, h));
  Phi += put("Phi:-int |grad u1|^m |grad ubar|^2", -Iqc);
  Phi += put("Phi:-int (c1-c2) grad u2 grad ubar", -trapz(qe, h));
  Phi += put("Phi:+f Holder bound", holder);
  Phi += put("Phi:+m/2 nested |grad u1|^(m-1) grad(u1)_t (grad ubar)^2", 0.5 * m * nested_trapz(qa, h));
  Phi += put("Phi:-nested (c1-c2) grad u2 grad ubar_t", -nested_trapz(qb, h));
  Phi += put("Phi:+C2 int (g(u1)-g(u2)) ubar_t", C.C2_delta * trapz(qg1, h));
  Phi += put("Phi:+int (g(u1)-g(u2)) ubar", trapz(qg2, h));
  Phi += put("Phi:+nested (g(u1)-g(u2)) ubar_t", nested_trapz(qg1, h));

  auto& S = rep.summary;
  S.T = T;
  S.C_Atilde1 = Cs;
  S.Phi_T = Phi;
  S.bound_rhs = T > 0 ? 2.0 * Cs / T + 2.0 * Phi / T : 0.0;
  S.lhs = T * AT;
  S.rhs = Cs + Phi;
  S.holds = S.lhs <= S.rhs + 1e-3 * (1.0 + std::abs(S.rhs));
  S.max_identity_defect = max_def;
  return rep;
}

}  // namespace kal
