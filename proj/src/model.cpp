#include "kal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kal/errors.hpp"

namespace kal {

namespace {

constexpr double kValidationHorizon = 50.0;
constexpr std::size_t kValidationSteps = 5000;

std::vector<double> time_grid() {
  std::vector<double> t(kValidationSteps + 1);
  for (std::size_t i = 0; i <= kValidationSteps; ++i)
    t[i] = kValidationHorizon * static_cast<double>(i) / kValidationSteps;
  return t;
}

// symmetric sample of |s| <= 1e3: uniform near zero, log-spaced beyond
std::vector<double> s_grid() {
  std::vector<double> s;
  for (int i = 1; i <= 1000; ++i) s.push_back(0.01 * i);
  for (int i = 1; i <= 3000; ++i) s.push_back(10.0 * std::pow(100.0, i / 3000.0));
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) s.push_back(-s[i]);
  return s;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// sup of |q(s)| over the outer band compared with the inner range: catches
// growth faster than the declared exponent
bool growth_ok(const std::function<double(double)>& q, const std::vector<double>& s) {
  double inner = 0.0, outer = 0.0;
  for (double x : s) {
    const double v = std::abs(q(x));
    if (!std::isfinite(v)) return false;
    if (std::abs(x) <= 500.0) inner = std::max(inner, v);
    else outer = std::max(outer, v);
  }
  return outer <= 2.0 * inner + 1e-12;
}

}  // namespace

void EpsilonSpec::settle_L(std::optional<double> L) {
  if (L) {
    L_ = *L;
    L_declared_ = true;
    return;
  }
  double sup = 0.0;
  for (double t : time_grid()) sup = std::max(sup, std::abs(value(t)) + std::abs(derivative(t)));
  L_ = sup;
  L_declared_ = false;
}

EpsilonSpec EpsilonSpec::exp_relax(double a, double eps0, std::optional<double> L) {
  EpsilonSpec e;
  e.kind_ = Kind::ExpRelax;
  e.a_ = a;
  e.eps0_ = eps0;
  e.settle_L(L);
  return e;
}

EpsilonSpec EpsilonSpec::constant(double a, std::optional<double> L) {
  EpsilonSpec e;
  e.kind_ = Kind::Constant;
  e.a_ = a;
  e.eps0_ = a;
  e.settle_L(L);
  return e;
}

EpsilonSpec EpsilonSpec::custom(Fn value, Fn derivative, double a, double eps0,
                                std::optional<double> L) {
  if (!value || !derivative) throw ConfigError("custom epsilon needs value and derivative");
  EpsilonSpec e;
  e.kind_ = Kind::Custom;
  e.a_ = a;
  e.eps0_ = eps0;
  e.value_ = std::move(value);
  e.derivative_ = std::move(derivative);
  e.settle_L(L);
  return e;
}

double EpsilonSpec::value(double t) const {
  switch (kind_) {
    case Kind::ExpRelax: return a_ + (eps0_ - a_) * std::exp(-t);
    case Kind::Constant: return a_;
    case Kind::Custom: return value_(t);
  }
  return a_;
}

double EpsilonSpec::derivative(double t) const {
  switch (kind_) {
    case Kind::ExpRelax: return -(eps0_ - a_) * std::exp(-t);
    case Kind::Constant: return 0.0;
    case Kind::Custom: return derivative_(t);
  }
  return 0.0;
}

void NonlinearitySpec::set_linear_damping(NonlinearitySpec& n, double offset) {
  n.f_kind = offset == 0.0 ? "linear" : "linear_offset";
  n.f.value = [offset](double s) { return s + offset; };
  n.f.derivative = [](double) { return 1.0; };
  n.p1 = 1.0;
}

void NonlinearitySpec::set_sine_source(NonlinearitySpec& n, double kappa) {
  n.g_kind = "sine";
  n.kappa = kappa;
  n.g.value = [kappa](double s) { return kappa * std::sin(s); };
  n.g.derivative = [kappa](double s) { return kappa * std::cos(s); };
  n.G = [kappa](double s) { return kappa * (1.0 - std::cos(s)); };
  n.p2 = 1.0;
}

void NonlinearitySpec::set_zero_source(NonlinearitySpec& n) {
  n.g_kind = "zero";
  n.kappa = 0.0;
  n.g.value = [](double) { return 0.0; };
  n.g.derivative = [](double) { return 0.0; };
  n.G = [](double) { return 0.0; };
  n.p2 = 1.0;
}

ProblemSpec default_problem() {
  ProblemSpec p;
  p.grid = std::make_shared<const DomainGrid>(32, 64, std::numbers::pi);
  p.kernel = make_exponential_kernel(1.0, 1.0);
  p.history = std::make_shared<const HistoryGrid>(build_history_grid(p.kernel, 64, 1e-8));
  p.eps = EpsilonSpec::exp_relax(0.01, 1.0, 2.0);
  p.m = 2.0;
  p.delta = 0.5;
  NonlinearitySpec::set_linear_damping(p.nonlin);
  NonlinearitySpec::set_sine_source(p.nonlin, 0.5);
  p.h = SpectralField::mode(32, 1, 0.1);
  p.lyapunov = {0.05, 1.2};
  p.u0 = SpectralField::mode(32, 1, 1.0);
  p.u1 = SpectralField(32);
  return p;
}

ProblemSpec with_modes(const ProblemSpec& spec, std::size_t n_modes) {
  ProblemSpec p = spec;
  p.grid = std::make_shared<const DomainGrid>(n_modes, 2 * n_modes, spec.grid->length());
  auto resize = [n_modes](SpectralField f) {
    f.coeffs.resize(n_modes, 0.0);
    return f;
  };
  p.h = resize(spec.h);
  p.u0 = resize(spec.u0);
  p.u1 = resize(spec.u1);
  return p;
}

std::vector<Violation> validate_hypotheses(const ProblemSpec& spec) {
  std::vector<Violation> out;
  auto add = [&out](std::string eq, std::string msg) {
    out.push_back({eq, eq + ": " + msg});
  };

  // eps(t)
  const auto& eps = spec.eps;
  const auto ts = time_grid();
  bool decreasing = true;
  double eps_min = eps.value(0.0), sup_sum = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double e = eps.value(ts[i]);
    const double de = eps.derivative(ts[i]);
    eps_min = std::min(eps_min, e);
    sup_sum = std::max(sup_sum, std::abs(e) + std::abs(de));
    if (de > 1e-14 * std::max(1.0, std::abs(e))) decreasing = false;
    if (i > 0 && e > eps.value(ts[i - 1]) + 1e-14 * std::max(1.0, std::abs(e)))
      decreasing = false;
  }
  if (!decreasing) add("(1.2)/(1.3)", "ε not decreasing");
  if (!(eps.a() > 0.0)) add("(1.2)", "limit a = " + fmt(eps.a()) + " must be positive");
  if (eps_min < eps.a() - 1e-12 * std::max(1.0, eps.a()))
    add("(1.2)", "ε(t) drops below its limit a (min " + fmt(eps_min) + ")");
  const double tail = eps.value(ts.back());
  if (std::abs(tail - eps.a()) > 1e-6 * std::max(1.0, eps.a()))
    add("(1.2)", "ε(t) does not tend to a = " + fmt(eps.a()) + " (ε(" +
                     fmt(ts.back()) + ") = " + fmt(tail) + ")");
  if (sup_sum > eps.L() * (1.0 + 1e-12))
    add("(1.3)", "sup(|ε|+|ε'|) = " + fmt(sup_sum) + " exceeds L = " + fmt(eps.L()));
  if (!(eps.L() > eps.a())) add("(1.3)", "L = " + fmt(eps.L()) + " must exceed a");

  if (!(spec.m >= 1.0)) add("§1", "m ≥ 1 required, got " + fmt(spec.m));
  if (!(spec.delta > 0.0 && spec.delta < 1.0))
    add("§1", "0<δ<1 required, got δ = " + fmt(spec.delta));

  // f
  const auto& nl = spec.nonlin;
  const auto ss = s_grid();
  const double f0 = nl.f.value(0.0);
  if (f0 != 0.0) add("(1.4)", "f(0) = " + fmt(f0) + " must vanish");
  {
    double min_df = INFINITY;
    for (double s : ss)
      if (std::abs(s) >= 100.0) min_df = std::min(min_df, nl.f.derivative(s));
    if (!(min_df > 0.0))
      add("(1.5)", "f'(s) not bounded below by a positive constant for large |s| (min " +
                       fmt(min_df) + " on 100 ≤ |s| ≤ 1000)");
  }
  {
    const double p1 = nl.p1;
    auto q = [&](double s) { return nl.f.value(s) / (1.0 + std::pow(std::abs(s), p1)); };
    if (!growth_ok(q, ss)) add("(1.6)", "|f(s)| grows faster than |s|^p1, p1 = " + fmt(p1));
  }

  // g
  {
    const double p2 = nl.p2;
    auto q = [&](double s) {
      return nl.g.derivative(s) / (1.0 + std::pow(std::abs(s), p2 - 1.0));
    };
    if (!growth_ok(q, ss)) add("(1.7)", "|g'(s)| grows faster than |s|^(p2-1), p2 = " + fmt(p2));
    if (p2 != 1.0) add("(1.7)", "p2 = 1 required in one space dimension, got " + fmt(p2));
  }
  const double lam1 = spec.lambda1();
  {
    double far = -INFINITY, sup = -INFINITY;
    for (double s : ss) {
      const double r = nl.g.value(s) / s;
      sup = std::max(sup, r);
      if (std::abs(s) >= 100.0) far = std::max(far, r);
    }
    if (!(far < lam1))
      add("(1.8)", "g(s)/s = " + fmt(far) + " not below λ₁ = " + fmt(lam1) + " for large |s|");
    else if (!(sup < lam1))
      add("(3.8)", "sup g(s)/s = " + fmt(sup) + " is not below λ₁ = " + fmt(lam1));
  }

  // kernel at the s-nodes
  const auto& k = spec.kernel;
  const auto& hg = *spec.history;
  bool finite = true, sign_ok = true, decay_ok = true;
  for (double s : hg.nodes) {
    const double mu = k.mu(s), dmu = k.dmu(s);
    if (!std::isfinite(mu) || !std::isfinite(dmu)) finite = false;
    if (mu < 0.0 || dmu > 0.0) sign_ok = false;
    if (dmu + k.delta2() * mu > 1e-12 * k.delta2() * std::abs(mu)) decay_ok = false;
  }
  if (!finite) add("(1.13)", "μ or μ' not finite on the s-grid");
  if (!sign_ok) add("(1.14)", "μ ≥ 0 and μ' ≤ 0 fail on the s-grid");
  if (!(k.delta1() > 0.0)) add("(1.15)", "∫μ = δ₁ must be positive");
  if (auto d = k.declared_delta1(); d && std::abs(*d - k.delta1()) > 1e-3 * std::abs(k.delta1()))
    add("(1.15)", "declared δ₁ = " + fmt(*d) + " but ∫μ = " + fmt(k.delta1()));
  if (!decay_ok) add("(1.16)", "μ'(s) + δ₂μ(s) > 0 on the s-grid");
  if (!(k.delta2() >= k.delta1()))
    add("(1.16)", "delta2 ≥ delta1 violated (δ₁ = " + fmt(k.delta1()) + ", δ₂ = " +
                      fmt(k.delta2()) + ")");
  return out;
}

bool LyapunovReport::all_satisfied() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.satisfied; });
}

LyapunovReport validate_lyapunov_params(const ProblemSpec& spec) {
  const double l1 = spec.lambda1();
  const double lam = spec.lyapunov.lambda;
  const double al = spec.lyapunov.alpha;
  const double e0 = spec.eps.eps0();
  const double L = spec.eps.L();
  LyapunovReport r;
  r.checks.push_back({"(3.8)", "λ_1<λ<3/2 λ_1", lam, l1 < lam && lam < 1.5 * l1});
  r.checks.push_back({"(3.10)", "0<λ+4α<3/2 λ_1", lam + 4 * al,
                      0 < lam + 4 * al && lam + 4 * al < 1.5 * l1});
  const double c3 = -al * al / (2 * l1) * e0 - lam / (4 * l1) - 1 / (2 * l1) + (1 + al) / 2;
  r.checks.push_back({"(3.17)", "−α²/(2λ_1)ε−λ/(4λ_1)−1/(2λ_1)+(1+α)/2>1/8", c3, c3 > 0.125});
  r.checks.push_back({"(3.25)", "0<α<λ_1/L", al, 0 < al && al < l1 / L});
  const double c5 = (1 + L / (2 * l1)) * al * al + (1 / (2 * l1) - 1) + 0.5;
  r.checks.push_back({"(3.25)", "(1+L/(2λ_1))α²+(1/(2λ_1)−1)+1/2≤0", c5, c5 <= 0});
  return r;
}

}  // namespace kal
