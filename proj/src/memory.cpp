#include "kal/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kal/errors.hpp"

namespace kal {

namespace {

constexpr std::size_t kTableCells = 20000;
constexpr std::size_t kCellSubdiv = 64;

// Fornberg's recursion, first derivative only; returns weights for d/ds at z.
std::array<double, 5> derivative_weights(double z, const std::array<double, 5>& x) {
  constexpr int n = 5;
  double c[n][2] = {};
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, 5> w{};
  for (int i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

double trapezoid(const KernelSpec::Fn& fn, double a, double b, std::size_t n) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (fn(a) + fn(b));
  for (std::size_t i = 1; i < n; ++i) s += fn(a + h * static_cast<double>(i));
  return s * h;
}

double level_factor(double lambda, HistoryLevel level) {
  switch (level) {
    case HistoryLevel::M1: return 1.0;
    case HistoryLevel::M2: return lambda;
    case HistoryLevel::M3: return lambda * lambda;
  }
  return 1.0;
}

void require_compatible(const HistoryField& eta, const HistoryGrid& hgrid) {
  if (eta.n_nodes() != hgrid.size())
    throw std::invalid_argument("history field has " + std::to_string(eta.n_nodes()) +
                                " snapshots, grid has " + std::to_string(hgrid.size()));
}

}  // namespace

KernelSpec KernelSpec::exponential(double delta1, double delta2) {
  KernelSpec k;
  k.kind_ = KernelKind::Exponential;
  k.delta1_ = delta1;
  k.delta2_ = delta2;
  k.declared_delta1_ = delta1;
  k.support_ = std::numeric_limits<double>::infinity();
  return k;
}

KernelSpec KernelSpec::custom(Fn mu, Fn dmu, double delta2, double support,
                              std::optional<double> declared_delta1) {
  if (!mu || !dmu) throw ConfigError("custom kernel needs mu and mu'");
  if (!(support > 0.0) || !std::isfinite(support))
    throw ConfigError("custom kernel support must be positive and finite");
  KernelSpec k;
  k.kind_ = KernelKind::Custom;
  k.delta2_ = delta2;
  k.support_ = support;
  k.declared_delta1_ = declared_delta1;
  k.mu_ = std::move(mu);
  k.dmu_ = std::move(dmu);

  auto cum = std::make_shared<std::vector<double>>(kTableCells + 1, 0.0);
  const double h = support / static_cast<double>(kTableCells);
  double prev = k.mu_(0.0);
  for (std::size_t i = 1; i <= kTableCells; ++i) {
    const double cur = k.mu_(h * static_cast<double>(i));
    (*cum)[i] = (*cum)[i - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  k.delta1_ = cum->back();
  k.cumulative_ = std::move(cum);
  return k;
}

KernelSpec KernelSpec::tabulated(std::vector<double> s, std::vector<double> mu,
                                 std::vector<double> dmu, double delta2,
                                 std::optional<double> declared_delta1) {
  if (s.size() < 2 || mu.size() != s.size() || dmu.size() != s.size())
    throw ConfigError("tabulated kernel needs matching s, mu, dmu arrays of length >= 2");
  if (s.front() != 0.0) throw ConfigError("tabulated kernel table must start at s = 0");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw ConfigError("tabulated kernel s values must increase");
  auto table = std::make_shared<const std::array<std::vector<double>, 3>>(
      std::array<std::vector<double>, 3>{std::move(s), std::move(mu), std::move(dmu)});
  auto interp = [table](int col) {
    return [table, col](double x) {
      const auto& xs = (*table)[0];
      const auto& ys = (*table)[col];
      if (x < xs.front() || x > xs.back()) return 0.0;
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      if (it == xs.end()) return ys.back();
      const std::size_t i = static_cast<std::size_t>(it - xs.begin());
      const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    };
  };
  const double support = (*table)[0].back();
  return custom(interp(1), interp(2), delta2, support, declared_delta1);
}

double KernelSpec::mu(double s) const {
  if (kind_ == KernelKind::Exponential) return delta1_ * delta2_ * std::exp(-delta2_ * s);
  return mu_(s);
}

double KernelSpec::dmu(double s) const {
  // written as -delta2 * mu so that mu' + delta2 mu is exactly zero
  if (kind_ == KernelKind::Exponential) return -delta2_ * mu(s);
  return dmu_(s);
}

double KernelSpec::integral(double a, double b) const {
  if (kind_ == KernelKind::Exponential) {
    // delta1 e^{-d2 a} (1 - e^{-d2 (b - a)})
    return -delta1_ * std::exp(-delta2_ * a) * std::expm1(-delta2_ * (b - a));
  }
  return trapezoid(mu_, a, std::min(b, support_), kCellSubdiv);
}

double KernelSpec::first_moment(double a, double b) const {
  if (kind_ == KernelKind::Exponential) {
    // centroid of e^{-d2 t} on [0, b - a] is 1/d2 - D / expm1(d2 D)
    const double d = b - a;
    const double centroid = 1.0 / delta2_ - d / std::expm1(delta2_ * d);
    return integral(a, b) * (a + centroid);
  }
  Fn smu = [this](double s) { return s * mu_(s); };
  return trapezoid(smu, a, std::min(b, support_), kCellSubdiv);
}

double KernelSpec::tail_point(double tol) const {
  if (kind_ == KernelKind::Exponential) return -std::log(tol) / delta2_;
  const auto& cum = *cumulative_;
  const double total = cum.back();
  const double target = total * (1.0 - tol);
  auto it = std::lower_bound(cum.begin(), cum.end(), target);
  if (it == cum.end()) return support_;
  const std::size_t i = static_cast<std::size_t>(it - cum.begin());
  const double h = support_ / static_cast<double>(kTableCells);
  if (i == 0) return 0.0;
  const double t = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
  return h * (static_cast<double>(i - 1) + t);
}

KernelSpec make_exponential_kernel(double delta1, double delta2) {
  if (!(delta1 > 0.0)) throw HypothesisError("(1.15): delta1 > 0 violated");
  if (!(delta2 >= delta1)) throw HypothesisError("(1.16): delta2 >= delta1 violated");
  return KernelSpec::exponential(delta1, delta2);
}

HistoryGrid build_history_grid(const KernelSpec& kernel, std::size_t M, double tail_tol) {
  if (M < 4) throw ConfigError("history grid needs M >= 4, got " + std::to_string(M));
  if (!(tail_tol > 0.0 && tail_tol < 0.1))
    throw ConfigError("tail_tol must lie in (0, 0.1), got " + std::to_string(tail_tol));
  if (!(kernel.delta2() > 0.0)) throw ConfigError("kernel delta2 must be positive");
  if (!(kernel.delta1() > 0.0)) throw ConfigError("kernel has zero total mass");

  HistoryGrid g;
  g.tail_tol = tail_tol;
  g.delta2 = kernel.delta2();
  g.s_max = kernel.tail_point(tail_tol);
  if (!(g.s_max > 0.0)) throw ConfigError("kernel tail point is not positive");

  // offset-geometric edges b_j = c (q^j - 1): cells grow like the decay
  // length of mu, fine near s = 0
  const double c = 0.5 / kernel.delta2();
  const double q = std::pow((g.s_max + c) / c, 1.0 / static_cast<double>(M));
  if (q > 1.5)
    throw ConfigError("M = " + std::to_string(M) + " too small for tail_tol: cell growth " +
                      std::to_string(q) + " exceeds 1.5");
  g.edges.resize(M + 1);
  for (std::size_t j = 0; j <= M; ++j) g.edges[j] = c * (std::pow(q, static_cast<double>(j)) - 1.0);
  g.edges.front() = 0.0;
  g.edges.back() = g.s_max;

  g.nodes.resize(M);
  g.weights.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double a = g.edges[j];
    const double b = g.edges[j + 1];
    const double w = kernel.integral(a, b);
    g.weights[j] = w;
    // mu-weighted centroid; midpoint if the cell carries no mass
    g.nodes[j] = w > 0.0 ? kernel.first_moment(a, b) / w : 0.5 * (a + b);
    g.nodes[j] = std::clamp(g.nodes[j], a, b);
  }
  for (std::size_t j = 1; j < M; ++j)
    if (!(g.nodes[j] > g.nodes[j - 1]))
      throw ConfigError("history nodes are not strictly increasing");

  g.upwind_ds.resize(M);
  for (std::size_t j = 0; j < M; ++j)
    g.upwind_ds[j] = g.nodes[j] - (j == 0 ? 0.0 : g.nodes[j - 1]);

  // extended points: index 0 is s = 0, index e >= 1 is nodes[e - 1]
  auto ext = [&](std::size_t e) { return e == 0 ? 0.0 : g.nodes[e - 1]; };
  g.stencil_weights.resize(M);
  g.stencil_start.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t e = j + 1;
    const std::size_t start = std::min(e >= 2 ? e - 2 : 0, M - 4);
    std::array<double, 5> x{};
    for (std::size_t i = 0; i < 5; ++i) x[i] = ext(start + i);
    g.stencil_start[j] = start;
    g.stencil_weights[j] = derivative_weights(ext(e), x);
  }
  return g;
}

SpectralField HistoryField::snapshot_field(std::size_t j) const {
  auto s = snapshot(j);
  return SpectralField(std::vector<double>(s.begin(), s.end()));
}

void HistoryField::set_snapshot(std::size_t j, const SpectralField& f) {
  if (f.size() != n_modes_) throw std::invalid_argument("snapshot size mismatch");
  std::copy(f.coeffs.begin(), f.coeffs.end(), snapshot(j).begin());
}

double weighted_inner(const HistoryField& a, const HistoryField& b, const HistoryGrid& hgrid,
                      const DomainGrid& dgrid, HistoryLevel level) {
  require_compatible(a, hgrid);
  require_compatible(b, hgrid);
  if (a.n_modes() != dgrid.n_modes() || b.n_modes() != dgrid.n_modes())
    throw std::invalid_argument("history field mode count mismatch");
  const auto lam = dgrid.eigenvalues();
  const std::size_t K = dgrid.n_modes();
  double total = 0.0;
  for (std::size_t j = 0; j < hgrid.size(); ++j) {
    auto x = a.snapshot(j);
    auto y = b.snapshot(j);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += level_factor(lam[k], level) * x[k] * y[k];
    total += hgrid.weights[j] * s;
  }
  return total;
}

double weighted_norm_sq(const HistoryField& a, const HistoryGrid& hgrid,
                        const DomainGrid& dgrid, HistoryLevel level) {
  return weighted_inner(a, a, hgrid, dgrid, level);
}

HistoryField transport_rhs(const HistoryField& eta, const SpectralField& v,
                           const HistoryGrid& hgrid) {
  require_compatible(eta, hgrid);
  if (v.size() != eta.n_modes()) throw std::invalid_argument("velocity size mismatch");
  const std::size_t K = eta.n_modes();
  HistoryField out(eta.n_nodes(), K);
  for (std::size_t j = 0; j < eta.n_nodes(); ++j) {
    auto cur = eta.snapshot(j);
    auto dst = out.snapshot(j);
    const double inv = 1.0 / hgrid.upwind_ds[j];
    for (std::size_t k = 0; k < K; ++k) {
      const double prev = j == 0 ? 0.0 : eta.snapshot(j - 1)[k];
      dst[k] = v[k] - (cur[k] - prev) * inv;
    }
  }
  return out;
}

HistoryField advance_transport_implicit(const HistoryField& eta, const SpectralField& v_new,
                                        double dt, const HistoryGrid& hgrid) {
  require_compatible(eta, hgrid);
  if (v_new.size() != eta.n_modes()) throw std::invalid_argument("velocity size mismatch");
  const std::size_t K = eta.n_modes();
  HistoryField out(eta.n_nodes(), K);
  for (std::size_t j = 0; j < eta.n_nodes(); ++j) {
    const double r = dt / hgrid.upwind_ds[j];
    const double inv = 1.0 / (1.0 + r);
    auto cur = eta.snapshot(j);
    auto dst = out.snapshot(j);
    for (std::size_t k = 0; k < K; ++k) {
      const double prev = j == 0 ? 0.0 : out.snapshot(j - 1)[k];
      dst[k] = (cur[k] + dt * v_new[k] + r * prev) * inv;
    }
  }
  return out;
}

SpectralField memory_term(const HistoryField& eta, const HistoryGrid& hgrid,
                          const DomainGrid& dgrid) {
  require_compatible(eta, hgrid);
  const std::size_t K = dgrid.n_modes();
  if (eta.n_modes() != K) throw std::invalid_argument("history field mode count mismatch");
  SpectralField out(K);
  for (std::size_t j = 0; j < hgrid.size(); ++j) {
    auto x = eta.snapshot(j);
    const double w = hgrid.weights[j];
    for (std::size_t k = 0; k < K; ++k) out[k] += w * x[k];
  }
  const auto lam = dgrid.eigenvalues();
  for (std::size_t k = 0; k < K; ++k) out[k] *= lam[k];
  return out;
}

HistoryDissipation check_history_dissipation(const HistoryField& eta,
                                             const HistoryGrid& hgrid,
                                             const DomainGrid& dgrid,
                                             const KernelSpec& kernel, HistoryLevel level,
                                             HistoryDerivative derivative) {
  require_compatible(eta, hgrid);
  const std::size_t K = dgrid.n_modes();
  if (eta.n_modes() != K) throw std::invalid_argument("history field mode count mismatch");
  const auto lam = dgrid.eigenvalues();
  const std::size_t M = hgrid.size();

  // D_s eta as a history field
  HistoryField ds(M, K);
  if (derivative == HistoryDerivative::Upwind) {
    SpectralField zero(K);
    ds = transport_rhs(eta, zero, hgrid);
    for (double& x : ds.raw()) x = -x;
  } else {
    for (std::size_t j = 0; j < M; ++j) {
      auto dst = ds.snapshot(j);
      const auto& w = hgrid.stencil_weights[j];
      const std::size_t start = hgrid.stencil_start[j];
      for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t e = start + i;
        if (e == 0) continue;  // eta(., 0) = 0
        auto src = eta.snapshot(e - 1);
        for (std::size_t k = 0; k < K; ++k) dst[k] += w[i] * src[k];
      }
    }
  }

  HistoryDissipation r;
  for (std::size_t j = 0; j < M; ++j) {
    auto x = eta.snapshot(j);
    auto d = ds.snapshot(j);
    double sxd = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double f = level_factor(lam[k], level);
      sxd += f * x[k] * d[k];
      sxx += f * x[k] * x[k];
    }
    r.lhs += hgrid.weights[j] * sxd;
    r.rhs += hgrid.weights[j] * sxx;
  }
  r.rhs *= 0.5 * kernel.delta2();
  r.residual = r.lhs - r.rhs;
  return r;
}

}  // namespace kal
