#include "kal/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kal {

namespace {

void require_size(const SpectralField& f, const DomainGrid& grid) {
  if (f.size() != grid.n_modes())
    throw std::invalid_argument("spectral field has " + std::to_string(f.size()) +
                                " modes, grid has " + std::to_string(grid.n_modes()));
}

void require_same(const SpectralField& a, const SpectralField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spectral field size mismatch");
}

}  // namespace

DomainGrid::DomainGrid(std::size_t n_modes, std::size_t n_phys, double length)
    : n_modes_(n_modes), n_phys_(n_phys), length_(length) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (n_phys < 2 * n_modes) throw std::invalid_argument("n_phys must be >= 2*n_modes");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("domain length must be positive");

  const double pi = std::numbers::pi;
  const double norm = std::sqrt(2.0 / length);
  lambda_.resize(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double w = static_cast<double>(k + 1) * pi / length;
    lambda_[k] = w * w;
  }
  const double h = spacing();
  nodes_.resize(n_phys);
  sine_.resize(n_phys * n_modes);
  for (std::size_t j = 0; j < n_phys; ++j) {
    nodes_[j] = static_cast<double>(j + 1) * h;
    for (std::size_t k = 0; k < n_modes; ++k) {
      // integer argument keeps sin(k pi (j+1)/(N+1)) exact in its symmetry
      const double arg = pi * static_cast<double>((k + 1) * (j + 1)) /
                         static_cast<double>(n_phys + 1);
      sine_[j * n_modes + k] = norm * std::sin(arg);
    }
  }
  cosine_.resize((n_phys + 2) * n_modes);
  for (std::size_t j = 0; j < n_phys + 2; ++j) {
    for (std::size_t k = 0; k < n_modes; ++k) {
      const double arg = pi * static_cast<double>((k + 1) * j) /
                         static_cast<double>(n_phys + 1);
      const double w = static_cast<double>(k + 1) * pi / length;
      cosine_[j * n_modes + k] = norm * w * std::cos(arg);
    }
  }
}

double DomainGrid::eigenvalue(std::size_t k) const {
  if (k < 1 || k > n_modes_)
    throw std::out_of_range("mode index " + std::to_string(k) + " outside 1.." +
                            std::to_string(n_modes_));
  return lambda_[k - 1];
}

SpectralField SpectralField::mode(std::size_t n_modes, std::size_t k, double amp) {
  if (k < 1 || k > n_modes) throw std::out_of_range("mode index out of range");
  SpectralField f(n_modes);
  f.coeffs[k - 1] = amp;
  return f;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_same(a, b);
  SpectralField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_same(a, b);
  SpectralField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

SpectralField operator*(double s, const SpectralField& a) {
  SpectralField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

double dot_L2(const SpectralField& a, const SpectralField& b) {
  require_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot_H2(const SpectralField& a, const SpectralField& b, const DomainGrid& grid) {
  require_same(a, b);
  require_size(a, grid);
  const auto lam = grid.eigenvalues();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += lam[i] * a[i] * b[i];
  return s;
}

double dot_H3(const SpectralField& a, const SpectralField& b, const DomainGrid& grid) {
  require_same(a, b);
  require_size(a, grid);
  const auto lam = grid.eigenvalues();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += lam[i] * lam[i] * a[i] * b[i];
  return s;
}

double norm_L2(const SpectralField& f, const DomainGrid& grid) {
  require_size(f, grid);
  return std::sqrt(dot_L2(f, f));
}

double norm_H2(const SpectralField& f, const DomainGrid& grid) {
  return std::sqrt(dot_H2(f, f, grid));
}

double norm_H3(const SpectralField& f, const DomainGrid& grid) {
  return std::sqrt(dot_H3(f, f, grid));
}

std::vector<double> to_physical(const SpectralField& f, const DomainGrid& grid) {
  require_size(f, grid);
  const std::size_t K = grid.n_modes();
  const std::size_t N = grid.n_phys();
  const auto S = grid.sine_matrix();
  std::vector<double> out(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const double* row = S.data() + j * K;
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += row[k] * f.coeffs[k];
    out[j] = s;
  }
  return out;
}

SpectralField from_physical(std::span<const double> values, const DomainGrid& grid) {
  const std::size_t K = grid.n_modes();
  const std::size_t N = grid.n_phys();
  if (values.size() != N)
    throw std::invalid_argument("physical vector has " + std::to_string(values.size()) +
                                " entries, grid has " + std::to_string(N));
  const auto S = grid.sine_matrix();
  SpectralField f(K);
  for (std::size_t j = 0; j < N; ++j) {
    const double* row = S.data() + j * K;
    const double vj = values[j];
    for (std::size_t k = 0; k < K; ++k) f.coeffs[k] += row[k] * vj;
  }
  // discrete orthogonality: sum_j phi_k(x_j) phi_l(x_j) = delta_kl / h
  const double h = grid.spacing();
  for (auto& c : f.coeffs) c *= h;
  return f;
}

std::vector<double> gradient_physical(const SpectralField& f, const DomainGrid& grid) {
  require_size(f, grid);
  const std::size_t K = grid.n_modes();
  const std::size_t N = grid.n_phys() + 2;
  const auto C = grid.cosine_matrix();
  std::vector<double> out(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const double* row = C.data() + j * K;
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += row[k] * f.coeffs[k];
    out[j] = s;
  }
  return out;
}

double quadrature_L2_sq(std::span<const double> interior_values, const DomainGrid& grid) {
  if (interior_values.size() != grid.n_phys())
    throw std::invalid_argument("physical vector size mismatch");
  double s = 0.0;
  for (double v : interior_values) s += v * v;
  return grid.spacing() * s;
}

double quadrature_closed(std::span<const double> values, const DomainGrid& grid) {
  if (values.size() != grid.n_phys() + 2)
    throw std::invalid_argument("closed-grid vector size mismatch");
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) s += values[j];
  return grid.spacing() * s;
}

}  // namespace kal
