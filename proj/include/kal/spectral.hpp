#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace kal {

// Dirichlet sine eigenbasis phi_k(x) = sqrt(2/L) sin(k pi x / L) on (0, L),
// with the collocation nodes x_j = j L / (n_phys + 1), j = 1..n_phys.
class DomainGrid {
 public:
  DomainGrid(std::size_t n_modes, std::size_t n_phys,
             double length = std::numbers::pi);

  std::size_t n_modes() const { return n_modes_; }
  std::size_t n_phys() const { return n_phys_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_phys_ + 1); }

  // k is 1-based; throws std::out_of_range outside 1..n_modes
  double eigenvalue(std::size_t k) const;
  // lambda_{k+1} at index k
  std::span<const double> eigenvalues() const { return lambda_; }
  std::span<const double> nodes() const { return nodes_; }

  // row-major n_phys x n_modes, entry (j, k) = phi_{k+1}(x_{j+1})
  std::span<const double> sine_matrix() const { return sine_; }
  // row-major (n_phys + 2) x n_modes, entry (j, k) = phi'_{k+1}(j h), endpoints included
  std::span<const double> cosine_matrix() const { return cosine_; }

 private:
  std::size_t n_modes_;
  std::size_t n_phys_;
  double length_;
  std::vector<double> lambda_;
  std::vector<double> nodes_;
  std::vector<double> sine_;
  std::vector<double> cosine_;
};

struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t n_modes) : coeffs(n_modes, 0.0) {}
  explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

  // amp * phi_k, k 1-based
  static SpectralField mode(std::size_t n_modes, std::size_t k, double amp = 1.0);

  std::size_t size() const { return coeffs.size(); }
  double& operator[](std::size_t i) { return coeffs[i]; }
  double operator[](std::size_t i) const { return coeffs[i]; }

  bool operator==(const SpectralField&) const = default;
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

// (a, b), (grad a, grad b), (Lap a, Lap b) in mode space
double dot_L2(const SpectralField& a, const SpectralField& b);
double dot_H2(const SpectralField& a, const SpectralField& b, const DomainGrid& grid);
double dot_H3(const SpectralField& a, const SpectralField& b, const DomainGrid& grid);

// ||f||, ||grad f||, ||Lap f||
double norm_L2(const SpectralField& f, const DomainGrid& grid);
double norm_H2(const SpectralField& f, const DomainGrid& grid);
double norm_H3(const SpectralField& f, const DomainGrid& grid);

// values at the n_phys interior nodes
std::vector<double> to_physical(const SpectralField& f, const DomainGrid& grid);
// Galerkin projection; modes above n_modes are dropped
SpectralField from_physical(std::span<const double> values, const DomainGrid& grid);

// f' at the n_phys + 2 nodes 0, h, ..., L
std::vector<double> gradient_physical(const SpectralField& f, const DomainGrid& grid);

// h * sum of squares over interior nodes (endpoint values are zero)
double quadrature_L2_sq(std::span<const double> interior_values, const DomainGrid& grid);
// trapezoid over [0, L] for values at all n_phys + 2 nodes
double quadrature_closed(std::span<const double> values, const DomainGrid& grid);

}  // namespace kal
