#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "kal/spectral.hpp"

using namespace kal;
using std::numbers::pi;

TEST_CASE("eigenvalues of the Dirichlet Laplacian") {
  DomainGrid g(4, 8);
  CHECK(g.eigenvalue(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.eigenvalue(3) == doctest::Approx(9.0).epsilon(1e-15));
  DomainGrid g2(4, 8, 2 * pi);
  CHECK(g2.eigenvalue(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(g.eigenvalue(0), std::out_of_range);
  CHECK_THROWS_AS(g.eigenvalue(5), std::out_of_range);
  CHECK_THROWS_AS(DomainGrid(8, 15), std::invalid_argument);
}

TEST_CASE("mode-space norms") {
  DomainGrid g(4, 8);
  const auto phi1 = SpectralField::mode(4, 1);
  CHECK(norm_L2(phi1, g) == doctest::Approx(1.0));
  CHECK(norm_H2(phi1, g) == doctest::Approx(1.0));
  CHECK(norm_H3(phi1, g) == doctest::Approx(1.0));
  CHECK(norm_H2(SpectralField::mode(4, 2, 2.0), g) == doctest::Approx(4.0));
  const SpectralField zero(4);
  CHECK(norm_L2(zero, g) == 0.0);
  CHECK(norm_H2(zero, g) == 0.0);
  CHECK(norm_H3(zero, g) == 0.0);
}

TEST_CASE("phi_1 on the collocation nodes") {
  DomainGrid g(8, 32);
  const auto vals = to_physical(SpectralField::mode(8, 1), g);
  REQUIRE(vals.size() == 32);
  for (std::size_t j = 0; j < 32; ++j) {
    const double x = (j + 1) * pi / 33.0;
    CHECK(std::abs(vals[j] - std::sqrt(2 / pi) * std::sin(x)) < 1e-14);
  }
  const auto back = from_physical(vals, g);
  for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(back[k] - (k == 0 ? 1.0 : 0.0)) < 1e-12);
  for (double v : to_physical(SpectralField(8), g)) CHECK(v == 0.0);
}

TEST_CASE("random round trip and Parseval") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  DomainGrid g(8, 32);
  for (int trial = 0; trial < 20; ++trial) {
    SpectralField f(8);
    for (auto& c : f.coeffs) c = n01(rng);
    const auto vals = to_physical(f, g);
    // direct summation oracle
    for (std::size_t j = 0; j < 32; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 8; ++k)
        s += f[k] * std::sqrt(2 / pi) * std::sin((k + 1.0) * (j + 1.0) * pi / 33.0);
      CHECK(std::abs(vals[j] - s) < 1e-12);
    }
    const auto back = from_physical(vals, g);
    double err = 0;
    for (std::size_t k = 0; k < 8; ++k) err = std::max(err, std::abs(back[k] - f[k]));
    CHECK(err < 1e-12);
    const double n2 = dot_L2(f, f);
    CHECK(std::abs(quadrature_L2_sq(vals, g) - n2) <= 1e-10 * n2);
    // Poincare, exact in mode space
    CHECK(g.eigenvalue(1) * n2 <= dot_H2(f, f, g) * (1 + 1e-15));
  }
}

TEST_CASE("norms do not depend on n_phys") {
  SpectralField f(6);
  for (std::size_t k = 0; k < 6; ++k) f[k] = 1.0 / (k + 1.0);
  DomainGrid a(6, 12), b(6, 40);
  CHECK(norm_H2(f, a) == norm_H2(f, b));
  CHECK(std::abs(quadrature_L2_sq(to_physical(f, a), a) -
                 quadrature_L2_sq(to_physical(f, b), b)) < 1e-12);
}

TEST_CASE("gradient on the closed grid") {
  DomainGrid g(4, 16);
  const auto d = gradient_physical(SpectralField::mode(4, 2), g);
  REQUIRE(d.size() == 18);
  for (std::size_t j = 0; j < 18; ++j) {
    const double x = j * pi / 17.0;
    CHECK(std::abs(d[j] - 2 * std::sqrt(2 / pi) * std::cos(2 * x)) < 1e-13);
  }
  std::vector<double> sq(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) sq[j] = d[j] * d[j];
  CHECK(quadrature_closed(sq, g) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("field arithmetic") {
  const auto a = SpectralField::mode(3, 1, 2.0);
  const auto b = SpectralField::mode(3, 3, 1.0);
  const auto c = a + b;
  CHECK(c.coeffs == std::vector<double>{2.0, 0.0, 1.0});
  CHECK((c - b) == a);
  CHECK((0.5 * a)[0] == 1.0);
}
