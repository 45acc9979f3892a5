#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kal/spectral.hpp"

namespace kal {

enum class KernelKind { Exponential, Custom };

// Memory kernel mu(s) on s > 0 with delta1 = int mu and decay rate delta2.
class KernelSpec {
 public:
  using Fn = std::function<double(double)>;

  // mu(s) = delta1 delta2 exp(-delta2 s); no hypothesis check here, see
  // make_exponential_kernel for the checked constructor
  static KernelSpec exponential(double delta1, double delta2);

  // mu vanishes beyond `support`; delta1 is integrated numerically.
  // declared_delta1, if given, is what the caller believes int mu to be.
  static KernelSpec custom(Fn mu, Fn dmu, double delta2, double support,
                           std::optional<double> declared_delta1 = std::nullopt);

  // piecewise-linear table of mu and mu'
  static KernelSpec tabulated(std::vector<double> s, std::vector<double> mu,
                              std::vector<double> dmu, double delta2,
                              std::optional<double> declared_delta1 = std::nullopt);

  KernelKind kind() const { return kind_; }
  double mu(double s) const;
  double dmu(double s) const;
  double delta1() const { return delta1_; }
  double delta2() const { return delta2_; }
  std::optional<double> declared_delta1() const { return declared_delta1_; }
  double support() const { return support_; }

  // int_a^b mu and int_a^b s mu
  double integral(double a, double b) const;
  double first_moment(double a, double b) const;

  // smallest s with int_s^inf mu <= tol * delta1
  double tail_point(double tol) const;

 private:
  KernelKind kind_ = KernelKind::Exponential;
  double delta1_ = 1.0;
  double delta2_ = 1.0;
  double support_ = 0.0;
  std::optional<double> declared_delta1_;
  Fn mu_;
  Fn dmu_;
  // custom only: cumulative integral on a uniform table
  std::shared_ptr<const std::vector<double>> cumulative_;
};

// Checked exponential kernel; throws HypothesisError unless 0 < delta1 <= delta2.
KernelSpec make_exponential_kernel(double delta1, double delta2);

// Graded s-grid on (0, s_max] with one quadrature node per cell.
struct HistoryGrid {
  std::vector<double> nodes;      // s_1 < ... < s_M
  std::vector<double> weights;    // int of mu over each cell
  std::vector<double> edges;      // cell boundaries, edges[0] = 0, edges[M] = s_max
  std::vector<double> upwind_ds;  // s_j - s_{j-1} with s_0 = 0
  double s_max = 0.0;
  double tail_tol = 0.0;
  double delta2 = 1.0;

  // five-point first-derivative stencils over {0, s_1, ..., s_M}
  std::vector<std::array<double, 5>> stencil_weights;
  std::vector<std::size_t> stencil_start;

  std::size_t size() const { return nodes.size(); }
};

HistoryGrid build_history_grid(const KernelSpec& kernel, std::size_t M, double tail_tol);

// eta(., s_j) for j = 0..M-1, stored contiguously snapshot by snapshot
class HistoryField {
 public:
  HistoryField() = default;
  HistoryField(std::size_t n_nodes, std::size_t n_modes)
      : n_nodes_(n_nodes), n_modes_(n_modes), data_(n_nodes * n_modes, 0.0) {}

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_modes() const { return n_modes_; }

  std::span<double> snapshot(std::size_t j) { return {data_.data() + j * n_modes_, n_modes_}; }
  std::span<const double> snapshot(std::size_t j) const {
    return {data_.data() + j * n_modes_, n_modes_};
  }
  SpectralField snapshot_field(std::size_t j) const;
  void set_snapshot(std::size_t j, const SpectralField& f);

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool operator==(const HistoryField&) const = default;

 private:
  std::size_t n_nodes_ = 0;
  std::size_t n_modes_ = 0;
  std::vector<double> data_;
};

enum class HistoryLevel { M1, M2, M3 };

double weighted_inner(const HistoryField& a, const HistoryField& b, const HistoryGrid& hgrid,
                      const DomainGrid& dgrid, HistoryLevel level);
double weighted_norm_sq(const HistoryField& a, const HistoryGrid& hgrid,
                        const DomainGrid& dgrid, HistoryLevel level);

// -D_s eta + v, first-order upwind with eta(., 0) = 0
HistoryField transport_rhs(const HistoryField& eta, const SpectralField& v,
                           const HistoryGrid& hgrid);

// one backward-Euler step of eta_t = -D_s eta + v_new (lower bidiagonal solve)
HistoryField advance_transport_implicit(const HistoryField& eta, const SpectralField& v_new,
                                        double dt, const HistoryGrid& hgrid);

// mode-wise lambda_k sum_j w_j eta_{j,k}: the memory contribution to -Lap
SpectralField memory_term(const HistoryField& eta, const HistoryGrid& hgrid,
                          const DomainGrid& dgrid);

enum class HistoryDerivative { Upwind, HighOrder };

struct HistoryDissipation {
  double lhs = 0.0;       // (eta, D_s eta)_{M_i}
  double rhs = 0.0;       // delta2/2 ||eta||^2_{M_i}
  double residual = 0.0;  // lhs - rhs
};

// The s-derivative defaults to the five-point stencil: the first-order
// transport difference carries O(ds) numerical dissipation of its own,
// which would swamp the equality case.
HistoryDissipation check_history_dissipation(
    const HistoryField& eta, const HistoryGrid& hgrid, const DomainGrid& dgrid,
    const KernelSpec& kernel, HistoryLevel level = HistoryLevel::M2,
    HistoryDerivative derivative = HistoryDerivative::HighOrder);

}  // namespace kal
