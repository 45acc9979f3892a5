#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kal/memory.hpp"
#include "kal/spectral.hpp"

namespace kal {

// Time-dependent mass coefficient eps(t).
class EpsilonSpec {
 public:
  enum class Kind { ExpRelax, Constant, Custom };
  using Fn = std::function<double(double)>;

  // a + (eps0 - a) e^{-t}
  static EpsilonSpec exp_relax(double a, double eps0, std::optional<double> L = std::nullopt);
  static EpsilonSpec constant(double a, std::optional<double> L = std::nullopt);
  static EpsilonSpec custom(Fn value, Fn derivative, double a, double eps0,
                            std::optional<double> L = std::nullopt);

  Kind kind() const { return kind_; }
  double value(double t) const;
  double derivative(double t) const;
  double a() const { return a_; }
  double eps0() const { return eps0_; }
  // bound on |eps| + |eps'|; sampled supremum when not given
  double L() const { return L_; }
  bool L_declared() const { return L_declared_; }

 private:
  Kind kind_ = Kind::Constant;
  double a_ = 1.0;
  double eps0_ = 1.0;
  double L_ = 0.0;
  bool L_declared_ = false;
  Fn value_;
  Fn derivative_;
  void settle_L(std::optional<double> L);
};

struct ScalarFn {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

// Damping nonlinearity f and source g (with antiderivative G, G(0) = 0).
struct NonlinearitySpec {
  std::string f_kind;
  ScalarFn f;
  double p1 = 1.0;

  std::string g_kind;
  ScalarFn g;
  std::function<double(double)> G;
  double p2 = 1.0;
  double kappa = 0.0;

  // f(s) = s + offset; offset != 0 only for validator fixtures
  static void set_linear_damping(NonlinearitySpec& n, double offset = 0.0);
  // g = kappa sin s, G = kappa (1 - cos s)
  static void set_sine_source(NonlinearitySpec& n, double kappa);
  static void set_zero_source(NonlinearitySpec& n);
};

struct LyapunovParams {
  double alpha = 0.05;
  double lambda = 1.2;
};

struct ProblemSpec {
  std::shared_ptr<const DomainGrid> grid;
  KernelSpec kernel;
  std::shared_ptr<const HistoryGrid> history;
  EpsilonSpec eps;
  double m = 2.0;
  double delta = 0.5;
  NonlinearitySpec nonlin;
  SpectralField h;
  LyapunovParams lyapunov;
  // initial displacement and velocity; eta_0 = 0
  SpectralField u0;
  SpectralField u1;

  double lambda1() const { return grid->eigenvalue(1); }
};

ProblemSpec default_problem();

// Rebuild grid-dependent members for a different mode count, keeping the
// low modes of h and the initial data.
ProblemSpec with_modes(const ProblemSpec& spec, std::size_t n_modes);

struct Violation {
  std::string equation;  // label printed in front of the message
  std::string message;
};

std::vector<Violation> validate_hypotheses(const ProblemSpec& spec);

struct ConstraintCheck {
  std::string equation;
  std::string description;
  double value = 0.0;  // the evaluated left-hand side
  bool satisfied = false;
};

struct LyapunovReport {
  std::vector<ConstraintCheck> checks;
  bool all_satisfied() const;
};

// eps(t) is replaced by eps0 throughout.
LyapunovReport validate_lyapunov_params(const ProblemSpec& spec);

}  // namespace kal
