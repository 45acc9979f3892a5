#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kal/memory.hpp"
#include "kal/model.hpp"
#include "kal/spectral.hpp"

namespace kal {

struct SystemState {
  double t = 0.0;
  SpectralField u;
  SpectralField v;  // u_t
  HistoryField eta;

  bool operator==(const SystemState&) const = default;
};

SystemState zero_state(const ProblemSpec& spec, double t = 0.0);
// (u0, u1, eta = 0) taken from the ProblemSpec
SystemState initial_state(const ProblemSpec& spec);

enum class Scheme { ImexEuler, ReferenceRK4 };

struct StepperConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ImexEuler;
  double newton_tol = 1e-12;
  // 0 keeps the coefficient frozen at the old level
  int newton_max_iter = 50;
};

struct StateDerivative {
  SpectralField du;
  SpectralField dv;
  HistoryField deta;
};

// 1 + ||grad u||^m
double kirchhoff_coefficient(const SpectralField& u, const ProblemSpec& spec);

// -delta P f(v) + P g(u) + h
SpectralField explicit_forcing(const SpectralField& u, const SpectralField& v,
                               const ProblemSpec& spec);

StateDerivative rhs(const SystemState& state, const ProblemSpec& spec);

struct ImexStepInfo {
  double coefficient = 1.0;  // Kirchhoff coefficient used in the solve
  SpectralField forcing;     // explicit forcing at the old level
  int iterations = 0;
  std::vector<double> trace;  // relative coefficient changes per sweep
};

// One backward-Euler step with the given coefficient and explicit forcing.
// Affine in the state, which is what makes the decomposition split exact.
SystemState advance_frozen(const SystemState& state, const ProblemSpec& spec, double dt,
                           double coefficient, const SpectralField& forcing);

SystemState step_imex(const SystemState& state, const ProblemSpec& spec,
                      const StepperConfig& cfg, ImexStepInfo* info = nullptr);

SystemState step_reference(const SystemState& state, const ProblemSpec& spec,
                           const StepperConfig& cfg);

// largest dt the explicit reference accepts from this state
double stability_bound(const ProblemSpec& spec, const SystemState& state, double dt_hint = 0.0);

SystemState step(const SystemState& state, const ProblemSpec& spec, const StepperConfig& cfg);

// called with step index 0 for the initial state, then after every step
using Observer = std::function<void(const SystemState&, std::size_t)>;

struct Trajectory {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t stride = 0;  // states[i] is step i * stride; 0 = nothing stored
  std::vector<SystemState> states;
  SystemState final_state;
};

std::size_t step_count(double T_final, double dt);

Trajectory simulate(const ProblemSpec& spec, const StepperConfig& cfg, double T_final,
                    const SystemState& initial, const std::vector<Observer>& observers = {},
                    std::size_t store_stride = 0);
Trajectory simulate(const ProblemSpec& spec, const StepperConfig& cfg, double T_final,
                    const std::vector<Observer>& observers = {}, std::size_t store_stride = 0);

// sqrt(||grad u||^2 + eps(t)||v||^2 + ||eta||^2_M2)
double phase_norm(const SystemState& s, const ProblemSpec& spec);
SystemState difference(const SystemState& a, const SystemState& b);
bool all_finite(const SystemState& s);

}  // namespace kal
