// Copyright (C) 2026 The unixgrad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNIXGRAD_SOLVER_HPP
#define UNIXGRAD_SOLVER_HPP

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unixgrad/common.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/oracles.hpp"

namespace unixgrad {

/// Anything that answers gradient queries. Stochastic oracles may return a
/// different answer on every call.
template <typename O>
concept GradientOracle = requires(O& oracle, const Vector& x) {
  { oracle.gradient(x) } -> std::convertible_to<Vector>;
};

template <typename O>
concept ValueOracle = requires(const O& oracle, const Vector& x) {
  { oracle.value(x) } -> std::convertible_to<double>;
};

/// Oracle built from two callables.
template <typename ValueFn, typename GradFn>
class FunctionOracle {
 public:
  FunctionOracle(ValueFn value, GradFn grad) : value_(std::move(value)), grad_(std::move(grad)) {}

  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) {
    ++calls_;
    return grad_(x);
  }
  std::size_t calls() const noexcept { return calls_; }

 private:
  ValueFn value_;
  GradFn grad_;
  std::size_t calls_ = 0;
};

/// Which pair (M_t, g_t) drives the two prox steps.
///
/// UniXGrad:     M_t = grad f(z_t), g_t = grad f(xbar_t), alpha_t = t.
/// MirrorProx:   M_t = grad f(y_{t-1}), g_t = grad f(x_t), alpha_t = 1.
/// OptimisticMD: M_t = g_{t-1} (grad f(y_0) at t = 1), g_t = grad f(x_t), alpha_t = 1.
enum class Variant { UniXGrad, MirrorProx, OptimisticMD };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::UniXGrad: return "unixgrad";
    case Variant::MirrorProx: return "mirror-prox";
    default: return "optimistic-md";
  }
}

struct SolverConfig {
  FeasibleSet set;
  std::size_t horizon = 1;
  Geometry geometry = Geometry::Euclidean;
  std::optional<double> diameter_override{};
  Variant variant = Variant::UniXGrad;
  std::uint64_t seed = 0;
  OracleMode mode = Deterministic{};
  /// y_0; defaults to the Euclidean projection of the origin.
  std::optional<Vector> initial_point{};
  /// Keep the per-iteration vectors (x_t, y_t, ...) in the trace.
  bool record_iterates = true;
};

struct SolverState {
  std::size_t t = 0;  ///< completed iterations
  Vector y_prev;      ///< y_{t}
  double weight_sum = 0.0;          ///< A_t = sum alpha_i
  Vector weighted_sum;              ///< sum alpha_i x_i
  long double grad_diff_accum = 0;  ///< sum alpha_i^2 ||g_i - M_i||_*^2
  Vector x_bar;
  double eta = 0.0;    ///< step of the last iteration
  Vector prev_gradient;  ///< g_t, the optimistic hint for the next step
};

struct IterationRecord {
  std::size_t t = 0;
  double alpha = 0.0;
  double eta = 0.0;
  Vector x;        ///< first prox output (query point of g_t for baselines)
  Vector y;        ///< second prox output
  Vector x_bar;    ///< point the iteration is evaluated at
  Vector z_tilde;  ///< query point of the hint M_t
  Vector gradient; ///< g_t
  double grad_diff_norm = 0.0;  ///< ||g_t - M_t||_*
  double objective = std::numeric_limits<double>::quiet_NaN();  ///< f(x_bar_t)
};

struct RunTrace {
  std::vector<IterationRecord> records;
  Vector x_bar;  ///< returned point
  bool valid = true;
  std::string error;
  std::size_t oracle_calls = 0;
  Diameter diameter;
};

inline double weight(std::size_t t) { return static_cast<double>(t); }

/// eta_t = 2D / sqrt(1 + sum_{i<t} alpha_i^2 ||g_i - M_i||_*^2)
inline double learning_rate(double diameter, long double grad_diff_prefix) {
  return static_cast<double>(2.0L * diameter / std::sqrt(1.0L + grad_diff_prefix));
}

inline double variant_weight(Variant v, std::size_t t) { return v == Variant::UniXGrad ? weight(t) : 1.0; }

inline Diameter resolve_diameter(const SolverConfig& config) {
  return diameter(config.geometry, config.set, config.diameter_override);
}

inline SolverState init_state(const SolverConfig& config) {
  const Eigen::Index d = config.set.dim();
  SolverState state;
  state.y_prev = config.initial_point ? *config.initial_point : euclidean_project(config.set, Vector::Zero(d));
  require_same_dim(d, state.y_prev.size(), "initial point");
  if (!config.set.contains(state.y_prev)) throw ConfigError("initial point is not feasible");
  state.weighted_sum = Vector::Zero(d);
  state.x_bar = state.y_prev;
  return state;
}

/// z_t = (alpha_t y_{t-1} + sum_{i<t} alpha_i x_i) / A_t
inline Vector extrapolation_point(const SolverState& state, double alpha) {
  return (alpha * state.y_prev + state.weighted_sum) / (state.weight_sum + alpha);
}

/// Folds x_t into the running weighted average and returns xbar_t.
inline Vector update_average(SolverState& state, const Vector& x, double alpha) {
  state.weighted_sum += alpha * x;
  state.weight_sum += alpha;
  state.x_bar = state.weighted_sum / state.weight_sum;
  return state.x_bar;
}

/// One Mirror-Prox iteration. Both prox steps share eta_t and the anchor y_{t-1}.
template <GradientOracle Oracle>
IterationRecord step(SolverState& state, Oracle& oracle, const SolverConfig& config, const Diameter& diam) {
  const std::size_t t = state.t + 1;
  const double alpha = variant_weight(config.variant, t);
  const Vector anchor = state.y_prev;

  IterationRecord rec;
  rec.t = t;
  rec.alpha = alpha;

  Vector hint;
  switch (config.variant) {
    case Variant::UniXGrad:
      rec.z_tilde = extrapolation_point(state, alpha);
      hint = oracle.gradient(rec.z_tilde);
      break;
    case Variant::MirrorProx:
      rec.z_tilde = anchor;
      hint = oracle.gradient(anchor);
      break;
    case Variant::OptimisticMD:
      rec.z_tilde = anchor;
      hint = t == 1 ? Vector(oracle.gradient(anchor)) : state.prev_gradient;
      break;
  }
  require_finite(hint, "gradient hint");

  const double eta = learning_rate(diam.value, state.grad_diff_accum);
  rec.eta = eta;
  rec.x = prox_step(config.geometry, config.set, anchor, alpha * hint, eta);
  rec.x_bar = update_average(state, rec.x, alpha);

  const Vector& query = config.variant == Variant::UniXGrad ? rec.x_bar : rec.x;
  rec.gradient = oracle.gradient(query);
  require_finite(rec.gradient, "gradient");
  rec.y = prox_step(config.geometry, config.set, anchor, alpha * rec.gradient, eta);

  rec.grad_diff_norm = dual_norm(config.geometry, rec.gradient - hint);
  const long double inc = static_cast<long double>(alpha) * alpha * rec.grad_diff_norm * rec.grad_diff_norm;
  state.grad_diff_accum += inc;
  if (!std::isfinite(static_cast<double>(state.grad_diff_accum))) throw NumericError("gradient-difference overflow");

  if constexpr (ValueOracle<Oracle>) rec.objective = oracle.value(rec.x_bar);

  state.y_prev = rec.y;
  state.prev_gradient = rec.gradient;
  state.eta = eta;
  state.t = t;
  return rec;
}

template <GradientOracle Oracle>
RunTrace run(Oracle& oracle, const SolverConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
  RunTrace trace;
  trace.diameter = resolve_diameter(config);
  SolverState state = init_state(config);
  trace.records.reserve(config.horizon);
  try {
    for (std::size_t i = 0; i < config.horizon; ++i) {
      IterationRecord rec = step(state, oracle, config, trace.diameter);
      if (!config.record_iterates) {
        rec.x = rec.y = rec.z_tilde = rec.gradient = Vector();
        if (i + 1 < config.horizon) rec.x_bar = Vector();
      }
      trace.records.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    trace.valid = false;
    trace.error = e.what();
  }
  trace.x_bar = state.x_bar;
  if constexpr (requires { oracle.calls(); }) trace.oracle_calls = oracle.calls();
  return trace;
}

inline void require_matching_set(const FeasibleSet& a, const FeasibleSet& b) {
  if (a.dim() != b.dim() || a.kind() != b.kind()) throw ConfigError("problem and solver use different feasible sets");
}

/// Runs the solver on a problem with the oracle mode and seed of `config`.
inline RunTrace run(const Problem& problem, const SolverConfig& config) {
  require_matching_set(problem.set(), config.set);
  ProblemOracle oracle(problem, config.mode, config.seed);
  return run(oracle, config);
}

/// R_T(x_ref) = sum alpha_t <x_t - x_ref, g_t>, with the g_t actually queried.
inline double weighted_regret(const RunTrace& trace, const Vector& x_ref) {
  long double acc = 0.0L;
  for (const auto& rec : trace.records) {
    if (rec.x.size() == 0 || rec.gradient.size() == 0) throw ConfigError("trace was recorded without iterates");
    require_same_dim(rec.x.size(), x_ref.size(), "weighted_regret reference");
    acc += static_cast<long double>(rec.alpha) * (rec.x - x_ref).dot(rec.gradient);
  }
  return static_cast<double>(acc);
}

/// sum_{t<=T} alpha_t^2 ||g_t - M_t||_*^2 replayed from the trace.
inline double grad_diff_total(const RunTrace& trace) {
  long double acc = 0.0L;
  for (const auto& rec : trace.records) {
    acc += static_cast<long double>(rec.alpha) * rec.alpha * rec.grad_diff_norm * rec.grad_diff_norm;
  }
  return static_cast<double>(acc);
}

}  // namespace unixgrad

#endif  // UNIXGRAD_SOLVER_HPP
