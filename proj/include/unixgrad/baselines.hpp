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

#ifndef UNIXGRAD_BASELINES_HPP
#define UNIXGRAD_BASELINES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "unixgrad/common.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/oracles.hpp"
#include "unixgrad/solver.hpp"

namespace unixgrad {

/// Projected SGD with step c / sqrt(t).
struct Sgd {
  double c = 1.0;
};

/// AdaGrad with one scalar step D / sqrt(max(1, sum ||g_i||^2)).
struct AdaGradScalar {
  double diameter = 1.0;
};

/// AMSGrad with constant step and Euclidean projection.
struct AmsGrad {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using BaselineKind = std::variant<Sgd, AdaGradScalar, AmsGrad>;

inline std::string_view baseline_name(const BaselineKind& kind) {
  switch (kind.index()) {
    case 0: return "sgd";
    case 1: return "adagrad";
    default: return "amsgrad";
  }
}

struct BaselineConfig {
  BaselineKind kind = Sgd{};
  std::size_t horizon = 1;
  std::uint64_t seed = 0;
  OracleMode mode = Deterministic{};
  std::optional<Vector> initial_point;
  bool record_iterates = true;
};

namespace detail {

inline void validate_baseline(const BaselineKind& kind) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sgd>) {
          if (!(k.c > 0.0)) throw ConfigError("SGD step constant must be positive");
        } else if constexpr (std::is_same_v<K, AdaGradScalar>) {
          if (!(k.diameter > 0.0)) throw ConfigError("AdaGrad diameter must be positive");
        } else {
          if (!(k.alpha > 0.0) || !(k.epsilon > 0.0)) throw ConfigError("AMSGrad step and epsilon must be positive");
          if (k.beta1 < 0.0 || k.beta1 >= 1.0 || k.beta2 < 0.0 || k.beta2 >= 1.0) {
            throw ConfigError("AMSGrad betas must lie in [0, 1)");
          }
        }
      },
      kind);
}

}  // namespace detail

/// Runs a baseline. Each record holds the query point x_t in `x`, the new
/// iterate x_{t+1} in `x_bar` and `y` (baselines are judged on their last
/// iterate), the gradient g_t, its norm in `grad_diff_norm`, and the scalar
/// step in `eta`.
template <GradientOracle Oracle>
RunTrace run_baseline(Oracle& oracle, const FeasibleSet& set, const BaselineConfig& config) {
  if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
  detail::validate_baseline(config.kind);
  const Eigen::Index d = set.dim();
  Vector x = config.initial_point ? *config.initial_point : euclidean_project(set, Vector::Zero(d));
  require_same_dim(d, x.size(), "initial point");
  if (!set.contains(x)) throw ConfigError("initial point is not feasible");

  RunTrace trace;
  trace.records.reserve(config.horizon);
  long double grad_sq_sum = 0.0L;
  Vector first_moment = Vector::Zero(d);
  Vector second_moment = Vector::Zero(d);
  Vector second_moment_max = Vector::Zero(d);

  try {
    for (std::size_t t = 1; t <= config.horizon; ++t) {
      const Vector g = oracle.gradient(x);
      require_finite(g, "gradient");
      IterationRecord rec;
      rec.t = t;
      rec.alpha = 1.0;
      rec.grad_diff_norm = g.norm();

      Vector next;
      std::visit(
          [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Sgd>) {
              rec.eta = k.c / std::sqrt(static_cast<double>(t));
              next = euclidean_project(set, x - rec.eta * g);
            } else if constexpr (std::is_same_v<K, AdaGradScalar>) {
              grad_sq_sum += static_cast<long double>(g.squaredNorm());
              rec.eta = static_cast<double>(k.diameter / std::sqrt(std::max(1.0L, grad_sq_sum)));
              next = euclidean_project(set, x - rec.eta * g);
            } else {
              first_moment = k.beta1 * first_moment + (1.0 - k.beta1) * g;
              second_moment = k.beta2 * second_moment + (1.0 - k.beta2) * g.cwiseAbs2();
              second_moment_max = second_moment_max.cwiseMax(second_moment);
              rec.eta = k.alpha;
              const Vector direction =
                  first_moment.array() / (second_moment_max.array().sqrt() + k.epsilon);
              next = euclidean_project(set, x - k.alpha * direction);
            }
          },
          config.kind);

      if constexpr (ValueOracle<Oracle>) rec.objective = oracle.value(next);
      if (config.record_iterates) {
        rec.x = x;
        rec.z_tilde = x;
        rec.gradient = g;
        rec.y = next;
        rec.x_bar = next;
      } else if (t == config.horizon) {
        rec.x_bar = next;
      }
      trace.records.push_back(std::move(rec));
      x = std::move(next);
    }
  } catch (const Error& e) {
    trace.valid = false;
    trace.error = e.what();
  }
  trace.x_bar = x;
  if constexpr (requires { oracle.calls(); }) trace.oracle_calls = oracle.calls();
  return trace;
}

inline RunTrace run_baseline(const Problem& problem, const BaselineConfig& config) {
  ProblemOracle oracle(problem, config.mode, config.seed);
  return run_baseline(oracle, problem.set(), config);
}

/// Step-size grid {10^k : k = -3..1}.
inline std::vector<double> step_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0}; }

/// Replaces the tunable constant of `kind` (c for SGD, alpha for AMSGrad)
/// with the grid value that gives the lowest final training objective.
/// AdaGrad has no tunable constant and is returned unchanged.
inline BaselineKind tune_baseline(const Problem& problem, BaselineConfig config) {
  if (std::holds_alternative<AdaGradScalar>(config.kind)) return config.kind;
  BaselineKind best = config.kind;
  double best_value = std::numeric_limits<double>::infinity();
  for (double step : step_grid()) {
    if (auto* sgd = std::get_if<Sgd>(&config.kind)) sgd->c = step;
    if (auto* ams = std::get_if<AmsGrad>(&config.kind)) ams->alpha = step;
    config.record_iterates = false;
    const RunTrace trace = run_baseline(problem, config);
    if (!trace.valid) continue;
    const double value = problem.value(trace.x_bar);
    if (value < best_value) {
      best_value = value;
      best = config.kind;
    }
  }
  return best;
}

}  // namespace unixgrad

#endif  // UNIXGRAD_BASELINES_HPP
