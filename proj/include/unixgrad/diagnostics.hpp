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

#ifndef UNIXGRAD_DIAGNOSTICS_HPP
#define UNIXGRAD_DIAGNOSTICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unixgrad/common.hpp"
#include "unixgrad/data.hpp"
#include "unixgrad/oracles.hpp"
#include "unixgrad/solver.hpp"

namespace unixgrad {

struct CurvePoint {
  double t = 0.0;
  double value = 0.0;
};

/// Least-squares slope of log(value) against log(t).
inline double rate_fit(std::span<const CurvePoint> curve) {
  if (curve.size() < 5) throw ConfigError("rate_fit needs at least 5 checkpoints");
  long double mx = 0.0L, my = 0.0L;
  for (const auto& p : curve) {
    if (!(p.t > 0.0)) throw ConfigError("rate_fit needs positive abscissae");
    if (!(p.value > 0.0) || !std::isfinite(p.value)) throw NumericError("rate_fit needs positive finite values");
    mx += std::log(static_cast<long double>(p.t));
    my += std::log(static_cast<long double>(p.value));
  }
  const auto n = static_cast<long double>(curve.size());
  mx /= n;
  my /= n;
  long double sxy = 0.0L, sxx = 0.0L;
  for (const auto& p : curve) {
    const long double dx = std::log(static_cast<long double>(p.t)) - mx;
    sxy += dx * (std::log(static_cast<long double>(p.value)) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0L) throw ConfigError("rate_fit needs distinct abscissae");
  return static_cast<double>(sxy / sxx);
}

/// Slope over the points with lo <= t <= hi.
inline double rate_fit(std::span<const CurvePoint> curve, double lo, double hi) {
  std::vector<CurvePoint> window;
  for (const auto& p : curve) {
    if (p.t >= lo && p.t <= hi) window.push_back(p);
  }
  return rate_fit(window);
}

/// 1, 2, 4, ... up to T, plus T itself.
inline std::vector<std::size_t> checkpoint_schedule(std::size_t horizon) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= horizon; t *= 2) {
    out.push_back(t);
    if (t > horizon / 2) break;
  }
  if (out.back() != horizon) out.push_back(horizon);
  return out;
}

enum class Theorem { NonsmoothDet, SmoothDet, NonsmoothStoch, SmoothStoch };

inline std::string_view to_string(Theorem th) {
  switch (th) {
    case Theorem::NonsmoothDet: return "nonsmooth-deterministic";
    case Theorem::SmoothDet: return "smooth-deterministic";
    case Theorem::NonsmoothStoch: return "nonsmooth-stochastic";
    default: return "smooth-stochastic";
  }
}

inline bool is_stochastic(Theorem th) { return th == Theorem::NonsmoothStoch || th == Theorem::SmoothStoch; }

/// Constants a bound may need. Absent values make the check skip.
struct BoundConstants {
  double diameter = 0.0;
  std::optional<double> smoothness;
  std::optional<double> gradient_bound;
  std::optional<double> noise;
};

/// Bound value at horizon t, or nullopt when a needed constant is missing.
///
/// NonsmoothDet / NonsmoothStoch: 6D/t^2 + 14 G D / sqrt(t)
/// SmoothDet:   20 sqrt(7) D^2 L / t^2
/// SmoothStoch: 224 sqrt(14) D^2 L / t^2 + 14 sqrt(2) sigma D / sqrt(t)
inline std::optional<double> theorem_bound(Theorem th, const BoundConstants& c, double t) {
  const double D = c.diameter;
  const double t2 = t * t;
  switch (th) {
    case Theorem::NonsmoothDet:
    case Theorem::NonsmoothStoch:
      if (!c.gradient_bound) return std::nullopt;
      return 6.0 * D / t2 + 14.0 * *c.gradient_bound * D / std::sqrt(t);
    case Theorem::SmoothDet:
      if (!c.smoothness) return std::nullopt;
      return 20.0 * std::sqrt(7.0) * D * D * *c.smoothness / t2;
    case Theorem::SmoothStoch:
      if (!c.smoothness || !c.noise) return std::nullopt;
      return 224.0 * std::sqrt(14.0) * D * D * *c.smoothness / t2 + 14.0 * std::sqrt(2.0) * *c.noise * D / std::sqrt(t);
  }
  return std::nullopt;
}

/// (7 D sqrt(1 + sum alpha_t^2 ||g_t - M_t||^2) - D) / T^2
inline double tight_nonsmooth_bound(double diameter, double grad_diff_sum, double t) {
  return (7.0 * diameter * std::sqrt(1.0 + grad_diff_sum) - diameter) / (t * t);
}

struct RateReport {
  Theorem theorem = Theorem::SmoothDet;
  std::vector<double> t;
  std::vector<double> suboptimality;
  std::vector<double> bound;
  std::vector<double> margin;  ///< bound - suboptimality
  std::optional<double> slope;
  bool skipped = false;
  std::string note;

  std::size_t violations() const {
    std::size_t v = 0;
    for (double m : margin) v += m < 0.0 ? 1 : 0;
    return v;
  }
  bool holds() const { return !skipped && violations() == 0; }
  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (double x : margin) m = std::min(m, x);
    return m;
  }
};

/// Checks a suboptimality curve (a single deterministic run, or the mean over
/// seeds for the stochastic theorems) against a bound.
inline RateReport check_theorem_bound(std::span<const CurvePoint> curve, Theorem th, const BoundConstants& constants) {
  RateReport report;
  report.theorem = th;
  for (const auto& p : curve) {
    report.t.push_back(p.t);
    report.suboptimality.push_back(p.value);
  }
  bool positive = curve.size() >= 5;
  for (const auto& p : curve) positive = positive && p.value > 0.0;
  if (positive) report.slope = rate_fit(curve);
  for (const auto& p : curve) {
    const auto b = theorem_bound(th, constants, p.t);
    if (!b) {
      report.skipped = true;
      report.note = "missing constants";
      report.bound.clear();
      report.margin.clear();
      return report;
    }
    report.bound.push_back(*b);
    report.margin.push_back(*b - p.value);
  }
  return report;
}

/// Suboptimality f(xbar_t) - f* at the given checkpoints of a trace.
inline std::vector<CurvePoint> suboptimality_curve(const RunTrace& trace, const Problem& problem,
                                                   const Reference& ref, std::span<const std::size_t> checkpoints) {
  std::vector<CurvePoint> curve;
  for (std::size_t t : checkpoints) {
    if (t < 1 || t > trace.records.size()) throw ConfigError("checkpoint outside the trace");
    const Vector& x = trace.records[t - 1].x_bar;
    if (x.size() == 0) throw ConfigError("trace was recorded without iterates");
    curve.push_back({static_cast<double>(t), problem.gap(x, ref)});
  }
  return curve;
}

inline BoundConstants bound_constants(const Problem& problem, const OracleMode& mode, const Diameter& diam) {
  BoundConstants c;
  c.diameter = diam.value;
  c.smoothness = problem.smoothness();
  c.gradient_bound = oracle_gradient_bound(problem, mode);
  c.noise = noise_bound(problem, mode);
  return c;
}

/// Theorem check on a single run at the checkpoints of `checkpoints`.
inline RateReport check_theorem_bound(const RunTrace& trace, const Problem& problem, const Reference& ref, Theorem th,
                                      std::span<const std::size_t> checkpoints, const OracleMode& mode = Deterministic{}) {
  const auto curve = suboptimality_curve(trace, problem, ref, checkpoints);
  return check_theorem_bound(curve, th, bound_constants(problem, mode, trace.diameter));
}

struct LemmaResult {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  ///< rhs - lhs
};

/// f(xbar_T) - f(x_ref) <= 2 R_T(x_ref) / T^2 + 1e-9.
inline LemmaResult lemma1_check(const RunTrace& trace, const Vector& x_ref, const Problem& problem) {
  const double T = static_cast<double>(trace.records.size());
  if (T < 1) throw ConfigError("empty trace");
  LemmaResult r;
  r.lhs = problem.value(trace.x_bar) - problem.value(x_ref);
  r.rhs = 2.0 * weighted_regret(trace, x_ref) / (T * T);
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs + 1e-9;
  return r;
}

/// sqrt(sum a) <= sum_i a_i / sqrt(sum_{j<=i} a_j) <= 2 sqrt(sum a), 0/0 := 0.
/// `lhs` is the middle sum; `rhs` the upper bound.
inline LemmaResult lemma2_check(std::span<const double> a, double rel_tol = 1e-12) {
  long double prefix = 0.0L, middle = 0.0L;
  for (double v : a) {
    if (!(v >= 0.0)) throw DomainError("lemma2_check needs nonnegative entries");
    prefix += v;
    if (prefix > 0.0L) middle += v / std::sqrt(prefix);
  }
  const long double lower = std::sqrt(prefix);
  const long double upper = 2.0L * lower;
  const long double slack = rel_tol * std::max(1.0L, upper);
  LemmaResult r;
  r.lhs = static_cast<double>(middle);
  r.rhs = static_cast<double>(upper);
  r.margin = static_cast<double>(std::min(middle - lower, upper - middle));
  r.pass = lower <= middle + slack && middle <= upper + slack;
  return r;
}

/// Fraction of rows with sign(a^T x) == label; a zero score counts as wrong.
inline double test_accuracy(const Vector& model, const SparseDataset& test) {
  if (test.size() == 0) throw ConfigError("empty test set");
  if (model.size() < test.dim) throw DimensionMismatch("model is shorter than the dataset dimension");
  std::size_t correct = 0;
  for (const auto& row : test.rows) {
    double score = 0.0;
    for (const auto& [idx, val] : row.features) score += model[idx - 1] * val;
    if ((score > 0.0 && row.label > 0.0) || (score < 0.0 && row.label < 0.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace unixgrad

#endif  // UNIXGRAD_DIAGNOSTICS_HPP
