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

#ifndef UNIXGRAD_GEOMETRY_HPP
#define UNIXGRAD_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unixgrad/common.hpp"

namespace unixgrad {

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

struct L2Ball {
  Vector center;
  double radius;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// Probability simplex with every coordinate floored at `floor`.
struct Simplex {
  Eigen::Index dim;
  double floor = 0.0;
};

/// Compact convex constraint set. Construct through the factory functions,
/// which enforce the invariants of each variant.
class FeasibleSet {
 public:
  using Variant = std::variant<L2Ball, Box, Simplex>;

  static FeasibleSet ball(Vector center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("L2Ball radius must be positive");
    require_finite(center, "ball center");
    return FeasibleSet(L2Ball{std::move(center), radius});
  }

  static FeasibleSet ball(Eigen::Index dim, double radius) { return ball(Vector::Zero(dim), radius); }

  static FeasibleSet box(Vector lower, Vector upper) {
    require_same_dim(lower.size(), upper.size(), "box bounds");
    require_finite(lower, "box lower bound");
    require_finite(upper, "box upper bound");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (lower[i] > upper[i]) throw ConfigError("box lower bound exceeds upper bound");
    }
    return FeasibleSet(Box{std::move(lower), std::move(upper)});
  }

  static FeasibleSet simplex(Eigen::Index dim, double floor = 0.0) {
    if (dim <= 0) throw ConfigError("simplex dimension must be positive");
    if (!(floor >= 0.0) || !(floor * static_cast<double>(dim) < 1.0)) {
      throw ConfigError("simplex floor must satisfy 0 <= floor < 1/dim");
    }
    return FeasibleSet(Simplex{dim, floor});
  }

  const Variant& variant() const noexcept { return set_; }

  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&set_);
  }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, L2Ball>) return s.center.size();
          else if constexpr (std::is_same_v<S, Box>) return s.lower.size();
          else return s.dim;
        },
        set_);
  }

  std::string_view kind() const {
    return std::visit(
        [](const auto& s) -> std::string_view {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, L2Ball>) return "ball";
          else if constexpr (std::is_same_v<S, Box>) return "box";
          else return "simplex";
        },
        set_);
  }

  bool contains(const Vector& x, double tol = kMembershipTol) const {
    if (x.size() != dim() || !x.allFinite()) return false;
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, L2Ball>) {
            return (x - s.center).norm() <= s.radius + tol;
          } else if constexpr (std::is_same_v<S, Box>) {
            return ((x - s.lower).array() >= -tol).all() && ((s.upper - x).array() >= -tol).all();
          } else {
            return (x.array() >= s.floor - tol).all() && std::abs(x.sum() - 1.0) <= tol;
          }
        },
        set_);
  }

  /// max ||x||_2 over the set.
  double max_norm() const {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, L2Ball>) {
            return s.center.norm() + s.radius;
          } else if constexpr (std::is_same_v<S, Box>) {
            return s.lower.cwiseAbs().cwiseMax(s.upper.cwiseAbs()).norm();
          } else {
            return 1.0;
          }
        },
        set_);
  }

 private:
  explicit FeasibleSet(Variant v) : set_(std::move(v)) {}

  Variant set_;
};

// ---------------------------------------------------------------------------
// Bregman geometries
// ---------------------------------------------------------------------------

/// Distance-generating function. Euclidean is R(x) = 0.5 ||x||_2^2
/// (1-strongly convex in l2); NegativeEntropy is R(x) = sum x_i log x_i
/// (1-strongly convex in l1 on the simplex).
enum class Geometry { Euclidean, NegativeEntropy };

inline std::string_view to_string(Geometry g) {
  return g == Geometry::Euclidean ? "euclidean" : "entropy";
}

inline Geometry parse_geometry(std::string_view name) {
  if (name == "euclidean") return Geometry::Euclidean;
  if (name == "entropy" || name == "negative-entropy") return Geometry::NegativeEntropy;
  throw ConfigError("unknown geometry '" + std::string(name) + "'");
}

/// Norm in which R is 1-strongly convex.
inline double primal_norm(Geometry g, const Vector& v) {
  return g == Geometry::Euclidean ? v.norm() : v.lpNorm<1>();
}

inline double dual_norm(Geometry g, const Vector& v) {
  return g == Geometry::Euclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

namespace detail {

inline void require_entropy_domain(const Vector& x, bool strict, const char* what) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < 0.0 || (strict && x[i] == 0.0)) {
      throw DomainError(std::string("negative entropy requires ") + (strict ? "strictly positive " : "nonnegative ") +
                        what);
    }
  }
}

inline double xlogx(double v) { return v == 0.0 ? 0.0 : v * std::log(v); }

}  // namespace detail

inline double distance_generating(Geometry g, const Vector& x) {
  if (g == Geometry::Euclidean) return 0.5 * x.squaredNorm();
  detail::require_entropy_domain(x, false, "x");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += detail::xlogx(x[i]);
  return acc;
}

/// Gradient of R (the mirror map).
inline Vector mirror_map(Geometry g, const Vector& x) {
  if (g == Geometry::Euclidean) return x;
  detail::require_entropy_domain(x, true, "x");
  return (x.array().log() + 1.0).matrix();
}

/// D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>.
inline double bregman_divergence(Geometry g, const Vector& x, const Vector& y) {
  require_same_dim(x.size(), y.size(), "bregman_divergence");
  if (g == Geometry::Euclidean) return 0.5 * (x - y).squaredNorm();
  detail::require_entropy_domain(x, false, "x");
  detail::require_entropy_domain(y, true, "y");
  // Generalized KL, summed termwise so that D(x, x) is exactly zero.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = y[i];
    acc += (xi == 0.0 ? 0.0 : xi * std::log(xi / yi)) - xi + yi;
  }
  return std::max(acc, 0.0);
}

// ---------------------------------------------------------------------------
// Projections and prox steps
// ---------------------------------------------------------------------------

namespace detail {

/// Euclidean projection of p onto {z >= floor, sum z = 1}.
inline Vector project_floored_simplex(const Vector& p, double floor) {
  const Eigen::Index d = p.size();
  const double mass = 1.0 - floor * static_cast<double>(d);
  Vector shifted = p.array() - floor;
  std::vector<double> sorted(shifted.data(), shifted.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - mass) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  return ((shifted.array() - theta).max(0.0) + floor).matrix();
}

/// KL projection of a positive probability vector q onto {x >= floor, sum x = 1}:
/// x_i = max(floor, c q_i) with c fixed by the sum constraint.
inline Vector kl_project_floored_simplex(const Vector& q, double floor) {
  const Eigen::Index d = q.size();
  if (floor == 0.0) return q / q.sum();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return q[a] < q[b]; });
  // Coordinates floored are a prefix of `order`; try prefixes of increasing length.
  double free_mass = q.sum();
  double scale = 1.0 / free_mass;
  for (Eigen::Index k = 0; k < d; ++k) {
    scale = (1.0 - floor * static_cast<double>(k)) / free_mass;
    if (scale * q[order[static_cast<std::size_t>(k)]] >= floor) break;
    free_mass -= q[order[static_cast<std::size_t>(k)]];
  }
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = std::max(floor, scale * q[i]);
  return x;
}

}  // namespace detail

/// Nearest point of `set` to `p` in the l2 norm.
inline Vector euclidean_project(const FeasibleSet& set, const Vector& p) {
  require_same_dim(set.dim(), p.size(), "euclidean_project");
  require_finite(p, "projection input");
  return std::visit(
      [&](const auto& s) -> Vector {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, L2Ball>) {
          const Vector offset = p - s.center;
          const double dist = offset.norm();
          if (dist <= s.radius) return p;
          return s.center + (s.radius / dist) * offset;
        } else if constexpr (std::is_same_v<S, Box>) {
          return p.cwiseMax(s.lower).cwiseMin(s.upper);
        } else {
          return detail::project_floored_simplex(p, s.floor);
        }
      },
      set.variant());
}

/// argmin_{x in set} <x, v> + (1/eta) D_R(x, y), in closed form.
///
/// Euclidean geometry works on every set (projection of y - eta v).
/// Negative entropy is supported on the simplex only: multiplicative update
/// followed by the exact KL projection onto the floored simplex.
inline Vector prox_step(Geometry g, const FeasibleSet& set, const Vector& y, const Vector& v, double eta) {
  require_same_dim(set.dim(), y.size(), "prox_step anchor");
  require_same_dim(set.dim(), v.size(), "prox_step direction");
  require_finite(v, "prox_step direction");
  require_finite(y, "prox_step anchor");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("prox_step requires a positive finite step");
  if (g == Geometry::Euclidean) return euclidean_project(set, y - eta * v);

  const Simplex* simplex = set.get_if<Simplex>();
  if (simplex == nullptr) {
    throw UnsupportedCombination("negative entropy prox has no closed form on a " + std::string(set.kind()));
  }
  detail::require_entropy_domain(y, true, "prox anchor");
  Vector logits = y.array().log().matrix() - eta * v;
  logits.array() -= logits.maxCoeff();
  const Vector q = logits.array().exp().matrix();
  return detail::kl_project_floored_simplex(q / q.sum(), simplex->floor);
}

// ---------------------------------------------------------------------------
// Diameter
// ---------------------------------------------------------------------------

/// D with D^2 = sup_{x,y in K} D_R(x, y).
struct Diameter {
  double value = 0.0;
  double squared = 0.0;

  static Diameter from_squared(double sq) { return Diameter{std::sqrt(sq), sq}; }
  static Diameter from_value(double d) { return Diameter{d, d * d}; }
};

/// Closed-form Bregman diameter of `set`. An override, when given, wins.
inline Diameter diameter(Geometry g, const FeasibleSet& set, std::optional<double> override_value = std::nullopt) {
  if (override_value) {
    if (!(*override_value > 0.0) || !std::isfinite(*override_value)) {
      throw ConfigError("diameter override must be positive");
    }
    return Diameter::from_value(*override_value);
  }
  if (g == Geometry::Euclidean) {
    return std::visit(
        [](const auto& s) -> Diameter {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, L2Ball>) {
            return Diameter::from_squared(2.0 * s.radius * s.radius);
          } else if constexpr (std::is_same_v<S, Box>) {
            return Diameter::from_squared(0.5 * (s.upper - s.lower).squaredNorm());
          } else {
            // Two floored vertices: 0.5 * 2 * (1 - d*floor)^2.
            const double span = 1.0 - static_cast<double>(s.dim) * s.floor;
            return Diameter::from_squared(span * span);
          }
        },
        set.variant());
  }
  const Simplex* simplex = set.get_if<Simplex>();
  if (simplex == nullptr) {
    throw UnsupportedCombination("negative entropy diameter is only defined on the simplex");
  }
  if (simplex->floor <= 0.0) {
    throw ConfigError("entropy diameter of the unfloored simplex is infinite; supply an override");
  }
  return Diameter::from_squared(std::log(1.0 / simplex->floor));
}

}  // namespace unixgrad

#endif  // UNIXGRAD_GEOMETRY_HPP
