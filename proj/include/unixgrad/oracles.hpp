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

#ifndef UNIXGRAD_ORACLES_HPP
#define UNIXGRAD_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unixgrad/common.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/rng.hpp"

namespace unixgrad {

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// f(x) = (1/2n) ||Ax - b||^2
struct LeastSquares {
  Matrix A;
  Vector b;
};

/// f(x) = (1/n) sum max(0, 1 - y_i a_i^T x)^2 + (reg/2) ||x||^2
struct SquaredHingeSVM {
  SparseMatrix features;
  Vector labels;
  double reg = 0.0;
};

/// f(x) = (1/n) ||Ax - b||_1
struct L1Regression {
  Matrix A;
  Vector b;
};

using Objective = std::variant<LeastSquares, SquaredHingeSVM, L1Regression>;

inline std::string_view objective_name(const Objective& obj) {
  switch (obj.index()) {
    case 0: return "least-squares";
    case 1: return "squared-hinge-svm";
    default: return "l1-regression";
  }
}

struct Reference {
  Vector x;
  double value = 0.0;
};

// ---------------------------------------------------------------------------
// Oracle modes
// ---------------------------------------------------------------------------

struct Deterministic {};

struct MiniBatch {
  std::size_t batch_size = 1;
};

/// Exact gradient plus N(0, sigma^2/d) noise in each coordinate.
struct AdditiveNoise {
  double sigma = 0.0;
};

using OracleMode = std::variant<Deterministic, MiniBatch, AdditiveNoise>;

inline bool is_stochastic(const OracleMode& mode) { return !std::holds_alternative<Deterministic>(mode); }

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// Objective over a feasible set together with its problem constants.
///
/// Immutable after construction. The smoothness constant L is exact
/// (largest eigenvalue) and the gradient bound G is certified over the set.
class Problem {
 public:
  Problem(Objective objective, FeasibleSet set) : objective_(std::move(objective)), set_(std::move(set)) {
    validate();
    compute_constants();
  }

  const Objective& objective() const noexcept { return objective_; }
  const FeasibleSet& set() const noexcept { return set_; }

  Eigen::Index dim() const { return set_.dim(); }

  /// Number of loss terms (rows).
  std::size_t num_samples() const {
    return std::visit([](const auto& o) -> std::size_t { return static_cast<std::size_t>(rows_of(o)); }, objective_);
  }

  bool is_smooth() const { return !std::holds_alternative<L1Regression>(objective_); }

  std::optional<double> smoothness() const { return smoothness_; }
  double gradient_bound() const { return gradient_bound_; }

  /// Bound on the per-sample gradient norm over the set; bounds every
  /// mini-batch gradient as well.
  double sample_gradient_bound() const { return sample_gradient_bound_; }

  /// Max over rows of ||a_i||_2^2.
  double max_row_norm_sq() const { return max_row_norm_sq_; }

  const std::optional<Reference>& known_reference() const noexcept { return known_reference_; }

  /// Attach an analytically known minimizer (planted instances).
  void set_known_reference(Reference ref) {
    require_same_dim(dim(), ref.x.size(), "known reference");
    known_reference_ = std::move(ref);
  }

  double value(const Vector& x) const {
    require_same_dim(dim(), x.size(), "evaluate");
    return std::visit([&](const auto& o) { return value_of(o, x); }, objective_);
  }

  Vector gradient(const Vector& x) const {
    require_same_dim(dim(), x.size(), "gradient");
    return std::visit([&](const auto& o) { return full_gradient_of(o, x); }, objective_);
  }

  /// Gradient of the average loss over `rows`, plus the full regularizer.
  Vector batch_gradient(const Vector& x, std::span<const std::size_t> rows) const {
    require_same_dim(dim(), x.size(), "batch gradient");
    if (rows.empty()) throw ConfigError("empty batch");
    return std::visit([&](const auto& o) { return batch_gradient_of(o, x, rows); }, objective_);
  }

  /// f(x) - f(ref). For least squares this uses the exact quadratic
  /// expansion around ref, which keeps full relative precision when the gap
  /// is far below f(ref) * machine epsilon.
  double gap(const Vector& x, const Reference& ref) const {
    if (const auto* ls = std::get_if<LeastSquares>(&objective_)) {
      const Vector dx = x - ref.x;
      const Vector residual = ls->A * ref.x - ls->b;
      const Vector adx = ls->A * dx;
      const double n = static_cast<double>(ls->A.rows());
      return (2.0 * residual.dot(adx) + adx.squaredNorm()) / (2.0 * n);
    }
    return value(x) - ref.value;
  }

 private:
  static Eigen::Index rows_of(const LeastSquares& o) { return o.A.rows(); }
  static Eigen::Index rows_of(const SquaredHingeSVM& o) { return o.features.rows(); }
  static Eigen::Index rows_of(const L1Regression& o) { return o.A.rows(); }

  static double value_of(const LeastSquares& o, const Vector& x) {
    return (o.A * x - o.b).squaredNorm() / (2.0 * static_cast<double>(o.A.rows()));
  }
  static double value_of(const SquaredHingeSVM& o, const Vector& x) {
    const Vector margins = (o.features * x).cwiseProduct(o.labels);
    const double loss = (1.0 - margins.array()).max(0.0).square().sum() / static_cast<double>(o.features.rows());
    return loss + 0.5 * o.reg * x.squaredNorm();
  }
  static double value_of(const L1Regression& o, const Vector& x) {
    return (o.A * x - o.b).lpNorm<1>() / static_cast<double>(o.A.rows());
  }

  static double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

  static Vector full_gradient_of(const LeastSquares& o, const Vector& x) {
    return o.A.transpose() * (o.A * x - o.b) / static_cast<double>(o.A.rows());
  }
  static Vector full_gradient_of(const SquaredHingeSVM& o, const Vector& x) {
    const Vector margins = (o.features * x).cwiseProduct(o.labels);
    const Vector weights = -2.0 * (1.0 - margins.array()).max(0.0).matrix().cwiseProduct(o.labels);
    return o.features.transpose() * weights / static_cast<double>(o.features.rows()) + o.reg * x;
  }
  static Vector full_gradient_of(const L1Regression& o, const Vector& x) {
    const Vector s = (o.A * x - o.b).unaryExpr([](double v) { return sign(v); });
    return o.A.transpose() * s / static_cast<double>(o.A.rows());
  }

  static Vector batch_gradient_of(const LeastSquares& o, const Vector& x, std::span<const std::size_t> rows) {
    Vector g = Vector::Zero(x.size());
    for (std::size_t r : rows) {
      const auto row = o.A.row(static_cast<Eigen::Index>(r));
      g += (row.dot(x) - o.b[static_cast<Eigen::Index>(r)]) * row.transpose();
    }
    return g / static_cast<double>(rows.size());
  }
  static Vector batch_gradient_of(const SquaredHingeSVM& o, const Vector& x, std::span<const std::size_t> rows) {
    Vector g = Vector::Zero(x.size());
    for (std::size_t r : rows) {
      const auto i = static_cast<Eigen::Index>(r);
      double dot = 0.0;
      for (SparseMatrix::InnerIterator it(o.features, i); it; ++it) dot += it.value() * x[it.col()];
      const double slack = 1.0 - o.labels[i] * dot;
      if (slack <= 0.0) continue;
      for (SparseMatrix::InnerIterator it(o.features, i); it; ++it) {
        g[it.col()] -= 2.0 * slack * o.labels[i] * it.value();
      }
    }
    return g / static_cast<double>(rows.size()) + o.reg * x;
  }
  static Vector batch_gradient_of(const L1Regression& o, const Vector& x, std::span<const std::size_t> rows) {
    Vector g = Vector::Zero(x.size());
    for (std::size_t r : rows) {
      const auto row = o.A.row(static_cast<Eigen::Index>(r));
      g += sign(row.dot(x) - o.b[static_cast<Eigen::Index>(r)]) * row.transpose();
    }
    return g / static_cast<double>(rows.size());
  }

  void validate() const {
    std::visit(
        [&](const auto& o) {
          using O = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<O, SquaredHingeSVM>) {
            require_same_dim(o.features.cols(), set_.dim(), "SVM features");
            require_same_dim(o.features.rows(), o.labels.size(), "SVM labels");
            if (o.reg < 0.0) throw ConfigError("regularization must be nonnegative");
            for (Eigen::Index i = 0; i < o.labels.size(); ++i) {
              if (o.labels[i] != 1.0 && o.labels[i] != -1.0) throw ConfigError("SVM labels must be +1/-1");
            }
          } else {
            require_same_dim(o.A.cols(), set_.dim(), "design matrix");
            require_same_dim(o.A.rows(), o.b.size(), "response vector");
          }
          if (rows_of(o) == 0) throw ConfigError("objective has no samples");
        },
        objective_);
  }

  static double top_eigenvalue(const Matrix& gram) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    return std::max(0.0, eig.eigenvalues().maxCoeff());
  }

  void compute_constants() {
    const double radius = set_.max_norm();
    std::visit(
        [&](const auto& o) {
          using O = std::decay_t<decltype(o)>;
          const double n = static_cast<double>(rows_of(o));
          if constexpr (std::is_same_v<O, SquaredHingeSVM>) {
            const Matrix dense = Matrix(o.features);
            const double top = top_eigenvalue(dense.transpose() * dense);
            smoothness_ = 2.0 * top / n + o.reg;
            const Vector row_norms = dense.rowwise().norm();
            max_row_norm_sq_ = row_norms.array().square().maxCoeff();
            // |1 - y a^T x| <= 1 + ||a|| R for every feasible x.
            const Eigen::ArrayXd per_row = 2.0 * (1.0 + row_norms.array() * radius) * row_norms.array();
            gradient_bound_ = per_row.mean() + o.reg * radius;
            sample_gradient_bound_ = per_row.maxCoeff() + o.reg * radius;
          } else {
            const Vector row_norms = o.A.rowwise().norm();
            max_row_norm_sq_ = row_norms.array().square().maxCoeff();
            const double spectral = std::sqrt(top_eigenvalue(o.A.transpose() * o.A));
            if constexpr (std::is_same_v<O, LeastSquares>) {
              smoothness_ = spectral * spectral / n;
              gradient_bound_ = spectral * (spectral * radius + o.b.norm()) / n;
              sample_gradient_bound_ =
                  (row_norms.array() * (row_norms.array() * radius + o.b.array().abs())).maxCoeff();
            } else {
              smoothness_.reset();
              gradient_bound_ = std::min(spectral * std::sqrt(n), row_norms.sum()) / n;
              sample_gradient_bound_ = row_norms.maxCoeff();
            }
          }
        },
        objective_);
    sample_gradient_bound_ = std::max(sample_gradient_bound_, gradient_bound_);
  }

  Objective objective_;
  FeasibleSet set_;
  std::optional<double> smoothness_;
  double gradient_bound_ = 0.0;
  double sample_gradient_bound_ = 0.0;
  double max_row_norm_sq_ = 0.0;
  std::optional<Reference> known_reference_;
};

// ---------------------------------------------------------------------------
// Stochastic oracles
// ---------------------------------------------------------------------------

inline Vector stochastic_gradient(const Problem& problem, const OracleMode& mode, const Vector& x, Rng& rng) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Deterministic>) {
          return problem.gradient(x);
        } else if constexpr (std::is_same_v<M, MiniBatch>) {
          const std::size_t n = problem.num_samples();
          if (m.batch_size == 0 || m.batch_size > n) {
            throw ConfigError("batch size must be in [1, " + std::to_string(n) + "]");
          }
          if (m.batch_size == n) return problem.gradient(x);
          const auto rows = rng.sample_without_replacement(n, m.batch_size);
          return problem.batch_gradient(x, rows);
        } else {
          if (m.sigma < 0.0) throw ConfigError("noise level must be nonnegative");
          Vector g = problem.gradient(x);
          if (m.sigma == 0.0) return g;
          const double scale = m.sigma / std::sqrt(static_cast<double>(x.size()));
          for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += scale * rng.normal();
          return g;
        }
      },
      mode);
}

/// Certified sigma with E ||grad f(x) - stochastic grad(x)||_2^2 <= sigma^2
/// for every feasible x.
///
/// Mini-batches without replacement have variance
///   (n - B) / (B (n - 1)) * (1/n) sum ||h_i(x) - grad f(x)||^2,
/// and the population term is at most max ||a_i||^2 * (1/n) sum c_i(x)^2 with
/// c_i the scalar loss derivative, bounded over the set.
inline double noise_bound(const Problem& problem, const OracleMode& mode) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Deterministic>) {
          return 0.0;
        } else if constexpr (std::is_same_v<M, AdditiveNoise>) {
          return m.sigma;
        } else {
          const double n = static_cast<double>(problem.num_samples());
          const double batch = static_cast<double>(m.batch_size);
          if (m.batch_size >= problem.num_samples()) return 0.0;
          const double finite_pop = (n - batch) / (batch * (n - 1.0));
          const double radius = problem.set().max_norm();
          const double mean_sq_derivative = std::visit(
              [&](const auto& o) -> double {
                using O = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<O, LeastSquares>) {
                  // (1/n) ||Ax - b||^2 <= (||A|| R + ||b||)^2 / n
                  const double spectral = std::sqrt(problem.smoothness().value() * n);
                  const double top = spectral * radius + o.b.norm();
                  return top * top / n;
                } else if constexpr (std::is_same_v<O, SquaredHingeSVM>) {
                  const double slack = 1.0 + std::sqrt(problem.max_row_norm_sq()) * radius;
                  return 4.0 * slack * slack;
                } else {
                  return 1.0;
                }
              },
              problem.objective());
          return std::sqrt(finite_pop * problem.max_row_norm_sq() * mean_sq_derivative);
        }
      },
      mode);
}

/// Monte Carlo estimate of sqrt(E ||grad f(x) - stochastic grad(x)||^2) at x.
inline double estimate_noise(const Problem& problem, const OracleMode& mode, const Vector& x, std::size_t samples,
                             Rng& rng) {
  if (samples == 0) throw ConfigError("estimate_noise needs at least one sample");
  const Vector exact = problem.gradient(x);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) acc += (stochastic_gradient(problem, mode, x, rng) - exact).squaredNorm();
  return std::sqrt(acc / static_cast<double>(samples));
}

/// Bound on ||stochastic gradient||_2 over the set for the given mode.
inline double oracle_gradient_bound(const Problem& problem, const OracleMode& mode) {
  if (std::holds_alternative<MiniBatch>(mode)) return problem.sample_gradient_bound();
  return problem.gradient_bound();
}

/// First-order oracle bound to a problem, a mode and a private rng stream.
class ProblemOracle {
 public:
  ProblemOracle(const Problem& problem, OracleMode mode, std::uint64_t seed)
      : problem_(&problem), mode_(mode), rng_(seed) {}

  Vector gradient(const Vector& x) {
    ++calls_;
    return stochastic_gradient(*problem_, mode_, x, rng_);
  }

  double value(const Vector& x) const { return problem_->value(x); }

  const Problem& problem() const noexcept { return *problem_; }
  std::size_t calls() const noexcept { return calls_; }

 private:
  const Problem* problem_;
  OracleMode mode_;
  Rng rng_;
  std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

namespace detail {

/// min 0.5 x^T H x - q^T x over ||x - c|| <= r by bisection on the multiplier:
/// x(mu) = (H + mu I)^{-1} (q + mu c), with ||x(mu) - c|| decreasing in mu.
inline Vector quadratic_over_ball(const Matrix& H, const Vector& q, const Vector& center, double radius) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const Matrix& Q = eig.eigenvectors();
  const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
  const Vector w = Q.transpose() * (q - H * center);  // x(mu) - c = Q (Lambda + mu)^{-1} w
  const double tiny = 1e-13 * std::max(1.0, lambda.maxCoeff());

  auto offset_norm = [&](double mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double denom = lambda[i] + mu;
      if (denom <= tiny) {
        if (std::abs(w[i]) > tiny) return std::numeric_limits<double>::infinity();
        continue;
      }
      acc += (w[i] / denom) * (w[i] / denom);
    }
    return std::sqrt(acc);
  };
  auto point = [&](double mu) {
    Vector coeff(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double denom = lambda[i] + mu;
      coeff[i] = denom <= tiny ? 0.0 : w[i] / denom;
    }
    return Vector(center + Q * coeff);
  };

  if (offset_norm(0.0) <= radius) return point(0.0);
  double lo = 0.0;
  double hi = w.norm() / radius;
  while (offset_norm(hi) > radius) hi *= 2.0;
  for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (offset_norm(mid) > radius ? lo : hi) = mid;
  }
  Vector x = point(hi);
  // Land exactly on the sphere.
  const Vector off = x - center;
  return center + off * (radius / off.norm());
}

/// Accelerated projected gradient with adaptive restart, run to a
/// gradient-mapping tolerance. Throws ReferenceFailure on stall.
inline Vector accelerated_projected_gradient(const Problem& problem, Vector x, std::size_t max_iter, double tol) {
  const double L = problem.smoothness().value();
  const double step = 1.0 / std::max(L, 1e-300);
  const FeasibleSet& set = problem.set();
  Vector y = x;
  double theta = 1.0;
  double f_prev = problem.value(x);
  for (std::size_t k = 0; k < max_iter; ++k) {
    const Vector next = euclidean_project(set, y - step * problem.gradient(y));
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double f_next = problem.value(next);
    const double move = (next - x).norm();
    if (f_next > f_prev && theta > 1.0) {
      // Restart momentum from the last accepted point.
      y = x;
      theta = 1.0;
      continue;
    }
    y = next + ((theta - 1.0) / theta_next) * (next - x);
    x = next;
    theta = theta_next;
    f_prev = f_next;
    if (move * L <= tol) return x;
  }
  throw ReferenceFailure("accelerated projected gradient did not converge");
}

/// Exact minimizer of (1/n)||Ax - b||_1 over ||x - c|| <= r, certified by KKT.
///
/// A Huber-smoothed problem, solved with decreasing smoothing, identifies the
/// zero-residual rows S and the signs s of the others. On that face the
/// objective is linear, so the candidate is the minimizer of a linear function
/// over {A_S x = b_S} intersected with the ball (closed form). The candidate is
/// accepted only if multipliers |u_i| <= 1 and mu >= 0 exist with
/// (1/n)(sum s_i a_i + A_S^T u) + mu (x - c) = 0 and the signs agree.
inline std::optional<Vector> certify_l1_face(const L1Regression& o, const L2Ball& ball, const Vector& approx,
                                             double threshold) {
  const Eigen::Index n = o.A.rows();
  const Eigen::Index d = o.A.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector residual = o.A * approx - o.b;
  std::vector<Eigen::Index> active;
  Vector slope = Vector::Zero(d);
  Vector signs = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(residual[i]) <= threshold) {
      active.push_back(i);
    } else {
      signs[i] = residual[i] > 0.0 ? 1.0 : -1.0;
      slope += signs[i] * inv_n * o.A.row(i).transpose();
    }
  }
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix AS(k, d);
  Vector bS(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    AS.row(j) = o.A.row(active[static_cast<std::size_t>(j)]);
    bS[j] = o.b[active[static_cast<std::size_t>(j)]] - AS.row(j).dot(ball.center);
  }

  // Work in coordinates shifted by the center: w = x - c.
  Vector w0 = Vector::Zero(d);
  Matrix null_basis = Matrix::Identity(d, d);
  if (k > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(AS);
    w0 = cod.solve(bS);
    if ((AS * w0 - bS).norm() > 1e-10 * (1.0 + bS.norm())) return std::nullopt;
    Eigen::JacobiSVD<Matrix> svd(AS, Eigen::ComputeFullV);
    const Eigen::Index rank = cod.rank();
    null_basis = svd.matrixV().rightCols(d - rank);
  }
  const double scale = 1.0 + slope.norm();
  const Vector tangent = null_basis.transpose() * slope;
  Vector w = w0;
  double mu = 0.0;
  if (tangent.norm() > 1e-12 * scale) {
    const double rho_sq = ball.radius * ball.radius - w0.squaredNorm();
    if (rho_sq < 0.0) return std::nullopt;
    w = w0 - std::sqrt(rho_sq) * (null_basis * tangent) / tangent.norm();
    const Vector w_tangent = null_basis.transpose() * w;
    if (w_tangent.squaredNorm() == 0.0) return std::nullopt;
    mu = -tangent.dot(w_tangent) / w_tangent.squaredNorm();
    if (mu < 0.0) return std::nullopt;
  } else if (w0.norm() > ball.radius * (1.0 + 1e-12)) {
    return std::nullopt;
  }
  const Vector x = ball.center + w;

  // Sign pattern must be unchanged at the candidate.
  const Vector r = o.A * x - o.b;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (signs[i] != 0.0 && r[i] * signs[i] <= 0.0) return std::nullopt;
  }
  if (k > 0) {
    const Vector rhs = -(slope + mu * w) / inv_n;
    const Matrix AST = AS.transpose();
    const Vector u = AST.completeOrthogonalDecomposition().solve(rhs);
    if ((AST * u - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return std::nullopt;
    if (u.lpNorm<Eigen::Infinity>() > 1.0 + 1e-9) return std::nullopt;
  } else if ((slope + mu * w).norm() > 1e-10 * scale) {
    return std::nullopt;
  }
  return x;
}

inline Vector l1_over_ball(const L1Regression& o, const L2Ball& ball) {
  const double n = static_cast<double>(o.A.rows());
  const double spectral_sq = Eigen::SelfAdjointEigenSolver<Matrix>(o.A.transpose() * o.A, Eigen::EigenvaluesOnly)
                                 .eigenvalues()
                                 .maxCoeff();
  const FeasibleSet set = FeasibleSet::ball(ball.center, ball.radius);
  Vector x = ball.center;
  for (double delta = 1e-1; delta >= 1e-10; delta *= 0.1) {
    // Huber: h(r) = r^2 / (2 delta) for |r| <= delta, |r| - delta / 2 otherwise.
    auto grad = [&](const Vector& p) {
      const Vector r = o.A * p - o.b;
      const Vector clipped = (r / delta).cwiseMax(-1.0).cwiseMin(1.0);
      return Vector(o.A.transpose() * clipped / n);
    };
    const double step = delta * n / std::max(spectral_sq, 1e-300);
    Vector y = x;
    double theta = 1.0;
    for (int it = 0; it < 20000; ++it) {
      const Vector next = euclidean_project(set, y - step * grad(y));
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const Vector momentum = next - x;
      // Gradient-based restart.
      if ((y - next).dot(momentum) > 0.0) {
        theta = 1.0;
        y = next;
      } else {
        y = next + ((theta - 1.0) / theta_next) * momentum;
        theta = theta_next;
      }
      x = next;
      if (momentum.norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    for (double factor : {1.0, 10.0, 100.0}) {
      if (auto exact = certify_l1_face(o, ball, x, factor * delta)) return *exact;
    }
  }
  throw ReferenceFailure("could not certify an L1-regression minimizer");
}

/// Zooming grid search for dimension <= 3.
inline Vector grid_minimize(const Problem& problem) {
  const Eigen::Index d = problem.dim();
  const FeasibleSet& set = problem.set();
  Vector lo(d);
  Vector hi(d);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, L2Ball>) {
          lo = s.center.array() - s.radius;
          hi = s.center.array() + s.radius;
        } else if constexpr (std::is_same_v<S, Box>) {
          lo = s.lower;
          hi = s.upper;
        } else {
          lo.setConstant(s.floor);
          hi.setConstant(1.0);
        }
      },
      set.variant());

  constexpr int kPoints = 41;
  Vector best = euclidean_project(set, 0.5 * (lo + hi));
  double best_value = problem.value(best);
  Vector width = hi - lo;
  for (int level = 0; level < 60 && width.maxCoeff() > 1e-15; ++level) {
    const Vector origin = lo;
    const Vector pitch = width / static_cast<double>(kPoints - 1);
    Eigen::Index total = 1;
    for (Eigen::Index i = 0; i < d; ++i) total *= kPoints;
    for (Eigen::Index flat = 0; flat < total; ++flat) {
      Vector p(d);
      Eigen::Index rest = flat;
      for (Eigen::Index i = 0; i < d; ++i) {
        p[i] = origin[i] + pitch[i] * static_cast<double>(rest % kPoints);
        rest /= kPoints;
      }
      p = euclidean_project(set, p);
      const double v = problem.value(p);
      if (v < best_value) {
        best_value = v;
        best = p;
      }
    }
    width = pitch * 8.0;
    lo = best - 0.5 * width;
  }
  return best;
}

}  // namespace detail

/// High-accuracy minimizer of the problem over its set.
///
/// Least squares on a ball: multiplier bisection. Smooth problems otherwise:
/// restarted accelerated projected gradient. L1 regression on a ball:
/// KKT-certified face solution. Dimension <= 3: zooming grid search.
/// Planted references are returned as is.
inline Reference solve_reference(const Problem& problem) {
  if (problem.known_reference()) return *problem.known_reference();
  const FeasibleSet& set = problem.set();
  if (const auto* ls = std::get_if<LeastSquares>(&problem.objective())) {
    if (const auto* ball = set.get_if<L2Ball>()) {
      const double n = static_cast<double>(ls->A.rows());
      const Matrix H = ls->A.transpose() * ls->A / n;
      const Vector q = ls->A.transpose() * ls->b / n;
      Vector x = detail::quadratic_over_ball(H, q, ball->center, ball->radius);
      return Reference{x, problem.value(x)};
    }
  }
  if (problem.is_smooth()) {
    const Vector start = euclidean_project(set, Vector::Zero(problem.dim()));
    Vector x = detail::accelerated_projected_gradient(problem, start, 2'000'000, 1e-13);
    return Reference{x, problem.value(x)};
  }
  if (const auto* l1 = std::get_if<L1Regression>(&problem.objective())) {
    if (const auto* ball = set.get_if<L2Ball>()) {
      Vector x = detail::l1_over_ball(*l1, *ball);
      return Reference{x, problem.value(x)};
    }
  }
  if (problem.dim() <= 3) {
    Vector x = detail::grid_minimize(problem);
    return Reference{x, problem.value(x)};
  }
  throw ReferenceFailure("no reference solver for a nonsmooth problem in dimension > 3");
}

}  // namespace unixgrad

#endif  // UNIXGRAD_ORACLES_HPP
