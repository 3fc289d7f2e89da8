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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "unixgrad/geometry.hpp"

using namespace unixgrad;
using testutil::random_point;

namespace {

const Geometry kEuclid = Geometry::Euclidean;
const Geometry kEntropy = Geometry::NegativeEntropy;

double kl(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) s += x[i] * std::log(x[i] / y[i]);
  }
  return s;
}

}  // namespace

TEST(FeasibleSet, RejectsInvalidParameters) {
  EXPECT_THROW(FeasibleSet::ball(2, 0.0), ConfigError);
  EXPECT_THROW(FeasibleSet::ball(2, -1.0), ConfigError);
  EXPECT_THROW(FeasibleSet::box(Vector{{1.0}}, Vector{{0.0}}), ConfigError);
  EXPECT_THROW(FeasibleSet::box(Vector{{0.0, 0.0}}, Vector{{1.0}}), DimensionMismatch);
  EXPECT_THROW(FeasibleSet::simplex(4, 0.25), ConfigError);
  EXPECT_THROW(FeasibleSet::simplex(4, -0.1), ConfigError);
  EXPECT_NO_THROW(FeasibleSet::simplex(4, 0.2));
}

TEST(FeasibleSet, MembershipUsesAbsoluteTolerance) {
  const auto s = FeasibleSet::simplex(3, 0.1);
  EXPECT_TRUE(s.contains(Vector{{0.1, 0.3, 0.6}}));
  EXPECT_TRUE(s.contains(Vector{{0.1 - 5e-10, 0.3, 0.6 + 5e-10}}));
  EXPECT_FALSE(s.contains(Vector{{0.1 - 1e-8, 0.3, 0.6 + 1e-8}}));
  EXPECT_FALSE(s.contains(Vector{{0.2, 0.3, 0.6}}));
  const auto b = FeasibleSet::ball(Vector{{1.0, 1.0}}, 1.0);
  EXPECT_TRUE(b.contains(Vector{{2.0, 1.0}}));
  EXPECT_FALSE(b.contains(Vector{{2.0 + 1e-8, 1.0}}));
}

TEST(BregmanDivergence, EuclideanSamePointIsZero) {
  EXPECT_EQ(bregman_divergence(kEuclid, Vector{{3.0, 4.0}}, Vector{{3.0, 4.0}}), 0.0);
}

TEST(BregmanDivergence, EuclideanIsHalfSquaredDistance) {
  EXPECT_DOUBLE_EQ(bregman_divergence(kEuclid, Vector{{1.0, 0.0}}, Vector{{0.0, 0.0}}), 0.5);
}

TEST(BregmanDivergence, EntropyIsKullbackLeibler) {
  const Vector x{{0.5, 0.5}}, y{{0.25, 0.75}};
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(bregman_divergence(kEntropy, x, y), expected, 1e-15);
  EXPECT_NEAR(expected, 0.14384, 1e-5);
  EXPECT_NEAR(bregman_divergence(kEntropy, x, y), kl(x, y), 1e-15);
}

TEST(BregmanDivergence, EntropyRejectsZeroAnchor) {
  EXPECT_THROW(bregman_divergence(kEntropy, Vector{{0.5, 0.5}}, Vector{{1.0, 0.0}}), DomainError);
  EXPECT_THROW(bregman_divergence(kEntropy, Vector{{-0.1, 1.1}}, Vector{{0.5, 0.5}}), DomainError);
  EXPECT_NO_THROW(bregman_divergence(kEntropy, Vector{{0.0, 1.0}}, Vector{{0.5, 0.5}}));
}

TEST(BregmanDivergence, MatchesDefinitionFromDistanceGeneratingFunction) {
  std::mt19937_64 g(7);
  const auto s = FeasibleSet::simplex(5, 1e-3);
  for (int k = 0; k < 200; ++k) {
    const Vector x = random_point(g, s), y = random_point(g, s);
    for (Geometry geo : {kEuclid, kEntropy}) {
      const double def = distance_generating(geo, x) - distance_generating(geo, y) - mirror_map(geo, y).dot(x - y);
      EXPECT_NEAR(bregman_divergence(geo, x, y), def, 1e-12);
    }
  }
}

TEST(BregmanDivergence, StrongConvexityWitness) {
  std::mt19937_64 g(11);
  const auto ball = FeasibleSet::ball(6, 3.0);
  const auto simplex = FeasibleSet::simplex(6, 0.0);
  for (int k = 0; k < 10000; ++k) {
    const Vector a = random_point(g, ball), b = random_point(g, ball);
    const double de = bregman_divergence(kEuclid, a, b);
    EXPECT_GE(de, 0.5 * (a - b).squaredNorm() - 1e-12);
    const Vector x = random_point(g, simplex), y = random_point(g, simplex);
    const double dk = bregman_divergence(kEntropy, x, y);
    EXPECT_GE(dk, 0.5 * std::pow((x - y).lpNorm<1>(), 2) - 1e-12);
    EXPECT_EQ(bregman_divergence(kEntropy, x, x), 0.0);
  }
}

TEST(EuclideanProject, BallInteriorUnchanged) {
  const Vector p = euclidean_project(FeasibleSet::ball(2, 1.0), Vector{{0.3, 0.4}});
  EXPECT_EQ(p, (Vector{{0.3, 0.4}}));
}

TEST(EuclideanProject, BallExteriorScaledRadially) {
  const Vector p = euclidean_project(FeasibleSet::ball(2, 1.0), Vector{{3.0, 4.0}});
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(EuclideanProject, BoxClampsCoordinates) {
  const Vector p = euclidean_project(FeasibleSet::box(Vector::Zero(2), Vector::Ones(2)), Vector{{-2.0, 0.5}});
  EXPECT_EQ(p, (Vector{{0.0, 0.5}}));
}

TEST(EuclideanProject, SimplexAgreesWithDirectMinimization) {
  std::mt19937_64 g(3);
  const auto s = FeasibleSet::simplex(3, 0.05);
  for (int k = 0; k < 20; ++k) {
    const Vector p = testutil::gaussian(g, 3);
    const Vector proj = euclidean_project(s, p);
    ASSERT_TRUE(s.contains(proj));
    const double grid = testutil::grid_min(s, [&](const Vector& z) { return (z - p).squaredNorm(); }, 1e-3);
    EXPECT_LE((proj - p).squaredNorm(), grid + 1e-12);
    EXPECT_GE((proj - p).squaredNorm(), grid - 4e-3);
  }
}

TEST(EuclideanProject, IdempotentAndNonExpansive) {
  std::mt19937_64 g(5);
  const std::vector<FeasibleSet> sets{FeasibleSet::ball(Vector{{1.0, -2.0, 0.5, 0.0}}, 1.5),
                                      FeasibleSet::box(Vector{{-1.0, 0.0, 0.0, 2.0}}, Vector{{1.0, 0.0, 3.0, 2.5}}),
                                      FeasibleSet::simplex(4, 0.01), FeasibleSet::simplex(4, 0.0)};
  for (const auto& s : sets) {
    for (int k = 0; k < 1000; ++k) {
      const Vector p = testutil::gaussian(g, 4, 3.0), q = testutil::gaussian(g, 4, 3.0);
      const Vector pp = euclidean_project(s, p), pq = euclidean_project(s, q);
      EXPECT_TRUE(s.contains(pp));
      EXPECT_LE((euclidean_project(s, pp) - pp).norm(), 1e-12);
      EXPECT_LE((pp - pq).norm(), (p - q).norm() + 1e-12);
    }
  }
}

TEST(ProxStep, EuclideanBallExample) {
  const Vector x = prox_step(kEuclid, FeasibleSet::ball(2, 0.5), Vector::Zero(2), Vector{{1.0, 0.0}}, 1.0);
  EXPECT_NEAR(x[0], -0.5, 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
}

TEST(ProxStep, ZeroDirectionReturnsAnchor) {
  const Vector y{{0.2, 0.3, 0.5}};
  EXPECT_EQ(prox_step(kEuclid, FeasibleSet::ball(3, 1.0), y, Vector::Zero(3), 2.0), y);
  EXPECT_EQ(prox_step(kEuclid, FeasibleSet::box(Vector::Zero(3), Vector::Ones(3)), y, Vector::Zero(3), 2.0), y);
  EXPECT_LE((prox_step(kEntropy, FeasibleSet::simplex(3, 0.0), y, Vector::Zero(3), 2.0) - y).norm(), 1e-15);
  EXPECT_LE((prox_step(kEntropy, FeasibleSet::simplex(3, 0.1), y, Vector::Zero(3), 2.0) - y).norm(), 1e-15);
}

TEST(ProxStep, EntropyMultiplicativeUpdate) {
  const Vector x =
      prox_step(kEntropy, FeasibleSet::simplex(2, 0.0), Vector{{0.5, 0.5}}, Vector{{std::log(2.0), 0.0}}, 1.0);
  EXPECT_NEAR(x[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0 / 3.0, 1e-15);
}

TEST(ProxStep, EntropyRespectsFloor) {
  const auto s = FeasibleSet::simplex(3, 0.05);
  const Vector x = prox_step(kEntropy, s, Vector{{0.3, 0.3, 0.4}}, Vector{{50.0, 0.0, 0.0}}, 1.0);
  EXPECT_TRUE(s.contains(x));
  EXPECT_DOUBLE_EQ(x[0], 0.05);
}

TEST(ProxStep, UnsupportedPairsAndBadInputs) {
  const Vector y{{0.5, 0.5}};
  EXPECT_THROW(prox_step(kEntropy, FeasibleSet::ball(2, 1.0), y, y, 1.0), UnsupportedCombination);
  EXPECT_THROW(prox_step(kEntropy, FeasibleSet::box(Vector::Zero(2), Vector::Ones(2)), y, y, 1.0),
               UnsupportedCombination);
  const Vector nan_v{{std::nan(""), 0.0}};
  EXPECT_THROW(prox_step(kEuclid, FeasibleSet::ball(2, 1.0), y, nan_v, 1.0), NumericError);
  const Vector inf_v{{INFINITY, 0.0}};
  EXPECT_THROW(prox_step(kEntropy, FeasibleSet::simplex(2), y, inf_v, 1.0), NumericError);
  EXPECT_THROW(prox_step(kEuclid, FeasibleSet::ball(2, 1.0), y, y, 0.0), ConfigError);
}

TEST(ProxStep, EuclideanSimplexIsProjection) {
  const auto s = FeasibleSet::simplex(3, 0.0);
  const Vector y{{0.2, 0.3, 0.5}}, v{{1.0, -1.0, 0.0}};
  EXPECT_LE((prox_step(kEuclid, s, y, v, 0.7) - euclidean_project(s, y - 0.7 * v)).norm(), 1e-15);
}

namespace {

/// <v + (1/eta)(grad R(x) - grad R(y)), z - x> for z in the set.
double vi_residual(Geometry geo, const Vector& x, const Vector& y, const Vector& v, double eta, const Vector& z) {
  return (v + (mirror_map(geo, x) - mirror_map(geo, y)) / eta).dot(z - x);
}

}  // namespace

TEST(ProxStep, VariationalInequalityOnRandomInstances) {
  std::mt19937_64 g(17);
  int instances = 0;
  for (int k = 0; k < 500; ++k) {
    const int kind = k % 4;
    const Eigen::Index d = 2 + k % 5;
    FeasibleSet set = kind == 0   ? FeasibleSet::ball(testutil::gaussian(g, d), 0.5 + testutil::uniform(g))
                      : kind == 1 ? FeasibleSet::box(-Vector::Ones(d), Vector::Ones(d) * 2.0)
                                  : FeasibleSet::simplex(d, kind == 2 ? 0.0 : 0.01);
    const Geometry geo = kind == 3 ? kEntropy : kEuclid;
    Vector y = random_point(g, set);
    if (geo == kEntropy) y = 0.9 * y + Vector::Constant(d, 0.1 / static_cast<double>(d));
    const Vector v = testutil::gaussian(g, d, 3.0);
    const double eta = 0.05 + testutil::uniform(g, 0.0, 2.0);
    const Vector x = prox_step(geo, set, y, v, eta);
    ASSERT_TRUE(set.contains(x));
    for (int j = 0; j < 100; ++j) {
      const Vector z = random_point(g, set);
      EXPECT_GE(vi_residual(geo, x, y, v, eta, z), -1e-6);
    }
    ++instances;
  }
  EXPECT_EQ(instances, 500);
}

TEST(ProxStep, MatchesGridSearchInLowDimension) {
  std::mt19937_64 g(23);
  struct Case {
    FeasibleSet set;
    Geometry geo;
  };
  const std::vector<Case> cases{
      {FeasibleSet::ball(Vector{{0.2, -0.1}}, 0.8), kEuclid},
      {FeasibleSet::box(Vector{{-1.0, 0.0}}, Vector{{0.5, 1.0}}), kEuclid},
      {FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}}), kEuclid},
      {FeasibleSet::simplex(3, 0.0), kEuclid},
      {FeasibleSet::simplex(3, 0.02), kEntropy},
      {FeasibleSet::simplex(2, 0.0), kEntropy},
  };
  for (const auto& c : cases) {
    for (int k = 0; k < 4; ++k) {
      const Eigen::Index d = c.set.dim();
      Vector y = random_point(g, c.set);
      if (c.geo == kEntropy) y = 0.9 * y + Vector::Constant(d, 0.1 / static_cast<double>(d));
      const Vector v = testutil::gaussian(g, d, 2.0);
      const double eta = 0.1 + testutil::uniform(g);
      auto objective = [&](const Vector& z) { return v.dot(z) + bregman_divergence(c.geo, z, y) / eta; };
      const Vector x = prox_step(c.geo, c.set, y, v, eta);
      const double grid = testutil::grid_min(c.set, objective, 1e-3);
      EXPECT_LE(objective(x), grid + 1e-12);
      EXPECT_NEAR(objective(x), grid, 2e-3);
    }
  }
}

TEST(Diameter, EuclideanUnitBall) {
  const Diameter d = diameter(kEuclid, FeasibleSet::ball(3, 1.0));
  EXPECT_DOUBLE_EQ(d.squared, 2.0);
  EXPECT_DOUBLE_EQ(d.value, std::sqrt(2.0));
}

TEST(Diameter, SingletonBoxIsZero) {
  EXPECT_EQ(diameter(kEuclid, FeasibleSet::box(Vector::Zero(2), Vector::Zero(2))).value, 0.0);
}

TEST(Diameter, UnitHypercube) {
  const Diameter d = diameter(kEuclid, FeasibleSet::box(Vector::Zero(4), Vector::Ones(4)));
  EXPECT_DOUBLE_EQ(d.squared, 2.0);
  EXPECT_DOUBLE_EQ(d.value, std::sqrt(2.0));
}

TEST(Diameter, FlooredSimplexEntropy) {
  const Diameter d = diameter(kEntropy, FeasibleSet::simplex(10, 1e-6));
  EXPECT_NEAR(d.squared, std::log(1e6), 1e-12);
}

TEST(Diameter, EntropyBoundsKlOnFlooredSimplex) {
  std::mt19937_64 g(29);
  const auto s = FeasibleSet::simplex(5, 1e-3);
  const double bound = diameter(kEntropy, s).squared;
  for (int k = 0; k < 1000; ++k) {
    EXPECT_LE(bregman_divergence(kEntropy, random_point(g, s), random_point(g, s)), bound);
  }
  // Vertex against floor point approaches but stays below the bound.
  Vector vert = Vector::Constant(5, 1e-3);
  vert[0] = 1.0 - 4e-3;
  Vector other = Vector::Constant(5, 1e-3);
  other[1] = 1.0 - 4e-3;
  EXPECT_LE(bregman_divergence(kEntropy, vert, other), bound);
}

TEST(Diameter, UnflooredSimplexNeedsOverride) {
  EXPECT_THROW(diameter(kEntropy, FeasibleSet::simplex(3, 0.0)), ConfigError);
  EXPECT_DOUBLE_EQ(diameter(kEntropy, FeasibleSet::simplex(3, 0.0), 2.5).value, 2.5);
  EXPECT_THROW(diameter(kEntropy, FeasibleSet::ball(3, 1.0)), UnsupportedCombination);
  EXPECT_THROW(diameter(kEuclid, FeasibleSet::ball(3, 1.0), -1.0), ConfigError);
}

TEST(Diameter, EuclideanSupremumMatchesSampling) {
  std::mt19937_64 g(31);
  const auto box = FeasibleSet::box(Vector{{0.0, -1.0, 2.0}}, Vector{{1.0, 1.0, 2.5}});
  const double bound = diameter(kEuclid, box).squared;
  const Vector a{{0.0, -1.0, 2.0}}, b{{1.0, 1.0, 2.5}};
  EXPECT_NEAR(bregman_divergence(kEuclid, a, b), bound, 1e-15);
  for (int k = 0; k < 1000; ++k) EXPECT_LE(bregman_divergence(kEuclid, random_point(g, box), random_point(g, box)), bound);
}
