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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All thresholds are fixed below.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "test_util.hpp"
#include "unixgrad.hpp"

using namespace unixgrad;
namespace fs = std::filesystem;
using Idx = Eigen::Index;

namespace {

// Criterion 1
constexpr int kLemma1Problems = 20;
constexpr int kLemma1Refs = 50;
constexpr std::size_t kLemma1Horizon = 64;
constexpr double kLemma1Slack = 1e-9;
constexpr double kLemma1Seconds = 10.0;
// Criteria 2 and 3
constexpr std::size_t kSmoothHorizon = 4096;
constexpr std::size_t kSmoothFirstCheckpoint = 8;
constexpr double kSmoothSeconds = 60.0;
constexpr double kSlopeLo = 128.0;
constexpr double kSlopeHi = 4096.0;
constexpr double kSmoothMaxSlope = -1.5;
// Criterion 4
constexpr std::size_t kL1Horizon = 4096;
constexpr double kL1SlopeMin = -1.1;
constexpr double kL1SlopeMax = -0.35;
// Criterion 5
constexpr std::size_t kStochSeeds = 20;
constexpr std::size_t kStochBatch = 5;
constexpr std::size_t kStochHorizon = 4096;
constexpr double kStochSeconds = 300.0;
// Criterion 6
constexpr int kLemma2Sequences = 1000;
constexpr double kLemma2RelTol = 1e-12;
// Criterion 7
constexpr double kFeasTol = 1e-9;
constexpr double kAverageRelTol = 1e-12;
// Criterion 8
constexpr int kProxInstances = 500;
constexpr double kViTol = 1e-6;
constexpr double kGridPitch = 1e-3;
constexpr double kGridTol = 2e-3;
// Criterion 9
constexpr double kUnbiasedRelTol = 1e-10;
constexpr double kFiniteDiffRelTol = 1e-5;
constexpr int kWitnessPoints = 10000;
// Criterion 10
constexpr double kAccuracyGap = 0.02;
constexpr double kSvmSeconds = 120.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Checks shared by every acceptance run: step monotonicity, feasibility and
/// the running average.
struct InvariantLog {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void record(const RunTrace& tr, const FeasibleSet& set, const std::string& what) {
    ++runs;
    auto fail = [&](const std::string& why) {
      if (failures++ == 0) first_failure = what + ": " + why;
    };
    if (!tr.valid) return fail("run aborted: " + tr.error);
    double prev = std::numeric_limits<double>::infinity();
    Vector num = Vector::Zero(set.dim());
    long double den = 0.0L;
    for (const auto& r : tr.records) {
      if (!(r.eta <= prev)) return fail(fmt("eta increased at t=%zu", r.t));
      prev = r.eta;
      for (const Vector* v : {&r.x, &r.y, &r.x_bar, &r.z_tilde}) {
        if (!set.contains(*v, kFeasTol)) return fail(fmt("infeasible iterate at t=%zu", r.t));
      }
      num += r.alpha * r.x;
      den += r.alpha;
    }
    const Vector recomputed = num / static_cast<double>(den);
    const double rel = (tr.x_bar - recomputed).norm() / std::max(tr.x_bar.norm(), 1e-300);
    if (rel > kAverageRelTol) fail(fmt("average mismatch %.3g", rel));
  }
};

InvariantLog g_invariants;

// ---------------------------------------------------------------------------

Verdict criterion_regret_gap() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(101);
  std::size_t checks = 0, passed = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kLemma1Problems; ++k) {
    const Idx d = 2 + static_cast<Idx>(g() % 19);
    const Idx n = d + 5 + static_cast<Idx>(g() % 40);
    const double radius = testutil::uniform(g, 0.2, 2.0);
    const Problem p(LeastSquares{testutil::gaussian(g, n, d), testutil::gaussian(g, n, 1.0)}, FeasibleSet::ball(d, radius));
    SolverConfig cfg{.set = p.set()};
    cfg.horizon = kLemma1Horizon;
    const RunTrace tr = run(p, cfg);
    g_invariants.record(tr, p.set(), "regret-gap problem");
    const double T = static_cast<double>(kLemma1Horizon);
    for (int j = 0; j < kLemma1Refs; ++j) {
      const Vector ref = testutil::random_point(g, p.set());
      const double lhs = p.value(tr.x_bar) - p.value(ref);
      const double rhs = 2.0 * weighted_regret(tr, ref) / (T * T);
      ++checks;
      if (lhs <= rhs + kLemma1Slack) ++passed;
      worst = std::min(worst, rhs - lhs);
    }
  }
  const double secs = seconds_since(t0);
  return {passed == checks && secs < kLemma1Seconds,
          fmt("%zu/%zu inequalities hold, min margin %.3g, %.2f s (limit %.0f s)", passed, checks, worst, secs,
              kLemma1Seconds)};
}

struct SmoothRun {
  Problem problem;
  Reference ref;
  RunTrace trace;
  double seconds;
};

const SmoothRun& smooth_run() {
  static const SmoothRun run_data = [] {
    const auto t0 = std::chrono::steady_clock::now();
    LsGeneratorOptions opt;
    opt.placement = Placement::Boundary;
    opt.seed = 1;
    auto [data, problem] = generate_ls(opt);
    const Reference ref = solve_reference(problem);
    SolverConfig cfg{.set = problem.set()};
    cfg.horizon = kSmoothHorizon;
    RunTrace tr = run(problem, cfg);
    return SmoothRun{std::move(problem), ref, std::move(tr), seconds_since(t0)};
  }();
  return run_data;
}

std::vector<std::size_t> schedule_from(std::size_t first, std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t t : checkpoint_schedule(horizon)) {
    if (t >= first) out.push_back(t);
  }
  return out;
}

Verdict criterion_smooth_bound() {
  const SmoothRun& s = smooth_run();
  g_invariants.record(s.trace, s.problem.set(), "smooth deterministic");
  const auto cps = schedule_from(kSmoothFirstCheckpoint, kSmoothHorizon);
  const RateReport r = check_theorem_bound(s.trace, s.problem, s.ref, Theorem::SmoothDet, cps);
  const bool on_boundary = std::abs(s.ref.x.norm() - 1.0) < 1e-12;
  return {r.holds() && on_boundary && s.seconds < kSmoothSeconds,
          fmt("%zu violations over %zu checkpoints (8..4096), min margin %.3g, x* on boundary: %s, %.1f s (limit %.0f s)",
              r.violations(), r.t.size(), r.min_margin(), on_boundary ? "yes" : "no", s.seconds, kSmoothSeconds)};
}

Verdict criterion_smooth_slope() {
  const SmoothRun& s = smooth_run();
  const auto curve = suboptimality_curve(s.trace, s.problem, s.ref, checkpoint_schedule(kSmoothHorizon));
  const double slope = rate_fit(curve, kSlopeLo, kSlopeHi);
  return {slope <= kSmoothMaxSlope, fmt("slope %.3f over [128, 4096] (required <= %.1f)", slope, kSmoothMaxSlope)};
}

Verdict criterion_nonsmooth() {
  L1GeneratorOptions opt;
  opt.n = 200;
  opt.d = 50;
  opt.planted_norm = 3.0;
  opt.noise = 0.1;
  opt.seed = 1;
  const auto [x_nat, p] = generate_l1(opt);
  const Reference ref = solve_reference(p);
  SolverConfig cfg{.set = p.set()};
  cfg.horizon = kL1Horizon;
  const RunTrace tr = run(p, cfg);
  g_invariants.record(tr, p.set(), "l1 deterministic");
  const auto cps = checkpoint_schedule(kL1Horizon);
  const RateReport r = check_theorem_bound(tr, p, ref, Theorem::NonsmoothDet, cps);
  const auto curve = suboptimality_curve(tr, p, ref, cps);
  const double slope = rate_fit(curve, kSlopeLo, kSlopeHi);
  const bool slope_ok = slope >= kL1SlopeMin && slope <= kL1SlopeMax;
  return {r.holds() && slope_ok,
          fmt("%zu violations over %zu checkpoints, min margin %.3g, slope %.3f over [128, 4096] (required in [%.2f, %.2f])",
              r.violations(), r.t.size(), r.min_margin(), slope, kL1SlopeMin, kL1SlopeMax)};
}

Verdict criterion_stochastic() {
  const auto t0 = std::chrono::steady_clock::now();
  LsGeneratorOptions opt;
  opt.seed = 1;
  const auto [data, p] = generate_ls(opt);
  const Reference ref = solve_reference(p);
  const OracleMode mode = MiniBatch{kStochBatch};
  const auto cps = checkpoint_schedule(kStochHorizon);
  std::vector<long double> sum(cps.size(), 0.0L);
  Diameter diam;
  for (std::size_t seed = 1; seed <= kStochSeeds; ++seed) {
    SolverConfig cfg{.set = p.set()};
    cfg.horizon = kStochHorizon;
    cfg.mode = mode;
    cfg.seed = seed;
    const RunTrace tr = run(p, cfg);
    g_invariants.record(tr, p.set(), fmt("minibatch seed %zu", seed));
    diam = tr.diameter;
    const auto curve = suboptimality_curve(tr, p, ref, cps);
    for (std::size_t i = 0; i < cps.size(); ++i) sum[i] += curve[i].value;
  }
  std::vector<CurvePoint> mean;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    mean.push_back({static_cast<double>(cps[i]), static_cast<double>(sum[i] / static_cast<long double>(kStochSeeds))});
  }
  const BoundConstants bc = bound_constants(p, mode, diam);
  const RateReport r = check_theorem_bound(mean, Theorem::SmoothStoch, bc);
  const double secs = seconds_since(t0);
  return {r.holds() && secs < kStochSeconds,
          fmt("mean of %zu seeds: %zu violations over %zu checkpoints, min margin %.3g, certified sigma %.4g, %.1f s (limit %.0f s)",
              kStochSeeds, r.violations(), r.t.size(), r.min_margin(), *bc.noise, secs, kStochSeconds)};
}

Verdict criterion_step_sums() {
  std::mt19937_64 g(606);
  std::size_t total = 0, passed = 0;
  auto check = [&](const std::vector<double>& a) {
    ++total;
    if (lemma2_check(a, kLemma2RelTol).pass) ++passed;
  };
  for (int k = 0; k < kLemma2Sequences; ++k) {
    std::vector<double> a(1 + g() % 100);
    for (double& v : a) v = testutil::uniform(g, 0.0, 10.0);
    check(a);
  }
  check(std::vector<double>(100, 0.0));
  check({0.0, 0.0});
  check({1.0});
  for (std::size_t pos : {0u, 1u, 50u, 99u}) {
    std::vector<double> spike(100, 0.0);
    spike[pos] = 1e8;
    check(spike);
  }
  for (double ratio : {1.01, 1.5, 2.0, 10.0}) {
    std::vector<double> geo;
    for (int t = 1; t <= 60; ++t) geo.push_back(static_cast<double>(t) * t * std::pow(ratio, t));
    check(geo);
  }
  std::vector<double> tiny(50, 1e-300), decay;
  for (int t = 1; t <= 100; ++t) decay.push_back(std::pow(0.5, t));
  check(tiny);
  check(decay);
  return {passed == total, fmt("%zu/%zu sequences satisfy both inequalities (relative tolerance %.0e)", passed, total,
                               kLemma2RelTol)};
}

Verdict criterion_invariants() {
  // Extra runs over the remaining set and geometry combinations.
  std::mt19937_64 g(707);
  for (int k = 0; k < 12; ++k) {
    const Idx d = 3 + k % 5;
    const Matrix A = testutil::gaussian(g, Idx{40}, d);
    const Vector b = testutil::gaussian(g, Idx{40}, 1.0);
    FeasibleSet set = k % 3 == 0   ? FeasibleSet::box(Vector::Constant(d, -0.3), Vector::Constant(d, 0.6))
                      : k % 3 == 1 ? FeasibleSet::simplex(d, 1e-3)
                                   : FeasibleSet::ball(testutil::gaussian(g, d, 0.1), 0.7);
    const Problem p(k % 2 == 0 ? Objective{LeastSquares{A, b}} : Objective{L1Regression{A, b}}, set);
    SolverConfig cfg{.set = p.set()};
    cfg.horizon = 300;
    cfg.geometry = k % 3 == 1 && k % 4 != 1 ? Geometry::NegativeEntropy : Geometry::Euclidean;
    cfg.variant = k % 4 == 3 ? Variant::MirrorProx : Variant::UniXGrad;
    cfg.mode = k % 2 == 0 ? OracleMode{MiniBatch{4}} : OracleMode{Deterministic{}};
    cfg.seed = static_cast<std::uint64_t>(k);
    g_invariants.record(run(p, cfg), p.set(), fmt("invariant run %d", k));
  }
  return {g_invariants.failures == 0,
          fmt("%zu runs checked, %zu failing%s%s", g_invariants.runs, g_invariants.failures,
              g_invariants.failures ? ": " : "", g_invariants.first_failure.c_str())};
}

Verdict criterion_prox() {
  std::mt19937_64 g(808);
  std::size_t vi_fail = 0;
  double worst = 0.0;
  for (int k = 0; k < kProxInstances; ++k) {
    const int kind = k % 4;
    const Idx d = 2 + k % 6;
    const FeasibleSet set = kind == 0   ? FeasibleSet::ball(testutil::gaussian(g, d, 1.0), testutil::uniform(g, 0.3, 2.0))
                            : kind == 1 ? FeasibleSet::box(-Vector::Ones(d), 2.0 * Vector::Ones(d))
                                        : FeasibleSet::simplex(d, kind == 2 ? 0.0 : 0.01);
    const Geometry geo = kind == 3 ? Geometry::NegativeEntropy : Geometry::Euclidean;
    Vector y = testutil::random_point(g, set);
    if (geo == Geometry::NegativeEntropy) y = 0.9 * y + Vector::Constant(d, 0.1 / static_cast<double>(d));
    const Vector v = testutil::gaussian(g, d, 3.0);
    const double eta = testutil::uniform(g, 0.05, 2.0);
    const Vector x = prox_step(geo, set, y, v, eta);
    const Vector field = v + (mirror_map(geo, x) - mirror_map(geo, y)) / eta;
    double residual = set.contains(x, kFeasTol) ? 0.0 : std::numeric_limits<double>::infinity();
    for (int j = 0; j < 200; ++j) residual = std::max(residual, -field.dot(testutil::random_point(g, set) - x));
    worst = std::max(worst, residual);
    if (residual > kViTol) ++vi_fail;
  }
  std::size_t grid_fail = 0, grid_cases = 0;
  double grid_worst = 0.0;
  const std::vector<std::pair<FeasibleSet, Geometry>> cases = {
      {FeasibleSet::ball(Vector{{0.2, -0.1}}, 0.8), Geometry::Euclidean},
      {FeasibleSet::box(Vector{{-1.0, 0.0}}, Vector{{0.5, 1.0}}), Geometry::Euclidean},
      {FeasibleSet::box(Vector{{-1.0}}, Vector{{1.0}}), Geometry::Euclidean},
      {FeasibleSet::simplex(3, 0.0), Geometry::Euclidean},
      {FeasibleSet::simplex(3, 0.02), Geometry::NegativeEntropy},
      {FeasibleSet::simplex(2, 0.0), Geometry::NegativeEntropy}};
  for (const auto& [set, geo] : cases) {
    for (int k = 0; k < 4; ++k) {
      const Idx d = set.dim();
      Vector y = testutil::random_point(g, set);
      if (geo == Geometry::NegativeEntropy) y = 0.9 * y + Vector::Constant(d, 0.1 / static_cast<double>(d));
      const Vector v = testutil::gaussian(g, d, 2.0);
      const double eta = testutil::uniform(g, 0.1, 1.1);
      auto objective = [&](const Vector& z) { return v.dot(z) + bregman_divergence(geo, z, y) / eta; };
      const double prox_value = objective(prox_step(geo, set, y, v, eta));
      const double grid = testutil::grid_min(set, objective, kGridPitch);
      ++grid_cases;
      grid_worst = std::max(grid_worst, std::abs(prox_value - grid));
      if (std::abs(prox_value - grid) > kGridTol || prox_value > grid + 1e-12) ++grid_fail;
    }
  }
  return {vi_fail == 0 && grid_fail == 0,
          fmt("%d prox instances, %zu with residual > %.0e (worst %.3g); %zu grid cases, %zu failing (worst gap %.3g)",
              kProxInstances, vi_fail, kViTol, worst, grid_cases, grid_fail, grid_worst)};
}

Verdict criterion_oracles() {
  std::mt19937_64 g(909);
  std::size_t failures = 0;
  std::string first;
  auto fail = [&](const std::string& why) {
    if (failures++ == 0) first = why;
  };
  auto make = [&](int kind, Idx n, Idx d, double radius) {
    const Matrix A = testutil::gaussian(g, n, d);
    const Vector b = testutil::gaussian(g, n, 1.0);
    if (kind == 0) return Problem(LeastSquares{A, b}, FeasibleSet::ball(d, radius));
    if (kind == 1) {
      Vector y(n);
      for (Idx i = 0; i < n; ++i) y[i] = b[i] > 0.0 ? 1.0 : -1.0;
      return Problem(SquaredHingeSVM{A.sparseView(), y, 0.05}, FeasibleSet::ball(d, radius));
    }
    return Problem(L1Regression{A, b}, FeasibleSet::ball(d, radius));
  };

  // Unbiasedness by enumerating every batch.
  for (int kind = 0; kind < 3; ++kind) {
    const Idx n = 10 + 3 * kind;
    const Problem p = make(kind, n, 4, 1.0);
    const Vector x = testutil::random_point(g, p.set());
    const Vector exact = p.gradient(x);
    for (std::size_t batch : {1u, 2u, 3u}) {
      std::vector<std::size_t> idx(batch);
      for (std::size_t i = 0; i < batch; ++i) idx[i] = i;
      Vector sum = Vector::Zero(4);
      std::size_t count = 0;
      while (true) {
        sum += p.batch_gradient(x, idx);
        ++count;
        std::size_t i = batch;
        while (i > 0 && idx[i - 1] == static_cast<std::size_t>(n) - batch + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < batch; ++j) idx[j] = idx[j - 1] + 1;
      }
      const double rel = (sum / static_cast<double>(count) - exact).norm() / std::max(exact.norm(), 1e-300);
      if (rel > kUnbiasedRelTol) fail(fmt("batch enumeration bias %.3g", rel));
    }
  }

  // Finite differences, smoothness and gradient-bound witnesses.
  std::size_t fd_checks = 0, witness_checks = 0;
  for (int kind = 0; kind < 3; ++kind) {
    const Problem p = make(kind, 50, 6, 1.5);
    const auto L = p.smoothness();
    for (int k = 0; k < kWitnessPoints; ++k) {
      const Vector x = testutil::random_point(g, p.set());
      const Vector gx = p.gradient(x);
      if (gx.norm() > p.gradient_bound()) fail(fmt("gradient bound exceeded (kind %d)", kind));
      if (L) {
        const Vector y = testutil::random_point(g, p.set());
        if ((gx - p.gradient(y)).norm() > *L * (x - y).norm() * (1.0 + 1e-12) + 1e-15) {
          fail(fmt("smoothness witness violated (kind %d)", kind));
        }
        if (k < 100) {
          const Vector fd = testutil::finite_difference([&](const Vector& v) { return p.value(v); }, x);
          ++fd_checks;
          if ((fd - gx).norm() > kFiniteDiffRelTol * std::max(1.0, gx.norm())) fail("finite-difference mismatch");
        }
      }
      ++witness_checks;
    }
  }
  return {failures == 0, fmt("enumeration, %zu finite-difference and %zu witness checks, %zu failing%s%s", fd_checks,
                             witness_checks, failures, failures ? ": " : "", first.c_str())};
}

ExperimentConfig breast_cancer_config(std::size_t budget, std::vector<std::uint64_t> seeds) {
  ExperimentConfig cfg;
  cfg.name = "breast-cancer";
  LibsvmSpec spec;
  spec.path = std::string(UNIXGRAD_DATA_DIR) + "/breast-cancer";
  spec.lambda = 1e-4;
  spec.train_fraction = 0.8;
  spec.split_seed = 0;
  cfg.problem = spec;
  cfg.set.kind = "ball";
  cfg.set.radius = 10.0;
  cfg.oracle = MiniBatch{5};
  OptimizerSpec uni, ada, ams;
  uni.name = uni.label = "unixgrad";
  ada.name = ada.label = "adagrad";
  ams.name = ams.label = "amsgrad";
  ams.alpha.reset();
  cfg.optimizers = {uni, ada, ams};
  cfg.oracle_budget = budget;
  cfg.seeds = std::move(seeds);
  cfg.init = "random";
  return cfg;
}

Verdict criterion_svm() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(breast_cancer_config(4000, {1, 2, 3, 4, 5}));
  std::map<std::string, double> accuracy;
  std::map<std::string, std::size_t> calls;
  for (const auto& c : r.cells) {
    if (!c.valid || !c.test_accuracy) return {false, "cell " + c.label + " failed: " + c.error};
    accuracy[c.label] += *c.test_accuracy / static_cast<double>(r.config.seeds.size());
    calls[c.label] = c.oracle_calls;
  }
  const double best_baseline = std::max(accuracy["adagrad"], accuracy["amsgrad"]);
  const bool close = accuracy["unixgrad"] >= best_baseline - kAccuracyGap;
  const bool equal_budget = calls["unixgrad"] == calls["adagrad"] && calls["adagrad"] == calls["amsgrad"];

  // Mean UniXGrad training objective across seeds.
  std::vector<CurvePoint> mean;
  bool finite = true;
  for (const auto& c : r.cells) {
    if (c.label != "unixgrad") continue;
    if (mean.empty()) {
      for (const auto& row : c.rows) mean.push_back({static_cast<double>(row.iter), 0.0});
    }
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      finite = finite && std::isfinite(c.rows[i].objective);
      mean[i].value += c.rows[i].objective / static_cast<double>(r.config.seeds.size());
    }
  }
  const double slope = rate_fit(mean);
  const bool trending = finite && slope < 0.0 && mean.back().value <= mean.front().value;
  const double secs = seconds_since(t0);
  return {close && equal_budget && trending && secs < kSvmSeconds,
          fmt("test accuracy unixgrad %.4f, adagrad %.4f, amsgrad %.4f (gap allowed %.2f); %zu oracle calls each; "
              "objective %.4g -> %.4g, slope %.3f; %.1f s (limit %.0f s)",
              accuracy["unixgrad"], accuracy["adagrad"], accuracy["amsgrad"], kAccuracyGap, calls["unixgrad"],
              mean.front().value, mean.back().value, slope, secs, kSvmSeconds)};
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

Verdict criterion_determinism() {
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig c;
    c.name = "ls-minibatch";
    SyntheticLsSpec s;
    s.n = 120;
    s.d = 20;
    s.seed = 4;
    c.problem = s;
    c.oracle = MiniBatch{5};
    OptimizerSpec uni, ams, sgd, op;
    uni.name = uni.label = "unixgrad";
    ams.name = ams.label = "amsgrad";
    ams.alpha.reset();
    sgd.name = sgd.label = "sgd";
    sgd.c.reset();
    op.name = op.label = "optimistic-md";
    c.optimizers = {uni, ams, sgd, op};
    c.horizon = 512;
    c.seeds = {1, 2, 3};
    c.init = "random";
    configs.push_back(c);
  }
  {
    ExperimentConfig c;
    c.name = "l1";
    SyntheticL1Spec s;
    s.n = 80;
    s.d = 12;
    s.seed = 2;
    c.problem = s;
    OptimizerSpec uni, mp;
    uni.name = uni.label = "unixgrad";
    mp.name = mp.label = "mirror-prox";
    c.optimizers = {uni, mp};
    c.horizon = 512;
    configs.push_back(c);
  }
  configs.push_back(breast_cancer_config(600, {1, 2}));

  const fs::path root = fs::temp_directory_path() / fmt("unixgrad_acceptance_%lld", static_cast<long long>(::getpid()));
  fs::remove_all(root);
  std::size_t identical = 0, files = 0;
  std::string mismatch;
  for (const auto& cfg : configs) {
    const fs::path a = root / cfg.name / "first", b = root / cfg.name / "replay";
    write_experiment(run_experiment(cfg), a);
    std::ifstream in(a / "manifest.json");
    const std::string manifest((std::istreambuf_iterator<char>(in)), {});
    write_experiment(run_experiment(parse_config_text(manifest)), b);
    const auto first = dir_bytes(a), replay = dir_bytes(b);
    files += first.size();
    if (first == replay) {
      ++identical;
    } else if (mismatch.empty()) {
      mismatch = cfg.name;
    }
  }
  fs::remove_all(root);
  return {identical == configs.size(),
          fmt("%zu/%zu configurations replayed byte-identically from their manifests (%zu files)%s%s", identical,
              configs.size(), files, mismatch.empty() ? "" : "; differs: ", mismatch.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> fn;
  };
  // Invariants (7) runs after the criteria whose traces it inspects.
  const std::vector<Criterion> criteria = {
      {1, "regret-to-gap inequality on random least squares", criterion_regret_gap},
      {2, "smooth deterministic bound on synthetic least squares", criterion_smooth_bound},
      {3, "smooth deterministic rate", criterion_smooth_slope},
      {4, "nonsmooth deterministic bound and rate on L1 regression", criterion_nonsmooth},
      {5, "smooth stochastic bound in expectation, mini-batch 5", criterion_stochastic},
      {6, "step-sum double inequality", criterion_step_sums},
      {7, "structural invariants", criterion_invariants},
      {8, "prox and projection correctness", criterion_prox},
      {9, "oracle soundness", criterion_oracles},
      {10, "breast-cancer comparison", criterion_svm},
      {11, "determinism from manifests", criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s\n", c.id, v.pass ? "PASS" : "FAIL", c.title, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
