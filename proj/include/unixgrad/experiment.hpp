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

#ifndef UNIXGRAD_EXPERIMENT_HPP
#define UNIXGRAD_EXPERIMENT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "unixgrad/baselines.hpp"
#include "unixgrad/common.hpp"
#include "unixgrad/data.hpp"
#include "unixgrad/diagnostics.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/oracles.hpp"
#include "unixgrad/rng.hpp"
#include "unixgrad/solver.hpp"

namespace unixgrad {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SyntheticLsSpec {
  std::size_t n = 500;
  std::size_t d = 100;
  double entry_sigma = 1.0;
  double noise_variance = 1e-3;
  Placement placement = Placement::Boundary;
  std::uint64_t seed = 0;
};

struct SyntheticL1Spec {
  std::size_t n = 200;
  std::size_t d = 50;
  double planted_norm = 3.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

struct LibsvmSpec {
  std::string path;
  double lambda = 1e-4;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  bool scale_features = true;
  bool bias = true;
};

using ProblemSpec = std::variant<SyntheticLsSpec, SyntheticL1Spec, LibsvmSpec>;

struct SetSpec {
  std::string kind = "ball";
  double radius = 1.0;
  std::vector<double> center;  ///< empty: origin
  std::vector<double> lower{0.0};  ///< one entry broadcasts
  std::vector<double> upper{1.0};
  double floor = 1e-6;
};

/// Tunable constants hold nullopt when they are to be picked by grid search.
struct OptimizerSpec {
  std::string name;
  std::string label;
  std::optional<double> c = 1.0;
  std::optional<double> alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::optional<double> diameter;
};

struct ExperimentConfig {
  std::string name = "run";
  ProblemSpec problem = SyntheticLsSpec{};
  SetSpec set;
  Geometry geometry = Geometry::Euclidean;
  std::optional<double> diameter;
  std::vector<OptimizerSpec> optimizers;
  OracleMode oracle = Deterministic{};
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> oracle_budget;
  std::vector<std::uint64_t> seeds{0};
  std::string checkpoints = "powers-of-two";
  std::vector<std::size_t> checkpoint_list;
  std::string init = "origin";
};

namespace detail {

/// Typed access to one JSON object; `finish` rejects keys never read.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    return as_number(*v, key);
  }

  std::optional<double> number_or_tune(const std::string& key, std::optional<double> fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (v->is_string() && v->get<std::string>() == "tune") return std::nullopt;
    return as_number(*v, key);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    return as_integer(*v, where_ + "." + key);
  }

  std::string string(const std::string& key, std::string fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(where_ + "." + key + " must be a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(where_ + "." + key + " must be a boolean");
    return v->get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (v->is_number()) return {as_number(*v, key)};
    if (!v->is_array()) throw ConfigError(where_ + "." + key + " must be a number or an array");
    std::vector<double> out;
    for (const auto& e : *v) out.push_back(as_number(e, key));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError("unknown key '" + where_ + "." + it.key() + "'");
    }
  }

  static std::uint64_t as_integer(const Json& v, const std::string& what) {
    const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) throw ConfigError(what + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

 private:
  double as_number(const Json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError(where_ + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where_ + "." + key + " must be finite");
    return x;
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline Placement parse_placement(const std::string& s) {
  if (s == "boundary") return Placement::Boundary;
  if (s == "interior") return Placement::Interior;
  throw ConfigError("placement must be 'boundary' or 'interior'");
}

inline const char* placement_name(Placement p) { return p == Placement::Boundary ? "boundary" : "interior"; }

inline bool is_averaging(const std::string& name) {
  return name == "unixgrad" || name == "mirror-prox" || name == "optimistic-md";
}

inline bool known_optimizer(const std::string& name) {
  return is_averaging(name) || name == "sgd" || name == "adagrad" || name == "amsgrad";
}

}  // namespace detail

/// Parses a configuration object, or the "config" member of a run manifest.
inline ExperimentConfig parse_config(const Json& root) {
  const Json& j = root.is_object() && root.contains("config_hash") && root.contains("config") ? root["config"] : root;
  detail::ObjectReader top(j, "config");
  ExperimentConfig cfg;
  cfg.name = top.string("name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("config.name must be a nonempty plain file name");
  }

  const Json* problem = top.find("problem");
  if (problem == nullptr) throw ConfigError("config.problem is required");
  {
    detail::ObjectReader r(*problem, "problem");
    const std::string kind = r.string("kind", "");
    if (kind == "synthetic-ls") {
      SyntheticLsSpec s;
      s.n = r.integer("n", s.n);
      s.d = r.integer("d", s.d);
      s.entry_sigma = r.number("entry_sigma", s.entry_sigma);
      s.noise_variance = r.number("noise_variance", s.noise_variance);
      s.placement = detail::parse_placement(r.string("placement", "boundary"));
      s.seed = r.integer("seed", s.seed);
      if (s.n == 0 || s.d == 0 || !(s.entry_sigma > 0.0) || s.noise_variance < 0.0) {
        throw ConfigError("problem: invalid synthetic-ls parameters");
      }
      cfg.problem = s;
    } else if (kind == "synthetic-l1") {
      SyntheticL1Spec s;
      s.n = r.integer("n", s.n);
      s.d = r.integer("d", s.d);
      s.planted_norm = r.number("planted_norm", s.planted_norm);
      s.noise = r.number("noise", s.noise);
      s.seed = r.integer("seed", s.seed);
      if (s.n == 0 || s.d == 0 || !(s.planted_norm > 0.0) || s.noise < 0.0) {
        throw ConfigError("problem: invalid synthetic-l1 parameters");
      }
      cfg.problem = s;
    } else if (kind == "libsvm") {
      LibsvmSpec s;
      s.path = r.string("path", "");
      if (s.path.empty()) throw ConfigError("problem.path is required for libsvm problems");
      s.lambda = r.number("lambda", s.lambda);
      s.train_fraction = r.number("train_fraction", s.train_fraction);
      s.split_seed = r.integer("split_seed", s.split_seed);
      s.scale_features = r.boolean("scale_features", s.scale_features);
      s.bias = r.boolean("bias", s.bias);
      if (s.lambda < 0.0) throw ConfigError("problem.lambda must be nonnegative");
      if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) throw ConfigError("problem.train_fraction must lie in (0, 1)");
      cfg.problem = s;
    } else {
      throw ConfigError("problem.kind must be one of synthetic-ls, synthetic-l1, libsvm");
    }
    r.finish();
  }

  if (const Json* set = top.find("set")) {
    detail::ObjectReader r(*set, "set");
    SetSpec s;
    s.kind = r.string("kind", s.kind);
    if (s.kind == "ball") {
      s.radius = r.number("radius", s.radius);
      s.center = r.numbers("center", {});
      if (!(s.radius > 0.0)) throw ConfigError("set.radius must be positive");
    } else if (s.kind == "box") {
      s.lower = r.numbers("lower", s.lower);
      s.upper = r.numbers("upper", s.upper);
    } else if (s.kind == "simplex") {
      s.floor = r.number("floor", s.floor);
      if (s.floor < 0.0) throw ConfigError("set.floor must be nonnegative");
    } else {
      throw ConfigError("set.kind must be one of ball, box, simplex");
    }
    r.finish();
    cfg.set = s;
  }

  cfg.geometry = parse_geometry(top.string("geometry", "euclidean"));
  if (const Json* d = top.find("diameter"); d != nullptr && !d->is_null()) {
    if (!d->is_number() || !(d->get<double>() > 0.0)) throw ConfigError("config.diameter must be a positive number");
    cfg.diameter = d->get<double>();
  }

  if (const Json* oracle = top.find("oracle")) {
    detail::ObjectReader r(*oracle, "oracle");
    const std::string kind = r.string("kind", "deterministic");
    if (kind == "deterministic") {
      cfg.oracle = Deterministic{};
    } else if (kind == "minibatch") {
      const std::uint64_t b = r.integer("batch_size", 0);
      if (b == 0) throw ConfigError("oracle.batch_size must be positive");
      cfg.oracle = MiniBatch{static_cast<std::size_t>(b)};
    } else if (kind == "additive-noise") {
      const double sigma = r.number("sigma", -1.0);
      if (sigma < 0.0) throw ConfigError("oracle.sigma must be nonnegative");
      cfg.oracle = AdditiveNoise{sigma};
    } else {
      throw ConfigError("oracle.kind must be one of deterministic, minibatch, additive-noise");
    }
    r.finish();
  }

  const Json* opts = top.find("optimizers");
  if (opts == nullptr || !opts->is_array() || opts->empty()) throw ConfigError("config.optimizers must be a nonempty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < opts->size(); ++i) {
    detail::ObjectReader r((*opts)[i], "optimizers[" + std::to_string(i) + "]");
    OptimizerSpec o;
    o.name = r.string("name", "");
    if (!detail::known_optimizer(o.name)) throw ConfigError("unknown optimizer '" + o.name + "'");
    o.label = r.string("label", o.name);
    if (o.label.empty() || o.label.find_first_of("/\\,") != std::string::npos) {
      throw ConfigError("optimizer label must be a nonempty plain name");
    }
    if (!labels.insert(o.label).second) throw ConfigError("duplicate optimizer label '" + o.label + "'");
    if (o.name == "sgd") {
      o.c = r.number_or_tune("c", o.c);
      if (o.c && !(*o.c > 0.0)) throw ConfigError("sgd.c must be positive");
    } else if (o.name == "amsgrad") {
      o.alpha = r.number_or_tune("alpha", o.alpha);
      o.beta1 = r.number("beta1", o.beta1);
      o.beta2 = r.number("beta2", o.beta2);
      o.epsilon = r.number("epsilon", o.epsilon);
      detail::validate_baseline(AmsGrad{o.alpha.value_or(1.0), o.beta1, o.beta2, o.epsilon});
    } else if (o.name == "adagrad") {
      if (const Json* d = r.find("diameter"); d != nullptr && !d->is_null()) {
        if (!d->is_number() || !(d->get<double>() > 0.0)) throw ConfigError("adagrad.diameter must be positive");
        o.diameter = d->get<double>();
      }
    }
    r.finish();
    cfg.optimizers.push_back(o);
  }

  if (const Json* h = top.find("horizon"); h != nullptr && !h->is_null()) {
    cfg.horizon = detail::ObjectReader::as_integer(*h, "config.horizon");
  }
  if (const Json* b = top.find("oracle_budget"); b != nullptr && !b->is_null()) {
    cfg.oracle_budget = detail::ObjectReader::as_integer(*b, "config.oracle_budget");
  }
  if (cfg.horizon.has_value() == cfg.oracle_budget.has_value()) {
    throw ConfigError("exactly one of config.horizon and config.oracle_budget is required");
  }
  if (cfg.horizon.value_or(1) < 1) throw ConfigError("config.horizon must be at least 1");
  if (cfg.oracle_budget && *cfg.oracle_budget < 4) throw ConfigError("config.oracle_budget must be at least 4");

  if (const Json* seeds = top.find("seeds")) {
    if (!seeds->is_array() || seeds->empty()) throw ConfigError("config.seeds must be a nonempty array");
    cfg.seeds.clear();
    std::set<std::uint64_t> seen;
    for (const auto& s : *seeds) {
      const std::uint64_t v = detail::ObjectReader::as_integer(s, "config.seeds[]");
      if (!seen.insert(v).second) throw ConfigError("duplicate seed " + std::to_string(v));
      cfg.seeds.push_back(v);
    }
  }

  if (const Json* cp = top.find("checkpoints")) {
    if (cp->is_string()) {
      cfg.checkpoints = cp->get<std::string>();
      if (cfg.checkpoints != "powers-of-two" && cfg.checkpoints != "all") {
        throw ConfigError("config.checkpoints must be 'powers-of-two', 'all' or an array");
      }
    } else if (cp->is_array() && !cp->empty()) {
      cfg.checkpoints = "list";
      for (const auto& e : *cp) {
        const std::uint64_t t = detail::ObjectReader::as_integer(e, "config.checkpoints[]");
        if (t < 1) throw ConfigError("checkpoints must be at least 1");
        if (!cfg.checkpoint_list.empty() && t <= cfg.checkpoint_list.back()) {
          throw ConfigError("checkpoints must be strictly increasing");
        }
        cfg.checkpoint_list.push_back(t);
      }
    } else {
      throw ConfigError("config.checkpoints must be 'powers-of-two', 'all' or an array");
    }
  }

  cfg.init = top.string("init", cfg.init);
  if (cfg.init != "origin" && cfg.init != "random") throw ConfigError("config.init must be 'origin' or 'random'");
  top.finish();
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Canonical form with every default filled in; parse_config(to_json(c)) == c.
inline Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        Json q;
        if constexpr (std::is_same_v<P, SyntheticLsSpec>) {
          q = {{"kind", "synthetic-ls"}, {"n", p.n}, {"d", p.d}, {"entry_sigma", p.entry_sigma},
               {"noise_variance", p.noise_variance}, {"placement", detail::placement_name(p.placement)},
               {"seed", p.seed}};
        } else if constexpr (std::is_same_v<P, SyntheticL1Spec>) {
          q = {{"kind", "synthetic-l1"}, {"n", p.n},         {"d", p.d},      {"planted_norm", p.planted_norm},
               {"noise", p.noise},       {"seed", p.seed}};
        } else {
          q = {{"kind", "libsvm"},         {"path", p.path},
               {"lambda", p.lambda},       {"train_fraction", p.train_fraction},
               {"split_seed", p.split_seed}, {"scale_features", p.scale_features},
               {"bias", p.bias}};
        }
        j["problem"] = q;
      },
      cfg.problem);
  Json s = {{"kind", cfg.set.kind}};
  if (cfg.set.kind == "ball") {
    s["radius"] = cfg.set.radius;
    if (!cfg.set.center.empty()) s["center"] = cfg.set.center;
  } else if (cfg.set.kind == "box") {
    s["lower"] = cfg.set.lower;
    s["upper"] = cfg.set.upper;
  } else {
    s["floor"] = cfg.set.floor;
  }
  j["set"] = s;
  j["geometry"] = std::string(to_string(cfg.geometry));
  j["diameter"] = cfg.diameter ? Json(*cfg.diameter) : Json(nullptr);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Deterministic>) {
          j["oracle"] = {{"kind", "deterministic"}};
        } else if constexpr (std::is_same_v<M, MiniBatch>) {
          j["oracle"] = {{"kind", "minibatch"}, {"batch_size", m.batch_size}};
        } else {
          j["oracle"] = {{"kind", "additive-noise"}, {"sigma", m.sigma}};
        }
      },
      cfg.oracle);
  Json opts = Json::array();
  for (const auto& o : cfg.optimizers) {
    Json e = {{"name", o.name}, {"label", o.label}};
    auto tunable = [](const std::optional<double>& v) { return v ? Json(*v) : Json("tune"); };
    if (o.name == "sgd") e["c"] = tunable(o.c);
    if (o.name == "amsgrad") {
      e["alpha"] = tunable(o.alpha);
      e["beta1"] = o.beta1;
      e["beta2"] = o.beta2;
      e["epsilon"] = o.epsilon;
    }
    if (o.name == "adagrad") e["diameter"] = o.diameter ? Json(*o.diameter) : Json(nullptr);
    opts.push_back(e);
  }
  j["optimizers"] = opts;
  j["horizon"] = cfg.horizon ? Json(*cfg.horizon) : Json(nullptr);
  j["oracle_budget"] = cfg.oracle_budget ? Json(*cfg.oracle_budget) : Json(nullptr);
  j["seeds"] = cfg.seeds;
  if (cfg.checkpoints == "list") {
    j["checkpoints"] = cfg.checkpoint_list;
  } else {
    j["checkpoints"] = cfg.checkpoints;
  }
  j["init"] = cfg.init;
  return j;
}

/// 64-bit FNV-1a of the canonical configuration text.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

inline FeasibleSet build_set(const SetSpec& s, Eigen::Index dim) {
  if (s.kind == "ball") {
    if (s.center.empty()) return FeasibleSet::ball(dim, s.radius);
    if (static_cast<Eigen::Index>(s.center.size()) != dim) throw ConfigError("set.center has the wrong dimension");
    return FeasibleSet::ball(Eigen::Map<const Vector>(s.center.data(), dim), s.radius);
  }
  if (s.kind == "box") {
    auto expand = [&](const std::vector<double>& v, const char* what) {
      if (v.size() == 1) return Vector(Vector::Constant(dim, v[0]));
      if (static_cast<Eigen::Index>(v.size()) != dim) throw ConfigError(std::string("set.") + what + " has the wrong dimension");
      return Vector(Eigen::Map<const Vector>(v.data(), dim));
    };
    return FeasibleSet::box(expand(s.lower, "lower"), expand(s.upper, "upper"));
  }
  return FeasibleSet::simplex(dim, s.floor);
}

struct AssembledProblem {
  Problem problem;
  std::optional<SparseDataset> test;  ///< held-out rows, libsvm problems only
  std::size_t train_size = 0;
};

/// Resolves a data path against the working directory, then `base_dir`.
inline std::string resolve_data_path(const std::string& path, const std::filesystem::path& base_dir) {
  namespace fs = std::filesystem;
  if (path == "-" || fs::path(path).is_absolute() || fs::exists(path) || base_dir.empty()) return path;
  const fs::path alt = base_dir / path;
  return fs::exists(alt) ? alt.string() : path;
}

inline AssembledProblem build_problem(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {}) {
  return std::visit(
      [&](const auto& p) -> AssembledProblem {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SyntheticLsSpec>) {
          LsGeneratorOptions opt;
          opt.n = p.n;
          opt.d = p.d;
          opt.entry_sigma = p.entry_sigma;
          opt.noise_variance = p.noise_variance;
          opt.placement = p.placement;
          opt.seed = p.seed;
          opt.radius = cfg.set.kind == "ball" ? cfg.set.radius : 1.0;
          auto [data, problem] = generate_ls(opt);
          const auto d = static_cast<Eigen::Index>(p.d);
          return AssembledProblem{Problem(problem.objective(), build_set(cfg.set, d)), std::nullopt, p.n};
        } else if constexpr (std::is_same_v<P, SyntheticL1Spec>) {
          L1GeneratorOptions opt;
          opt.n = p.n;
          opt.d = p.d;
          opt.planted_norm = p.planted_norm;
          opt.noise = p.noise;
          opt.seed = p.seed;
          opt.radius = cfg.set.kind == "ball" ? cfg.set.radius : 1.0;
          auto [x_nat, problem] = generate_l1(opt);
          const auto d = static_cast<Eigen::Index>(p.d);
          Problem rebuilt(problem.objective(), build_set(cfg.set, d));
          if (problem.known_reference() && cfg.set.kind == "ball" && cfg.set.center.empty()) {
            rebuilt.set_known_reference(*problem.known_reference());
          }
          return AssembledProblem{std::move(rebuilt), std::nullopt, p.n};
        } else {
          SparseDataset all = read_libsvm(resolve_data_path(p.path, base_dir));
          for (const auto& row : all.rows) {
            if (row.label != 1.0 && row.label != -1.0) throw ConfigError("libsvm problems need two-class labels");
          }
          auto [train, test] = split(all, p.train_fraction, p.split_seed);
          if (p.scale_features) {
            const ColumnScaler scaler = ColumnScaler::fit(train);
            train = scaler.transform(train);
            test = scaler.transform(test);
          }
          std::int64_t dim = all.dim;
          if (p.bias) {
            ++dim;
            for (auto* ds : {&train, &test}) {
              for (auto& row : ds->rows) row.features.emplace_back(dim, 1.0);
              ds->dim = dim;
            }
          }
          SquaredHingeSVM svm{design_matrix(train, dim), label_vector(train), p.lambda};
          const std::size_t n_train = train.size();
          return AssembledProblem{Problem(std::move(svm), build_set(cfg.set, static_cast<Eigen::Index>(dim))),
                                  std::move(test), n_train};
        }
      },
      cfg.problem);
}

/// Uniform point of a ball or box; Dirichlet(1) point of the floored simplex.
inline Vector random_feasible_point(const FeasibleSet& set, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Vector {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, L2Ball>) {
          const auto d = s.center.size();
          Vector dir = rng.normal_vector(d);
          const double nrm = dir.norm();
          if (nrm == 0.0) return s.center;
          const double r = s.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
          return euclidean_project(set, s.center + (r / nrm) * dir);
        } else if constexpr (std::is_same_v<S, Box>) {
          Vector x(s.lower.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(s.lower[i], s.upper[i]);
          return x;
        } else {
          Vector w(s.dim);
          for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = -std::log(1.0 - rng.uniform());
          w /= w.sum();
          const double d = static_cast<double>(s.dim);
          return Vector(Vector::Constant(s.dim, s.floor)) + (1.0 - d * s.floor) * w;
        }
      },
      set.variant());
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "iter,alpha,eta,objective,suboptimality,regret_cum,grad_diff_norm";

/// 17 significant digits; round-trips every double.
inline std::string format_csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvRow {
  std::size_t iter = 0;
  double alpha = 0.0;
  double eta = 0.0;
  double objective = 0.0;
  double suboptimality = 0.0;
  double regret_cum = 0.0;
  double grad_diff_norm = 0.0;
};

inline std::string format_csv(const std::vector<CsvRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    for (double v : {r.alpha, r.eta, r.objective, r.suboptimality, r.regret_cum, r.grad_diff_norm}) {
      out += ',';
      out += format_csv_double(v);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<CsvRow> parse_csv(const std::string& text, const std::string& name = "csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(1, name + ": unexpected CSV header");
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw ParseError(lineno, name + ": expected 7 columns");
    auto num = [&](const std::string& c) {
      if (c == "nan") return std::numeric_limits<double>::quiet_NaN();
      if (c == "inf") return std::numeric_limits<double>::infinity();
      if (c == "-inf") return -std::numeric_limits<double>::infinity();
      return detail::parse_double(c, lineno, "CSV value");
    };
    CsvRow r;
    r.iter = static_cast<std::size_t>(detail::parse_index(cells[0], lineno));
    r.alpha = num(cells[1]);
    r.eta = num(cells[2]);
    r.objective = num(cells[3]);
    r.suboptimality = num(cells[4]);
    r.regret_cum = num(cells[5]);
    r.grad_diff_norm = num(cells[6]);
    rows.push_back(r);
  }
  return rows;
}

/// Oracle calls spent per iteration by each optimizer.
inline std::size_t calls_per_iteration(const std::string& name) {
  return (name == "unixgrad" || name == "mirror-prox") ? 2 : 1;
}

inline std::size_t optimizer_horizon(const ExperimentConfig& cfg, const OptimizerSpec& o) {
  if (cfg.horizon) return *cfg.horizon;
  const std::size_t budget = *cfg.oracle_budget;
  // The optimistic variant spends one extra call at t = 1.
  if (o.name == "optimistic-md") return budget - 1;
  return budget / calls_per_iteration(o.name);
}

inline std::vector<std::size_t> checkpoints_for(const ExperimentConfig& cfg, std::size_t horizon) {
  if (cfg.checkpoints == "all") {
    std::vector<std::size_t> out(horizon);
    for (std::size_t t = 0; t < horizon; ++t) out[t] = t + 1;
    return out;
  }
  if (cfg.checkpoints == "list") {
    std::vector<std::size_t> out;
    for (std::size_t t : cfg.checkpoint_list) {
      if (t <= horizon) out.push_back(t);
    }
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
  }
  return checkpoint_schedule(horizon);
}

struct CellResult {
  std::string label;
  std::string name;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t oracle_calls = 0;
  std::vector<CsvRow> rows;
  Vector final_point;
  bool valid = true;
  std::string error;
  Json params = Json::object();
  std::optional<double> test_accuracy;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::optional<Reference> reference;
  std::string reference_error;
  Diameter diameter;
  BoundConstants constants;
  double noise_empirical = 0.0;
  std::vector<CellResult> cells;
  std::optional<std::size_t> test_size;
  std::size_t train_size = 0;
  Json problem_info;
};

namespace detail {

inline std::uint64_t init_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ull; }

inline CellResult run_cell(const ExperimentConfig& cfg, const OptimizerSpec& spec, std::uint64_t seed,
                           const Problem& problem, const std::optional<Reference>& ref,
                           const std::optional<SparseDataset>& test) {
  CellResult cell;
  cell.label = spec.label;
  cell.name = spec.name;
  cell.seed = seed;
  cell.iterations = optimizer_horizon(cfg, spec);
  std::optional<Vector> start;
  if (cfg.init == "random") {
    Rng init_rng(init_seed(seed));
    start = random_feasible_point(problem.set(), init_rng);
  }

  RunTrace trace;
  if (is_averaging(spec.name)) {
    SolverConfig sc{.set = problem.set()};
    sc.horizon = cell.iterations;
    sc.geometry = cfg.geometry;
    sc.diameter_override = cfg.diameter;
    sc.variant = spec.name == "unixgrad" ? Variant::UniXGrad
                 : spec.name == "mirror-prox" ? Variant::MirrorProx
                                              : Variant::OptimisticMD;
    sc.seed = seed;
    sc.mode = cfg.oracle;
    sc.initial_point = start;
    trace = run(problem, sc);
  } else {
    BaselineConfig bc;
    bc.horizon = cell.iterations;
    bc.seed = seed;
    bc.mode = cfg.oracle;
    bc.initial_point = start;
    if (spec.name == "sgd") {
      bc.kind = Sgd{spec.c.value_or(1.0)};
      if (!spec.c) bc.kind = tune_baseline(problem, bc);
      cell.params["c"] = std::get<Sgd>(bc.kind).c;
    } else if (spec.name == "amsgrad") {
      bc.kind = AmsGrad{spec.alpha.value_or(1.0), spec.beta1, spec.beta2, spec.epsilon};
      if (!spec.alpha) bc.kind = tune_baseline(problem, bc);
      cell.params["alpha"] = std::get<AmsGrad>(bc.kind).alpha;
    } else {
      const double d = spec.diameter ? *spec.diameter : diameter(Geometry::Euclidean, problem.set()).value;
      bc.kind = AdaGradScalar{d};
      cell.params["diameter"] = d;
    }
    trace = run_baseline(problem, bc);
  }
  cell.valid = trace.valid;
  cell.error = trace.error;
  cell.oracle_calls = trace.oracle_calls;
  cell.final_point = trace.x_bar;

  const auto marks = checkpoints_for(cfg, cell.iterations);
  std::size_t next = 0;
  long double regret = 0.0L;
  for (const auto& rec : trace.records) {
    if (ref) regret += static_cast<long double>(rec.alpha) * (rec.x - ref->x).dot(rec.gradient);
    if (next < marks.size() && rec.t == marks[next]) {
      CsvRow row;
      row.iter = rec.t;
      row.alpha = rec.alpha;
      row.eta = rec.eta;
      row.objective = rec.objective;
      row.suboptimality = ref ? problem.gap(rec.x_bar, *ref) : std::numeric_limits<double>::quiet_NaN();
      row.regret_cum = ref ? static_cast<double>(regret) : std::numeric_limits<double>::quiet_NaN();
      row.grad_diff_norm = rec.grad_diff_norm;
      cell.rows.push_back(row);
      ++next;
    }
  }
  if (test) cell.test_accuracy = test_accuracy(cell.final_point, *test);
  return cell;
}

}  // namespace detail

/// Builds the problem, solves for the reference, and runs every
/// (optimizer, seed) cell. A failed reference leaves `reference` empty and
/// the gap columns NaN.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {}) {
  ExperimentResult out;
  out.config = cfg;
  AssembledProblem assembled = build_problem(cfg, base_dir);
  const Problem& problem = assembled.problem;
  out.train_size = assembled.train_size;
  if (assembled.test) out.test_size = assembled.test->size();
  out.problem_info = {{"objective", std::string(objective_name(problem.objective()))},
                      {"samples", problem.num_samples()},
                      {"dim", problem.dim()},
                      {"set", std::string(problem.set().kind())}};

  SolverConfig probe{.set = problem.set()};
  probe.geometry = cfg.geometry;
  probe.diameter_override = cfg.diameter;
  out.diameter = resolve_diameter(probe);
  out.constants = bound_constants(problem, cfg.oracle, out.diameter);

  try {
    out.reference = solve_reference(problem);
  } catch (const ReferenceFailure& e) {
    out.reference_error = e.what();
  }
  if (is_stochastic(cfg.oracle)) {
    Rng rng(0);
    const Vector at = out.reference ? out.reference->x : euclidean_project(problem.set(), Vector::Zero(problem.dim()));
    out.noise_empirical = estimate_noise(problem, cfg.oracle, at, 1000, rng);
  }

  for (const auto& spec : cfg.optimizers) {
    for (std::uint64_t seed : cfg.seeds) {
      out.cells.push_back(detail::run_cell(cfg, spec, seed, problem, out.reference, assembled.test));
    }
  }
  return out;
}

inline std::string csv_file_name(const CellResult& cell) {
  return cell.label + "_seed" + std::to_string(cell.seed) + ".csv";
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json manifest_json(const ExperimentResult& r) {
  Json m;
  m["config"] = to_json(r.config);
  m["config_hash"] = config_hash(r.config);
  m["rng"] = Rng::kAlgorithm;
  m["problem"] = r.problem_info;
  if (const auto* lib = std::get_if<LibsvmSpec>(&r.config.problem)) {
    m["problem"]["train_size"] = r.train_size;
    m["problem"]["test_size"] = r.test_size.value_or(0);
    m["problem"]["column_scaling"] = lib->scale_features;
  }
  m["constants"] = {{"D", r.diameter.value},
                    {"D_squared", r.diameter.squared},
                    {"L", optional_json(r.constants.smoothness)},
                    {"G", optional_json(r.constants.gradient_bound)},
                    {"sigma", optional_json(r.constants.noise)},
                    {"sigma_empirical", r.noise_empirical},
                    {"stochastic", is_stochastic(r.config.oracle)}};
  m["reference"] = {{"f_star", r.reference ? Json(r.reference->value) : Json(nullptr)},
                    {"status", r.reference ? std::string("ok") : "failed: " + r.reference_error}};
  Json runs = Json::array();
  for (const auto& c : r.cells) {
    Json e = {{"optimizer", c.label},
              {"kind", c.name},
              {"seed", c.seed},
              {"iterations", c.iterations},
              {"oracle_calls", c.oracle_calls},
              {"oracle_calls_per_iteration", calls_per_iteration(c.name)},
              {"evaluated_at", detail::is_averaging(c.name) ? "average" : "last"},
              {"csv", csv_file_name(c)},
              {"valid", c.valid},
              {"params", c.params},
              {"final_objective", c.rows.empty() ? Json(nullptr) : Json(c.rows.back().objective)},
              {"test_accuracy", optional_json(c.test_accuracy)}};
    if (!c.valid) e["error"] = c.error;
    runs.push_back(e);
  }
  m["runs"] = runs;
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

/// Writes one CSV per cell and manifest.json into `dir`.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : r.cells) write_text_file(dir / csv_file_name(c), format_csv(c.rows));
  write_text_file(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
}

/// Directory used when none is given: $UNIXGRAD_OUTPUT_DIR/<name>, else runs/<name>.
inline std::filesystem::path default_output_dir(const ExperimentConfig& cfg) {
  const char* env = std::getenv("UNIXGRAD_OUTPUT_DIR");
  const std::filesystem::path root = (env != nullptr && *env != '\0') ? std::filesystem::path(env) : "runs";
  return root / cfg.name;
}

}  // namespace unixgrad

#endif  // UNIXGRAD_EXPERIMENT_HPP
