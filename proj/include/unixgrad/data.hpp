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

#ifndef UNIXGRAD_DATA_HPP
#define UNIXGRAD_DATA_HPP

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unixgrad/common.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/oracles.hpp"
#include "unixgrad/rng.hpp"

namespace unixgrad {

// ---------------------------------------------------------------------------
// LIBSVM datasets
// ---------------------------------------------------------------------------

struct SparseRow {
  double label = 0.0;
  /// (1-based index, value), strictly increasing in index.
  std::vector<std::pair<std::int64_t, double>> features;

  bool operator==(const SparseRow&) const = default;
};

struct SparseDataset {
  std::vector<SparseRow> rows;
  std::int64_t dim = 0;

  std::size_t size() const noexcept { return rows.size(); }
  bool operator==(const SparseDataset&) const = default;
};

namespace detail {

inline double parse_double(std::string_view token, std::size_t line, const char* what) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, std::string("non-finite ") + what);
  return value;
}

inline std::int64_t parse_index(std::string_view token, std::size_t line) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(line, "invalid feature index '" + std::string(token) + "'");
  }
  if (value <= 0) throw ParseError(line, "feature index must be positive");
  return value;
}

}  // namespace detail

/// Maps a two-class label set to {-1, +1} by ascending order (e.g. {2, 4}).
/// Other label sets are left unchanged.
inline void map_binary_labels(SparseDataset& data) {
  std::set<double> classes;
  for (const auto& row : data.rows) classes.insert(row.label);
  if (classes.size() != 2) return;
  const double low = *classes.begin();
  for (auto& row : data.rows) row.label = row.label == low ? -1.0 : 1.0;
}

/// Parses "label idx:val idx:val ..." lines; '#' starts a comment.
inline SparseDataset parse_libsvm(std::string_view text, bool map_labels = true) {
  SparseDataset data;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) continue;

    SparseRow row;
    row.label = detail::parse_double(tokens[0], line_no, "label");
    std::int64_t last = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "expected idx:value, got '" + std::string(tokens[k]) + "'");
      const std::int64_t index = detail::parse_index(tokens[k].substr(0, colon), line_no);
      if (index <= last) throw ParseError(line_no, "feature indices must be strictly increasing");
      last = index;
      row.features.emplace_back(index, detail::parse_double(tokens[k].substr(colon + 1), line_no, "feature value"));
    }
    data.dim = std::max(data.dim, last);
    data.rows.push_back(std::move(row));
  }
  if (map_labels) map_binary_labels(data);
  return data;
}

/// Reads a whole file; ".gz" files are inflated with zlib. "-" reads stdin.
inline std::string read_text(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw ConfigError("cannot open '" + path + "'");
    std::string out;
    char buffer[1 << 15];
    int got = 0;
    while ((got = gzread(file, buffer, sizeof(buffer))) > 0) out.append(buffer, static_cast<std::size_t>(got));
    const bool failed = got < 0;
    gzclose(file);
    if (failed) throw ConfigError("corrupt gzip stream in '" + path + "'");
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SparseDataset read_libsvm(const std::string& path, bool map_labels = true) {
  return parse_libsvm(read_text(path), map_labels);
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Shortest round-trip text for each value.
inline std::string serialize_libsvm(const SparseDataset& data) {
  std::string out;
  for (const auto& row : data.rows) {
    out += format_double(row.label);
    for (const auto& [index, value] : row.features) {
      out += ' ';
      out += std::to_string(index);
      out += ':';
      out += format_double(value);
    }
    out += '\n';
  }
  return out;
}

/// Seeded shuffle then cut; |train| = round(train_fraction * n).
inline std::pair<SparseDataset, SparseDataset> split(const SparseDataset& data, double train_fraction,
                                                     std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 2) throw ConfigError("split needs at least two rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  const auto train_size = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (train_size == 0 || train_size == n) throw ConfigError("train fraction leaves an empty side");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  SparseDataset train;
  SparseDataset test;
  train.dim = test.dim = data.dim;
  for (std::size_t k = 0; k < n; ++k) (k < train_size ? train : test).rows.push_back(data.rows[order[k]]);
  return {std::move(train), std::move(test)};
}

/// Per-column affine map onto [0, 1], fitted on one dataset and applied to
/// others. Missing entries count as zeros.
class ColumnScaler {
 public:
  static ColumnScaler fit(const SparseDataset& data) {
    ColumnScaler s;
    const auto d = static_cast<std::size_t>(data.dim);
    s.lo_.assign(d, std::numeric_limits<double>::infinity());
    s.hi_.assign(d, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> present(d, 0);
    for (const auto& row : data.rows) {
      for (const auto& [index, value] : row.features) {
        const auto c = static_cast<std::size_t>(index - 1);
        s.lo_[c] = std::min(s.lo_[c], value);
        s.hi_[c] = std::max(s.hi_[c], value);
        ++present[c];
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (present[c] < data.size()) {
        s.lo_[c] = std::min(s.lo_[c], 0.0);
        s.hi_[c] = std::max(s.hi_[c], 0.0);
      }
    }
    return s;
  }

  SparseDataset transform(const SparseDataset& data) const {
    SparseDataset out;
    out.dim = data.dim;
    const auto d = static_cast<std::int64_t>(lo_.size());
    for (const auto& row : data.rows) {
      std::vector<double> dense(lo_.size(), 0.0);
      for (const auto& [index, value] : row.features) {
        if (index <= d) dense[static_cast<std::size_t>(index - 1)] = value;
      }
      SparseRow scaled;
      scaled.label = row.label;
      for (std::int64_t c = 1; c <= d; ++c) {
        const auto k = static_cast<std::size_t>(c - 1);
        const double span = hi_[k] - lo_[k];
        const double v = span > 0.0 ? std::clamp((dense[k] - lo_[k]) / span, 0.0, 1.0) : 0.0;
        if (v != 0.0) scaled.features.emplace_back(c, v);
      }
      out.rows.push_back(std::move(scaled));
    }
    return out;
  }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Row-major sparse design matrix with `dim` columns (features beyond `dim`
/// are dropped).
inline SparseMatrix design_matrix(const SparseDataset& data, std::int64_t dim) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (const auto& [index, value] : data.rows[r].features) {
      if (index <= dim) triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(index - 1), value);
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

inline Vector label_vector(const SparseDataset& data) {
  Vector y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t r = 0; r < data.size(); ++r) y[static_cast<Eigen::Index>(r)] = data.rows[r].label;
  return y;
}

// ---------------------------------------------------------------------------
// Synthetic least squares
// ---------------------------------------------------------------------------

/// Where the unconstrained least-squares optimum lands relative to the ball.
enum class Placement { Interior, Boundary };

struct SyntheticLS {
  Matrix A;
  Vector b;
  Vector x_nat;
  Vector noise;
  std::uint64_t seed = 0;
};

struct LsGeneratorOptions {
  std::size_t n = 500;
  std::size_t d = 100;
  double entry_sigma = 1.0;
  double noise_variance = 1e-3;
  double radius = 1.0;
  Placement placement = Placement::Boundary;
  std::uint64_t seed = 0;
};

/// A ~ N(0, entry_sigma^2), b = A x_nat + eps with eps ~ N(0, noise_variance).
/// x_nat is a Gaussian direction scaled so the unconstrained optimum has norm
/// radius/2 (Interior) or 2 radius (Boundary).
inline std::pair<SyntheticLS, Problem> generate_ls(const LsGeneratorOptions& opt) {
  if (opt.n == 0 || opt.d == 0) throw ConfigError("generator dimensions must be positive");
  if (!(opt.entry_sigma > 0.0) || opt.noise_variance < 0.0 || !(opt.radius > 0.0)) {
    throw ConfigError("generator scales must be positive");
  }
  const auto n = static_cast<Eigen::Index>(opt.n);
  const auto d = static_cast<Eigen::Index>(opt.d);
  Rng rng(opt.seed);
  SyntheticLS data;
  data.seed = opt.seed;
  data.A.resize(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) data.A(i, j) = opt.entry_sigma * rng.normal();
  }
  const Vector direction = rng.normal_vector(d);
  data.noise = std::sqrt(opt.noise_variance) * rng.normal_vector(n);

  // Unconstrained optimum is s * direction + w, with w the least-squares fit of the noise.
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(data.A);
  const Vector w = cod.solve(data.noise);
  const double target = opt.placement == Placement::Interior ? 0.5 * opt.radius : 2.0 * opt.radius;
  const double uu = direction.squaredNorm();
  const double uw = direction.dot(w);
  const double ww = w.squaredNorm();
  const double disc = uw * uw - uu * (ww - target * target);
  const double scale = (-uw + std::sqrt(std::max(disc, 0.0))) / uu;
  data.x_nat = scale * direction;
  data.b = data.A * data.x_nat + data.noise;

  Problem problem(LeastSquares{data.A, data.b}, FeasibleSet::ball(d, opt.radius));
  return {std::move(data), std::move(problem)};
}

// ---------------------------------------------------------------------------
// Synthetic L1 regression
// ---------------------------------------------------------------------------

struct L1GeneratorOptions {
  std::size_t n = 200;
  std::size_t d = 50;
  double radius = 1.0;
  /// ||x_nat|| / radius; above 1 the constrained optimum sits on the sphere.
  double planted_norm = 3.0;
  /// Standard deviation of the Gaussian residual noise.
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// A ~ N(0, 1), b = A x_nat + noise * N(0, 1), constrained to the ball of
/// `radius` around the origin. With zero noise and x_nat inside the ball the
/// minimizer is x_nat itself and is attached as a known reference.
inline std::pair<Vector, Problem> generate_l1(const L1GeneratorOptions& opt) {
  if (opt.n == 0 || opt.d == 0) throw ConfigError("generator dimensions must be positive");
  if (!(opt.radius > 0.0) || !(opt.planted_norm > 0.0) || opt.noise < 0.0) {
    throw ConfigError("generator scales must be positive");
  }
  const auto n = static_cast<Eigen::Index>(opt.n);
  const auto d = static_cast<Eigen::Index>(opt.d);
  Rng rng(opt.seed);
  Matrix A(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = rng.normal();
  }
  Vector x_nat = rng.normal_vector(d);
  x_nat *= opt.planted_norm * opt.radius / x_nat.norm();
  const Vector b = A * x_nat + opt.noise * rng.normal_vector(n);
  Problem problem(L1Regression{A, b}, FeasibleSet::ball(d, opt.radius));
  if (opt.noise == 0.0 && opt.planted_norm <= 1.0) problem.set_known_reference(Reference{x_nat, problem.value(x_nat)});
  return {std::move(x_nat), std::move(problem)};
}

}  // namespace unixgrad

#endif  // UNIXGRAD_DATA_HPP
