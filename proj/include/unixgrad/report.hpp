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

#ifndef UNIXGRAD_REPORT_HPP
#define UNIXGRAD_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "unixgrad/diagnostics.hpp"
#include "unixgrad/experiment.hpp"

namespace unixgrad {

struct LoadedCell {
  std::string label;
  std::string kind;
  std::uint64_t seed = 0;
  std::size_t calls_per_iteration = 1;
  std::string evaluated_at;
  std::vector<CsvRow> rows;
};

struct LoadedRun {
  std::filesystem::path dir;
  Json manifest;
  std::vector<LoadedCell> cells;
};

inline LoadedRun load_run(const std::filesystem::path& dir) {
  LoadedRun run;
  run.dir = dir;
  try {
    run.manifest = Json::parse(read_text((dir / "manifest.json").string()));
    for (const auto& e : run.manifest.at("runs")) {
      LoadedCell c;
      c.label = e.at("optimizer").get<std::string>();
      c.kind = e.at("kind").get<std::string>();
      c.seed = e.at("seed").get<std::uint64_t>();
      c.calls_per_iteration = e.at("oracle_calls_per_iteration").get<std::size_t>();
      c.evaluated_at = e.at("evaluated_at").get<std::string>();
      const std::string file = e.at("csv").get<std::string>();
      c.rows = parse_csv(read_text((dir / file).string()), file);
      run.cells.push_back(std::move(c));
    }
  } catch (const Json::exception& e) {
    throw ConfigError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  return run;
}

/// `dir` itself if it holds a manifest, else every immediate subdirectory that does.
inline std::vector<LoadedRun> load_runs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(dir / "manifest.json")) return {load_run(dir)};
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw ConfigError("no completed run under " + dir.string());
  std::vector<LoadedRun> runs;
  for (const auto& p : subdirs) runs.push_back(load_run(p));
  return runs;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct SeriesPoint {
  std::size_t iter = 0;
  double calls = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct Series {
  std::string label;
  std::string evaluated_at;
  std::string metric;  ///< "suboptimality", or "objective" without a reference
  std::size_t seeds = 0;
  std::vector<SeriesPoint> points;
};

/// Mean and range across seeds per optimizer label.
inline std::vector<Series> summarize(const std::vector<LoadedRun>& runs) {
  std::map<std::string, std::vector<const LoadedCell*>> groups;
  std::vector<std::string> order;
  for (const auto& run : runs) {
    for (const auto& c : run.cells) {
      if (!groups.contains(c.label)) order.push_back(c.label);
      groups[c.label].push_back(&c);
    }
  }
  std::vector<Series> out;
  for (const auto& label : order) {
    const auto& cells = groups[label];
    const LoadedCell& first = *cells.front();
    for (const LoadedCell* c : cells) {
      bool same = c->rows.size() == first.rows.size();
      for (std::size_t i = 0; same && i < c->rows.size(); ++i) same = c->rows[i].iter == first.rows[i].iter;
      if (!same) throw ConfigError("mismatched checkpoint grids for optimizer '" + label + "'");
    }
    bool have_gap = true;
    for (const LoadedCell* c : cells) {
      for (const auto& r : c->rows) have_gap = have_gap && std::isfinite(r.suboptimality);
    }
    Series s;
    s.label = label;
    s.evaluated_at = first.evaluated_at;
    s.metric = have_gap ? "suboptimality" : "objective";
    s.seeds = cells.size();
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
      SeriesPoint p;
      p.iter = first.rows[i].iter;
      p.calls = static_cast<double>(p.iter * first.calls_per_iteration);
      p.lo = std::numeric_limits<double>::infinity();
      p.hi = -std::numeric_limits<double>::infinity();
      long double acc = 0.0L;
      for (const LoadedCell* c : cells) {
        const double v = have_gap ? c->rows[i].suboptimality : c->rows[i].objective;
        acc += v;
        p.lo = std::min(p.lo, v);
        p.hi = std::max(p.hi, v);
      }
      p.mean = static_cast<double>(acc / static_cast<long double>(cells.size()));
      s.points.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// One row per oracle-call count, one column per optimizer; "-" marks a gap.
inline std::string format_summary_table(const std::vector<Series>& series) {
  std::set<double> calls;
  for (const auto& s : series) {
    for (const auto& p : s.points) calls.insert(p.calls);
  }
  auto cell_text = [](const SeriesPoint& p) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.4e [%.4e, %.4e]", p.mean, p.lo, p.hi);
    return std::string(buf);
  };
  std::vector<std::size_t> widths;
  std::string header = "oracle_calls";
  std::vector<std::vector<std::string>> table;
  for (double c : calls) {
    std::vector<std::string> row;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", c);
    row.emplace_back(buf);
    for (const auto& s : series) {
      auto it = std::find_if(s.points.begin(), s.points.end(), [&](const SeriesPoint& p) { return p.calls == c; });
      row.push_back(it == s.points.end() ? "-" : cell_text(*it));
    }
    table.push_back(std::move(row));
  }
  std::vector<std::string> head{header};
  for (const auto& s : series) {
    head.push_back(s.label + " (" + s.metric + ", " + s.evaluated_at + ", " + std::to_string(s.seeds) + " seeds)");
  }
  widths.assign(head.size(), 0);
  for (std::size_t j = 0; j < head.size(); ++j) widths[j] = head[j].size();
  for (const auto& row : table) {
    for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], row[j].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out += row[j];
      if (j + 1 < row.size()) out += std::string(widths[j] - row[j].size() + 2, ' ');
    }
    out += '\n';
  };
  emit(head);
  for (const auto& row : table) emit(row);
  return out;
}

/// Static log-log plot: mean line and min-max band per optimizer.
inline std::string render_svg(const std::vector<Series>& series, const std::string& title) {
  constexpr double W = 720, H = 480, left = 80, right = 200, top = 40, bottom = 60;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!(p.mean > 0.0)) continue;
      xmin = std::min(xmin, p.calls);
      xmax = std::max(xmax, p.calls);
      ymin = std::min(ymin, p.lo > 0.0 ? p.lo : p.mean);
      ymax = std::max(ymax, p.hi);
    }
  }
  if (!(xmax > 0.0)) {
    xmin = 1.0;
    xmax = 10.0;
    ymin = 1.0;
    ymax = 10.0;
  }
  double lx0 = std::floor(std::log10(xmin)), lx1 = std::ceil(std::log10(xmax));
  double ly0 = std::floor(std::log10(ymin)), ly1 = std::ceil(std::log10(ymax));
  if (lx1 <= lx0) lx1 = lx0 + 1;
  if (ly1 <= ly0) ly1 = ly0 + 1;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
  auto sy = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  for (double e = lx0; e <= lx1; e += 1.0) {
    const double x = sx(std::pow(10.0, e));
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  for (double e = ly0; e <= ly1; e += 1.0) {
    const double y = sy(std::pow(10.0, e));
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw) + "\" y2=\"" + num(y) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 16) + "\" text-anchor=\"middle\">oracle calls</text>\n";
  const std::string ylabel = series.empty() ? "value" : series.front().metric;
  out += "<text transform=\"translate(18," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" + ylabel +
         "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color = palette[k % 8];
    std::string band_top, band_bottom, line;
    for (const auto& p : s.points) {
      if (!(p.mean > 0.0)) continue;
      line += num(sx(p.calls)) + "," + num(sy(p.mean)) + " ";
      if (p.lo > 0.0) {
        band_top += num(sx(p.calls)) + "," + num(sy(p.hi)) + " ";
        band_bottom = num(sx(p.calls)) + "," + num(sy(p.lo)) + " " + band_bottom;
      }
    }
    if (!band_top.empty()) {
      out += "<polygon points=\"" + band_top + band_bottom + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    out += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(k);
    out += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 36) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(left + pw + 42) + "\" y=\"" + num(ly + 4) + "\">" + s.label + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckRow {
  std::string check;
  std::string optimizer;
  std::string scope;
  std::string status;  ///< pass, FAIL or skipped
  double min_margin = std::numeric_limits<double>::quiet_NaN();
  std::size_t violations = 0;
  std::string note;
};

struct VerifyReport {
  std::vector<CheckRow> rows;
  bool failed = false;
  bool skipped = false;
};

/// Expectation checks average over at least this many seeds.
inline constexpr std::size_t kMinExpectationSeeds = 20;

namespace detail {

inline std::optional<double> json_number(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

inline void add_check(VerifyReport& report, CheckRow row) {
  if (row.status == "FAIL") report.failed = true;
  if (row.status == "skipped") report.skipped = true;
  report.rows.push_back(std::move(row));
}

inline CheckRow bound_row(const std::string& label, const std::string& scope, const RateReport& rr) {
  CheckRow row{std::string("bound ") + std::string(to_string(rr.theorem)), label, scope, "", 0.0, 0, ""};
  if (rr.skipped) {
    row.status = "skipped";
    row.note = rr.note;
  } else {
    row.min_margin = rr.min_margin();
    row.violations = rr.violations();
    row.status = row.violations == 0 ? "pass" : "FAIL";
  }
  return row;
}

}  // namespace detail

/// Runs every applicable check on the UniXGrad cells: the deterministic
/// bound and the regret-to-gap inequality per seed, or the expectation bound
/// on the seed-mean curve for stochastic oracles.
inline VerifyReport verify_runs(const std::vector<LoadedRun>& runs) {
  VerifyReport report;
  for (const auto& run : runs) {
    const Json& constants = run.manifest.at("constants");
    const auto f_star = detail::json_number(run.manifest.at("reference"), "f_star");
    BoundConstants bc;
    bc.diameter = constants.at("D").get<double>();
    bc.smoothness = detail::json_number(constants, "L");
    bc.gradient_bound = detail::json_number(constants, "G");
    bc.noise = detail::json_number(constants, "sigma");
    const bool stochastic = constants.at("stochastic").get<bool>();
    const bool smooth = bc.smoothness.has_value();

    std::map<std::string, std::vector<const LoadedCell*>> groups;
    for (const auto& c : run.cells) {
      if (c.kind == "unixgrad") groups[c.label].push_back(&c);
    }
    for (const auto& [label, cells] : groups) {
      if (!f_star) {
        detail::add_check(report, {"all", label, run.dir.filename().string(), "skipped", std::numeric_limits<double>::quiet_NaN(), 0,
                                   "no reference f*"});
        continue;
      }
      if (!stochastic) {
        const Theorem th = smooth ? Theorem::SmoothDet : Theorem::NonsmoothDet;
        for (const LoadedCell* c : cells) {
          std::vector<CurvePoint> curve;
          for (const auto& r : c->rows) curve.push_back({static_cast<double>(r.iter), r.suboptimality});
          const std::string scope = "seed " + std::to_string(c->seed);
          detail::add_check(report, detail::bound_row(label, scope, check_theorem_bound(curve, th, bc)));

          CheckRow lemma{"regret-to-gap", label, scope, "", std::numeric_limits<double>::infinity(), 0, ""};
          for (const auto& r : c->rows) {
            const double t = static_cast<double>(r.iter);
            const double margin = 2.0 * r.regret_cum / (t * t) - r.suboptimality;
            lemma.min_margin = std::min(lemma.min_margin, margin);
            if (margin < -1e-9) ++lemma.violations;
          }
          lemma.status = lemma.violations == 0 ? "pass" : "FAIL";
          detail::add_check(report, lemma);
        }
      } else {
        const Theorem th = smooth ? Theorem::SmoothStoch : Theorem::NonsmoothStoch;
        const std::string scope = "mean of " + std::to_string(cells.size()) + " seeds";
        if (cells.size() < kMinExpectationSeeds) {
          detail::add_check(report, {std::string("bound ") + std::string(to_string(th)), label, scope, "skipped",
                                     std::numeric_limits<double>::quiet_NaN(), 0,
                                     "expectation checks need >= " + std::to_string(kMinExpectationSeeds) + " seeds"});
          continue;
        }
        const LoadedCell& first = *cells.front();
        std::vector<CurvePoint> curve;
        for (std::size_t i = 0; i < first.rows.size(); ++i) {
          long double acc = 0.0L;
          for (const LoadedCell* c : cells) {
            if (c->rows.size() != first.rows.size() || c->rows[i].iter != first.rows[i].iter) {
              throw ConfigError("mismatched checkpoint grids for optimizer '" + label + "'");
            }
            acc += c->rows[i].suboptimality;
          }
          curve.push_back({static_cast<double>(first.rows[i].iter),
                           static_cast<double>(acc / static_cast<long double>(cells.size()))});
        }
        detail::add_check(report, detail::bound_row(label, scope, check_theorem_bound(curve, th, bc)));
      }
    }
  }
  return report;
}

inline std::string format_verify_table(const VerifyReport& report) {
  std::string out = "check                         optimizer      scope                 status   min_margin    violations  note\n";
  for (const auto& r : report.rows) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%-29s %-14s %-21s %-8s %-13.6g %-11zu %s\n", r.check.c_str(), r.optimizer.c_str(),
                  r.scope.c_str(), r.status.c_str(), r.min_margin, r.violations, r.note.c_str());
    out += buf;
  }
  return out;
}

}  // namespace unixgrad

#endif  // UNIXGRAD_REPORT_HPP
