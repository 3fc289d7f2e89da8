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

// unixgrad: run experiments, compare runs, verify convergence bounds and
// generate datasets.
//
// Exit codes: 0 success, 1 failed check or I/O error, 2 bad configuration or
// usage, 3 reference solve failed (outputs still written), 4 --strict verify
// with checks that could not run.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "unixgrad.hpp"

namespace fs = std::filesystem;
using namespace unixgrad;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitReference = 3;
constexpr int kExitStrict = 4;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig cfg = parse_config_text(read_text(config_path));
  const fs::path dir = out_dir.empty() ? default_output_dir(cfg) : fs::path(out_dir);
  const fs::path base = config_path == "-" ? fs::path() : fs::path(config_path).parent_path();
  const ExperimentResult result = run_experiment(cfg, base);
  write_experiment(result, dir);
  std::cout << "wrote " << result.cells.size() << " run(s) to " << dir.string() << "\n";
  if (!result.reference) {
    std::cerr << "reference solve failed: " << result.reference_error << "\n";
    return kExitReference;
  }
  for (const auto& c : result.cells) {
    if (!c.valid) std::cerr << "warning: " << c.label << " seed " << c.seed << " aborted: " << c.error << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& dir, const std::string& svg_path) {
  const auto runs = load_runs(dir);
  const auto series = summarize(runs);
  std::cout << format_summary_table(series);
  const fs::path out = svg_path.empty() ? fs::path(dir) / "compare.svg" : fs::path(svg_path);
  write_text_file(out, render_svg(series, fs::path(dir).filename().string()));
  std::cout << "plot: " << out.string() << "\n";
  return 0;
}

int cmd_verify(const std::string& dir, bool strict) {
  const VerifyReport report = verify_runs(load_runs(dir));
  std::cout << format_verify_table(report);
  if (report.rows.empty()) std::cout << "no applicable checks\n";
  if (report.failed) return kExitCheckFailed;
  if (report.skipped && strict) return kExitStrict;
  return 0;
}

struct GenOptions {
  std::string kind;
  std::string out = "-";
  std::string input;
  std::size_t n = 500;
  std::size_t d = 100;
  double entry_sigma = 1.0;
  double noise_variance = 1e-3;
  double radius = 1.0;
  std::string placement = "boundary";
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool no_scale = false;
};

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int cmd_gen_data(const GenOptions& o) {
  if (o.kind == "synthetic-ls") {
    LsGeneratorOptions opt;
    opt.n = o.n;
    opt.d = o.d;
    opt.entry_sigma = o.entry_sigma;
    opt.noise_variance = o.noise_variance;
    opt.radius = o.radius;
    opt.placement = detail::parse_placement(o.placement);
    opt.seed = o.seed;
    const auto [data, problem] = generate_ls(opt);
    SparseDataset ds;
    ds.dim = static_cast<std::int64_t>(o.d);
    for (Eigen::Index i = 0; i < data.A.rows(); ++i) {
      SparseRow row;
      row.label = data.b[i];
      for (Eigen::Index j = 0; j < data.A.cols(); ++j) row.features.emplace_back(j + 1, data.A(i, j));
      ds.rows.push_back(std::move(row));
    }
    emit(o.out, serialize_libsvm(ds));
    return 0;
  }
  if (o.input.empty()) throw ConfigError("--input is required for --kind libsvm");
  if (o.out == "-") throw ConfigError("--out must name a file prefix for --kind libsvm");
  const SparseDataset all = read_libsvm(o.input);
  auto [train, test] = split(all, o.train_fraction, o.seed);
  if (!o.no_scale) {
    const ColumnScaler scaler = ColumnScaler::fit(train);
    train = scaler.transform(train);
    test = scaler.transform(test);
  }
  write_text_file(o.out + ".train", serialize_libsvm(train));
  write_text_file(o.out + ".test", serialize_libsvm(test));
  std::cout << "train " << train.size() << " rows, test " << test.size() << " rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UniXGrad experiment runner"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config or a run manifest");
  run->add_option("--config", config_path, "Config or manifest.json path ('-' for stdin)")->required();
  run->add_option("--out", run_out, "Output directory (default $UNIXGRAD_OUTPUT_DIR/<name> or runs/<name>)");

  std::string compare_dir, svg_path;
  auto* compare = app.add_subcommand("compare", "Summarize runs across seeds and plot them");
  compare->add_option("dir", compare_dir, "Run directory, or a directory of runs")->required();
  compare->add_option("--out", svg_path, "SVG path (default <dir>/compare.svg)");

  std::string verify_dir;
  bool strict = false;
  auto* verify = app.add_subcommand("verify", "Check convergence bounds on completed runs");
  verify->add_option("dir", verify_dir, "Run directory, or a directory of runs")->required();
  verify->add_flag("--strict", strict, "Fail (exit 4) when any check had to be skipped");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate or preprocess a dataset in LIBSVM format");
  gen_cmd->add_option("--kind", gen.kind, "synthetic-ls or libsvm")
      ->required()
      ->check(CLI::IsMember({"synthetic-ls", "libsvm"}));
  gen_cmd->add_option("--out", gen.out, "Output file ('-' for stdout); file prefix for libsvm");
  gen_cmd->add_option("--input", gen.input, "LIBSVM input for --kind libsvm ('-' for stdin, .gz accepted)");
  gen_cmd->add_option("--n", gen.n, "Rows");
  gen_cmd->add_option("--d", gen.d, "Columns");
  gen_cmd->add_option("--entry-sigma", gen.entry_sigma, "Standard deviation of the entries of A");
  gen_cmd->add_option("--noise-variance", gen.noise_variance, "Variance of the noise in b");
  gen_cmd->add_option("--radius", gen.radius, "Ball radius used to place the optimum");
  gen_cmd->add_option("--placement", gen.placement, "boundary or interior")
      ->check(CLI::IsMember({"boundary", "interior"}));
  gen_cmd->add_option("--seed", gen.seed, "Generator or split seed");
  gen_cmd->add_option("--train-fraction", gen.train_fraction, "Training share for --kind libsvm");
  gen_cmd->add_flag("--no-scale", gen.no_scale, "Keep raw feature values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, run_out);
    if (*compare) return cmd_compare(compare_dir, svg_path);
    if (*verify) return cmd_verify(verify_dir, strict);
    return cmd_gen_data(gen);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ReferenceFailure& e) {
    std::cerr << "reference failure: " << e.what() << "\n";
    return kExitReference;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
