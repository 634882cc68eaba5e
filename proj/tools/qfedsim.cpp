// Copyright 2026 The qfedsim Authors.
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfed/config.hpp"
#include "qfed/error.hpp"
#include "qfed/metrics_io.hpp"
#include "qfed/orchestrator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// --out wins, then $QFED_OUT_DIR, then the built-in default.
fs::path output_dir(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QFED_OUT_DIR"); env && *env) return env;
  return fallback;
}

qfed::ExperimentConfig load(const std::string& path, int workers) {
  auto cfg = qfed::load_config(path);
  if (workers > 0) cfg.workers = workers;
  cfg.validate();
  return cfg;
}

struct RunSummary {
  std::string name;
  qfed::fl::ExperimentResult result;
  double wall = 0.0;
  int events = 0;
  double modeled = 0.0;
};

RunSummary summarize(std::string name, qfed::fl::ExperimentResult result) {
  RunSummary s{std::move(name), std::move(result)};
  for (const auto& m : s.result.rounds) {
    s.wall += m.wall_clock;
    s.events += m.comm_events;
    s.modeled += m.modeled_total;
  }
  return s;
}

void print_comparison(const std::vector<RunSummary>& runs) {
  std::cout << std::left << std::setw(28) << "metric";
  for (const auto& r : runs) std::cout << std::setw(18) << r.name;
  std::cout << '\n';
  auto line = [&](const std::string& label, auto getter) {
    std::cout << std::setw(28) << label;
    for (const auto& r : runs) std::cout << std::setw(18) << getter(r);
    std::cout << '\n';
  };
  line("trainings", [](const RunSummary& r) { return r.result.total_trainings; });
  line("comm_events", [](const RunSummary& r) { return r.events; });
  line("modeled_T_total", [](const RunSummary& r) { return r.modeled; });
  line("wall_clock_s", [](const RunSummary& r) { return r.wall; });
  line("final_server_test_acc", [](const RunSummary& r) { return r.result.rounds.back().server_test_acc; });
  line("final_server_val_loss", [](const RunSummary& r) { return r.result.rounds.back().server_val_loss; });
  line("final_device_train_acc",
       [](const RunSummary& r) { return r.result.rounds.back().avg_device_train_acc; });
  line("final_device_test_acc",
       [](const RunSummary& r) { return r.result.rounds.back().avg_device_test_acc; });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfedsim: federated training of variational quantum classifiers"};
  app.require_subcommand(1);

  std::string config_path, out_flag, a_path, b_path, in_path, report_out, columns, title;
  int workers = 0;
  bool traces = false;

  auto* run = app.add_subcommand("run", "Run one experiment and write metrics.csv/summary.json");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_flag, "Output directory (default $QFED_OUT_DIR or ./out)");
  run->add_option("--workers", workers, "Worker threads for device training");
  run->add_flag("--device-traces", traces, "Also write devices.csv");

  auto* cmp = app.add_subcommand("compare", "Run two configs and print a side-by-side summary");
  cmp->add_option("--a", a_path, "First config")->required();
  cmp->add_option("--b", b_path, "Second config")->required();
  cmp->add_option("--out", out_flag, "Output directory; results go to <out>/a and <out>/b");
  cmp->add_option("--workers", workers, "Worker threads for device training");

  auto* rep = app.add_subcommand("report", "Render metric columns of a metrics.csv as an SVG chart");
  rep->add_option("--in", in_path, "metrics.csv")->required();
  rep->add_option("--out", report_out, "Output SVG")->required();
  rep->add_option("--columns", columns, "Comma-separated columns")
      ->default_val("server_val_acc,server_test_acc,avg_device_train_acc,avg_device_test_acc");
  rep->add_option("--title", title, "Chart title")->default_val("qfedsim metrics");

  auto* val = app.add_subcommand("validate-config", "Check a config file and print its canonical form");
  val->add_option("--config", config_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*val) {
      std::cout << qfed::dump_config(qfed::load_config(config_path)) << '\n';
      return kExitOk;
    }
    if (*run) {
      const auto cfg = load(config_path, workers);
      const auto out = output_dir(out_flag, "out");
      const auto result = qfed::fl::run_experiment(cfg);
      qfed::io::persist_metrics(result, cfg, out, traces);
      std::cout << "wrote " << (out / "metrics.csv").string() << " (" << result.rounds.size()
                << " rounds, " << result.total_trainings << " trainings)\n";
      return kExitOk;
    }
    if (*cmp) {
      const auto cfg_a = load(a_path, workers);
      const auto cfg_b = load(b_path, workers);
      std::vector<RunSummary> runs;
      runs.push_back(summarize("a:" + qfed::to_string(cfg_a.protocol), qfed::fl::run_experiment(cfg_a)));
      runs.push_back(summarize("b:" + qfed::to_string(cfg_b.protocol), qfed::fl::run_experiment(cfg_b)));
      const auto out = output_dir(out_flag, "");
      if (!out.empty()) {
        qfed::io::persist_metrics(runs[0].result, cfg_a, out / "a");
        qfed::io::persist_metrics(runs[1].result, cfg_b, out / "b");
      }
      print_comparison(runs);
      return kExitOk;
    }
    if (*rep) {
      const auto table = qfed::io::read_metrics_csv(in_path);
      const auto svg = qfed::io::render_svg(table, split_list(columns), title);
      std::ofstream os(report_out, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + report_out);
      os << svg;
      return kExitOk;
    }
  } catch (const qfed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
