// SPDX-License-Identifier: Apache-2.0
//
// irs-sim: frequency-selective IRS reflection modelling and joint beamforming
// Copyright (C) 2026 The irs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "irs_sim.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using ConfigPtr = std::unique_ptr<irs_config, decltype(&irs_config_free)>;

int report(irs_status status, const std::string& context) {
  std::cerr << "irs-sim: " << context << ": " << irs_status_name(status);
  const std::string detail = irs_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << '\n';
  return 1;
}

// Loads the file when given, otherwise starts from the built-in defaults.
bool open_config(const std::string& path, ConfigPtr& out) {
  irs_config* raw = nullptr;
  const irs_status st = path.empty() ? irs_config_new(&raw) : irs_config_load(path.c_str(), &raw);
  if (st != IRS_OK) {
    report(st, path.empty() ? "default configuration" : path);
    return false;
  }
  out.reset(raw);
  return true;
}

bool apply_sets(irs_config* cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "irs-sim: --set expects key=value, got '" << kv << "'\n";
      return false;
    }
    const std::string key = kv.substr(0, eq);
    const irs_status st = irs_config_set(cfg, key.c_str(), kv.substr(eq + 1).c_str());
    if (st != IRS_OK) {
      report(st, "--set " + key);
      return false;
    }
  }
  return true;
}

std::string fetch(irs_status (*fn)(const irs_config*, char*, size_t, size_t*),
                  const irs_config* cfg, irs_status& st) {
  size_t needed = 0;
  st = fn(cfg, nullptr, 0, &needed);
  if (st != IRS_OK) return {};
  std::string text(needed, '\0');
  st = fn(cfg, text.data(), text.size(), &needed);
  text.resize(needed ? needed - 1 : 0);
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-band IRS beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string experiment;
  std::string out_path;
  std::uint64_t seed = 0;
  bool full = false;
  bool timing = false;
  int trials = 0;
  int threads = 0;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment and write its CSV");
  run->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--experiment", experiment, "Experiment name")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_flag("--full-scale", full, "Use the large-scale configuration");
  run->add_option("--trials", trials, "Trials per sweep value")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--timing", timing, "Record wall-clock seconds per row");
  run->add_option("--set", sets, "Override a configuration key: key=json-value");

  auto* part = app.add_subcommand("partition", "Print the capacitance partition table");
  part->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  part->add_option("--set", sets, "Override a configuration key: key=json-value");

  auto* list = app.add_subcommand("list", "List the available experiments");
  list->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Run the invariant suite");

  CLI11_PARSE(app, argc, argv);

  if (*validate) {
    size_t needed = 0;
    int ok = 0;
    irs_status st = irs_validate(nullptr, 0, &needed, &ok);
    if (st != IRS_OK) return report(st, "validate");
    std::string text(needed, '\0');
    st = irs_validate(text.data(), text.size(), &needed, &ok);
    if (st != IRS_OK) return report(st, "validate");
    std::cout << text.c_str();
    return ok ? 0 : 2;
  }

  ConfigPtr cfg(nullptr, &irs_config_free);
  if (!open_config(config_path, cfg)) return 1;
  if (!apply_sets(cfg.get(), sets)) return 1;

  if (*list) {
    irs_status st;
    const std::string names = fetch(&irs_experiment_names, cfg.get(), st);
    if (st != IRS_OK) return report(st, "list");
    std::cout << names;
    return 0;
  }

  if (*part) {
    irs_status st;
    const std::string table = fetch(&irs_partition_table, cfg.get(), st);
    if (st != IRS_OK) return report(st, "partition");
    std::cout << table;
    return 0;
  }

  irs_run_options opts;
  irs_run_options_init(&opts);
  opts.output = out_path.c_str();
  opts.override_seed = seed_opt->count() > 0;
  opts.seed = seed;
  opts.trials = trials;
  opts.full_scale = full;
  opts.timing = timing;
  opts.threads = threads;
  const irs_status st = irs_run_experiment(cfg.get(), experiment.c_str(), &opts);
  if (st != IRS_OK) return report(st, "run " + experiment);
  return 0;
}
