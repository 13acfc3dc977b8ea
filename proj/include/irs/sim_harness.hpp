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

#pragma once

#include "irs/channel_scenario.hpp"
#include "irs/common.hpp"
#include "irs/power_min.hpp"
#include "irs/reflection_model.hpp"
#include "irs/sum_rate.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace irs {

enum class Problem { power_min, sum_rate, model_error, power_convergence, rate_convergence };
enum class Scheme { proposed, no_selection, random_selection, no_irs };

std::string to_string(Problem p);
std::string to_string(Scheme s);
Problem parse_problem(const std::string& name);
Scheme parse_scheme(const std::string& name);

/// Sweepable scenario parameters.
enum class SweepParam { none, gamma_db, P_db, M, D, L, K, Nt };

std::string to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

/// Returns `cfg` with the swept parameter set to `value`.
SystemConfig apply_sweep(const SystemConfig& cfg, SweepParam param, double value);

struct ExperimentSpec {
  std::string name;
  Problem problem = Problem::power_min;
  SweepParam sweep = SweepParam::none;
  std::vector<double> values;
  int trials = 50;
  std::vector<Scheme> schemes{Scheme::proposed, Scheme::no_selection,
                              Scheme::random_selection, Scheme::no_irs};
  std::string output;
  bool full_scale = false;
  bool timing = false;  // fill the wall-clock column
  int threads = 0;      // 0 = hardware concurrency
  int no_selection_bs = -1;  // -1 = best of all BSs, otherwise that BS index

  void validate() const;
};

/// Experiments available without any configuration.
std::map<std::string, ExperimentSpec> builtin_experiments();

/// Everything a configuration file can set.
struct ScenarioFile {
  SystemConfig system;
  CapacitanceSweep capacitance;
  std::map<std::string, ExperimentSpec> experiments = builtin_experiments();
};

/// Parses a JSON document. Unknown keys are rejected with Error(parse).
ScenarioFile parse_scenario(const std::string& json_text);
ScenarioFile load_scenario(const std::string& path);

/// Sets one key as if it appeared at the top level of the configuration file;
/// `json_value` is a JSON literal.
void override_key(ScenarioFile& file, const std::string& key, const std::string& json_value);

/// Switches a configuration to the large-scale parameter set.
SystemConfig full_scale(const SystemConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string scheme;
  std::string metric;  // metric name including its unit
  double value = 0.0;
  std::optional<double> wall_clock;
};

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                      const std::string& sweep_name);

struct BaselineOptions {
  int no_selection_bs = -1;
  PowerMinOptions power;
  Algorithm2Options rate;
};

/// Total power (W) or sum-rate (bit/s/Hz) of one scheme on one channel draw.
/// `seed` feeds the random initial states and random selections.
double run_baseline(Scheme scheme, Problem problem, const ChannelSet& channels,
                    const SystemConfig& cfg, std::uint64_t seed,
                    const BaselineOptions& options = {});

/// Channels of trial `trial` under master seed `master`.
ChannelSet trial_channels(const SystemConfig& cfg, std::uint64_t master, int trial);

struct ModelErrorOptions {
  int grid_points = 512;
  CapacitanceSweep capacitance;
  Algorithm2Options rate;  // simplified-model design
  int max_outer = 100;
  double tol = 1e-4;
  int max_sweeps = 20;
};

struct ModelErrorResult {
  double simplified_rate = 0.0;  // rate of the simplified-model design
  double realized_rate = 0.0;    // same design realized through the circuit
  double true_rate = 0.0;        // rate of the circuit-model exhaustive design
  double simplified_seconds = 0.0;
  double true_seconds = 0.0;
  int true_iterations = 0;
  std::vector<int> capacitance_index;  // chosen grid point per element
};

/// Evenly spaced capacitance grid over the sweep range.
std::vector<double> capacitance_grid(const CapacitanceSweep& sweep, int points);

struct CircuitDesign {
  BeamformerSet beams;
  std::vector<int> capacitance_index;
  std::vector<double> rate_trace;  // after every outer iteration
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Sum-rate design under the full circuit response. Alternates a WMMSE beam
/// update with element-wise exhaustive search: for each element every grid
/// capacitance is tried, its reflection at every carrier is evaluated from the
/// circuit, and the sum-rate with the beams held fixed is computed; the best
/// capacitance is kept.
CircuitDesign circuit_design(const ChannelSet& channels, const SystemConfig& cfg,
                             const std::vector<double>& capacitances,
                             std::vector<int> start, const ModelErrorOptions& options = {});

/// Compares the simplified-model sum-rate design with `circuit_design` started
/// from random capacitances.
ModelErrorResult model_error_study(const ChannelSet& channels, const SystemConfig& cfg,
                                   std::uint64_t seed, const ModelErrorOptions& options = {});

/// Runs an experiment and returns its rows in (sweep value, trial, scheme)
/// order. Output is independent of the thread count.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg,
                                      const CapacitanceSweep& capacitance = {});

/// Runs an experiment and writes its CSV to `spec.output`.
void run_experiment_to_file(const ExperimentSpec& spec, const SystemConfig& cfg,
                            const CapacitanceSweep& capacitance = {});

/// Human-readable capacitance partition table.
void print_partition(std::ostream& out, const SystemConfig& cfg,
                     const CapacitanceSweep& capacitance);

/// Quick invariant suite; one PASS/FAIL line per check. Returns true when all
/// pass.
bool validate_invariants(std::ostream& out);

}  // namespace irs
