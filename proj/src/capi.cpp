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

#include "irs/sim_harness.hpp"

#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct irs_config {
  irs::ScenarioFile file;
};

struct irs_scenario {
  irs::SystemConfig cfg;
  irs::ChannelSet channels;
  std::uint64_t seed = 0;
};

namespace {

thread_local std::string g_last_error;

irs_status fail(irs_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
irs_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return IRS_OK;
  } catch (const irs::Error& e) {
    return fail(static_cast<irs_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(IRS_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IRS_E_INTERNAL, e.what());
  } catch (...) {
    return fail(IRS_E_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw irs::Error(irs::ErrorCode::invalid_argument, what);
}

void copy_out(const std::string& text, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf && cap == 0) return;
  require(buf != nullptr, "output buffer is null");
  if (cap < text.size() + 1) {
    if (cap > 0) {
      std::memcpy(buf, text.data(), cap - 1);
      buf[cap - 1] = '\0';
    }
    throw irs::Error(static_cast<irs::ErrorCode>(IRS_E_BUFFER_TOO_SMALL),
                     "output buffer too small");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
}

}  // namespace

extern "C" {

const char* irs_version(void) { return "0.1.0"; }

const char* irs_last_error(void) { return g_last_error.c_str(); }

const char* irs_status_name(irs_status status) {
  switch (status) {
    case IRS_OK: return "ok";
    case IRS_E_INVALID_ARGUMENT: return "invalid argument";
    case IRS_E_DOMAIN: return "domain error";
    case IRS_E_INFEASIBLE: return "infeasible";
    case IRS_E_NUMERICAL: return "numerical error";
    case IRS_E_IO: return "i/o error";
    case IRS_E_PARSE: return "parse error";
    case IRS_E_NOT_CONVERGED: return "not converged";
    case IRS_E_BUFFER_TOO_SMALL: return "buffer too small";
    case IRS_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

irs_status irs_config_new(irs_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new irs_config{};
  });
}

irs_status irs_config_parse(const char* json_text, irs_config** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = new irs_config{irs::parse_scenario(json_text)};
  });
}

irs_status irs_config_load(const char* path, irs_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new irs_config{irs::load_scenario(path)};
  });
}

void irs_config_free(irs_config* config) { delete config; }

irs_status irs_config_set(irs_config* config, const char* key, const char* json_value) {
  return guarded([&] {
    require(config && key && json_value, "null argument");
    irs::override_key(config->file, key, json_value);
  });
}

irs_status irs_config_get_number(const irs_config* config, const char* key, double* out) {
  return guarded([&] {
    require(config && key && out, "null argument");
    const irs::SystemConfig& c = config->file.system;
    const std::string k = key;
    if (k == "S") *out = c.S;
    else if (k == "K") *out = c.K;
    else if (k == "Nt") *out = c.Nt;
    else if (k == "M") *out = c.M;
    else if (k == "sigma2") *out = c.sigma2;
    else if (k == "gamma") *out = c.gamma;
    else if (k == "P") *out = c.P;
    else if (k == "L") *out = c.L;
    else if (k == "D") *out = c.D;
    else if (k == "C0") *out = c.C0;
    else if (k == "d0") *out = c.d0;
    else if (k == "seed") *out = static_cast<double>(c.seed);
    else throw irs::Error(irs::ErrorCode::invalid_argument, "unknown numeric key '" + k + "'");
  });
}

irs_status irs_experiment_names(const irs_config* config, char* buf, size_t cap,
                                size_t* needed) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    std::string text;
    for (const auto& [name, spec] : config->file.experiments) text += name + "\n";
    copy_out(text, buf, cap, needed);
  });
}

void irs_run_options_init(irs_run_options* options) {
  if (options) *options = irs_run_options{nullptr, 0, 0, 0, 0, 0, 0};
}

irs_status irs_run_experiment(const irs_config* config, const char* experiment,
                              const irs_run_options* options) {
  return guarded([&] {
    require(config && experiment, "null argument");
    const auto it = config->file.experiments.find(experiment);
    if (it == config->file.experiments.end()) {
      throw irs::Error(irs::ErrorCode::invalid_argument,
                       std::string("unknown experiment '") + experiment + "'");
    }
    irs::ExperimentSpec spec = it->second;
    irs::SystemConfig cfg = config->file.system;
    if (options) {
      if (options->output) spec.output = options->output;
      if (options->override_seed) cfg.seed = options->seed;
      if (options->trials > 0) spec.trials = options->trials;
      if (options->trials < 0) require(false, "trials must be positive");
      if (options->full_scale) {
        spec.full_scale = true;
        if (options->trials == 0) spec.trials = 200;
      }
      if (options->timing) spec.timing = true;
      if (options->threads > 0) spec.threads = options->threads;
    }
    irs::run_experiment_to_file(spec, cfg, config->file.capacitance);
  });
}

irs_status irs_partition_table(const irs_config* config, char* buf, size_t cap,
                               size_t* needed) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    std::ostringstream os;
    irs::print_partition(os, config->file.system, config->file.capacitance);
    copy_out(os.str(), buf, cap, needed);
  });
}

irs_status irs_validate(char* buf, size_t cap, size_t* needed, int* all_passed) {
  return guarded([&] {
    std::ostringstream os;
    const bool ok = irs::validate_invariants(os);
    if (all_passed) *all_passed = ok ? 1 : 0;
    copy_out(os.str(), buf, cap, needed);
  });
}

irs_status irs_reflection_coefficient(double L1, double L2, double R, double Z0,
                                      double capacitance, double frequency, double* re,
                                      double* im) {
  return guarded([&] {
    require(re && im, "null output");
    irs::CircuitParams p{L1, L2, R, Z0};
    p.validate();
    const irs::cdouble t = irs::reflection_coefficient(p, capacitance, frequency);
    *re = t.real();
    *im = t.imag();
  });
}

irs_status irs_scenario_new(const irs_config* config, int trial, irs_scenario** out) {
  return guarded([&] {
    require(config && out, "null argument");
    require(trial >= 0, "trial must be nonnegative");
    auto* sc = new irs_scenario{};
    try {
      sc->cfg = config->file.system;
      sc->cfg.validate();
      sc->seed = irs::derive_seed(sc->cfg.seed, static_cast<std::uint64_t>(trial));
      sc->channels = irs::trial_channels(sc->cfg, sc->cfg.seed, trial);
    } catch (...) {
      delete sc;
      throw;
    }
    *out = sc;
  });
}

void irs_scenario_free(irs_scenario* scenario) { delete scenario; }

irs_status irs_scenario_evaluate(const irs_scenario* scenario, const char* problem,
                                 const char* scheme, double* metric) {
  return guarded([&] {
    require(scenario && problem && scheme && metric, "null argument");
    *metric = irs::run_baseline(irs::parse_scheme(scheme), irs::parse_problem(problem),
                                scenario->channels, scenario->cfg, scenario->seed);
  });
}

}  // extern "C"
