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

#include "irs/sim_harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace irs {

using nlohmann::json;

namespace {

template <typename E>
struct Names {
  E value;
  const char* name;
};

constexpr Names<Problem> kProblems[] = {
    {Problem::power_min, "power_min"},
    {Problem::sum_rate, "sum_rate"},
    {Problem::model_error, "model_error"},
    {Problem::power_convergence, "power_convergence"},
    {Problem::rate_convergence, "rate_convergence"},
};

constexpr Names<Scheme> kSchemes[] = {
    {Scheme::proposed, "proposed"},
    {Scheme::no_selection, "no_selection"},
    {Scheme::random_selection, "random_selection"},
    {Scheme::no_irs, "no_irs"},
};

constexpr Names<SweepParam> kSweeps[] = {
    {SweepParam::none, "none"}, {SweepParam::gamma_db, "gamma_db"},
    {SweepParam::P_db, "P_db"}, {SweepParam::M, "M"},
    {SweepParam::D, "D"},       {SweepParam::L, "L"},
    {SweepParam::K, "K"},       {SweepParam::Nt, "Nt"},
};

template <typename E, std::size_t N>
std::string name_of(const Names<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
E value_of(const Names<E> (&table)[N], const std::string& name, const char* what) {
  for (const auto& e : table) {
    if (name == e.name) return e.value;
  }
  throw Error(ErrorCode::invalid_argument, std::string("unknown ") + what + " '" + name + "'");
}

}  // namespace

std::string to_string(Problem p) { return name_of(kProblems, p); }
std::string to_string(Scheme s) { return name_of(kSchemes, s); }
std::string to_string(SweepParam p) { return name_of(kSweeps, p); }
Problem parse_problem(const std::string& name) { return value_of(kProblems, name, "problem"); }
Scheme parse_scheme(const std::string& name) { return value_of(kSchemes, name, "scheme"); }
SweepParam parse_sweep_param(const std::string& name) {
  return value_of(kSweeps, name, "sweep parameter");
}

SystemConfig apply_sweep(const SystemConfig& cfg, SweepParam param, double value) {
  SystemConfig out = cfg;
  auto as_count = [&](const char* what) {
    if (!(value >= 0.0) || value != std::floor(value)) {
      throw Error(ErrorCode::invalid_argument, std::string(what) + " sweep values must be integers");
    }
    return static_cast<int>(value);
  };
  switch (param) {
    case SweepParam::none: break;
    case SweepParam::gamma_db: out.gamma = db_to_linear(value); break;
    case SweepParam::P_db: out.P = db_to_linear(value); break;
    case SweepParam::M: out.M = as_count("M"); break;
    case SweepParam::D: out.D = value; break;
    case SweepParam::L: out.L = value; break;
    case SweepParam::K: out.K = as_count("K"); break;
    case SweepParam::Nt: out.Nt = as_count("Nt"); break;
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "experiment needs trials >= 1");
  if (sweep != SweepParam::none && values.empty()) {
    throw Error(ErrorCode::invalid_argument, "experiment '" + name + "' sweeps without values");
  }
  if (schemes.empty() && (problem == Problem::power_min || problem == Problem::sum_rate)) {
    throw Error(ErrorCode::invalid_argument, "experiment '" + name + "' lists no schemes");
  }
  if (threads < 0) throw Error(ErrorCode::invalid_argument, "threads must be >= 0");
}

std::map<std::string, ExperimentSpec> builtin_experiments() {
  std::map<std::string, ExperimentSpec> out;
  auto add = [&](const std::string& name, Problem p, SweepParam sw, std::vector<double> v) {
    ExperimentSpec e;
    e.name = name;
    e.problem = p;
    e.sweep = sw;
    e.values = std::move(v);
    e.output = name + ".csv";
    out[name] = e;
  };
  add("power_vs_gamma", Problem::power_min, SweepParam::gamma_db, {0, 5, 10});
  add("power_vs_m", Problem::power_min, SweepParam::M, {8, 16, 32});
  add("power_vs_d", Problem::power_min, SweepParam::D, {1, 2, 4, 8});
  add("power_vs_l", Problem::power_min, SweepParam::L, {40, 52, 64});
  add("rate_vs_power", Problem::sum_rate, SweepParam::P_db, {-10, -5, 0});
  add("rate_vs_m", Problem::sum_rate, SweepParam::M, {8, 16, 32});
  add("rate_vs_d", Problem::sum_rate, SweepParam::D, {1, 2, 4, 8});
  add("rate_vs_l", Problem::sum_rate, SweepParam::L, {40, 52, 64});
  add("model_error", Problem::model_error, SweepParam::P_db, {-10, -5, 0});
  add("power_convergence", Problem::power_convergence, SweepParam::none, {});
  add("rate_convergence", Problem::rate_convergence, SweepParam::none, {});
  out["model_error"].trials = 10;
  out["power_convergence"].trials = 10;
  out["rate_convergence"].trials = 10;
  return out;
}

SystemConfig full_scale(const SystemConfig& cfg) {
  SystemConfig out = cfg;
  out.K = 3;
  out.Nt = 16;
  out.M = 64;
  return out;
}

// ---------------------------------------------------------------------------
// configuration files

namespace {

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
  throw Error(ErrorCode::parse, "unknown configuration key '" + where + key + "'");
}

template <typename T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, "configuration key '" + key + "': " + e.what());
  }
}

void apply_circuit(CircuitParams& c, const json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::parse, "'circuit' must be an object");
  for (const auto& [key, v] : obj.items()) {
    if (key == "L1") c.L1 = get<double>(v, key);
    else if (key == "L2") c.L2 = get<double>(v, key);
    else if (key == "R") c.R = get<double>(v, key);
    else if (key == "Z0") c.Z0 = get<double>(v, key);
    else bad_key("circuit.", key);
  }
}

void apply_capacitance(CapacitanceSweep& c, const json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::parse, "'capacitance' must be an object");
  for (const auto& [key, v] : obj.items()) {
    if (key == "c_min") c.c_min = get<double>(v, key);
    else if (key == "c_max") c.c_max = get<double>(v, key);
    else if (key == "points") c.points = get<int>(v, key);
    else if (key == "span_fraction") c.span_fraction = get<double>(v, key);
    else if (key == "max_overlap") c.max_overlap = get<double>(v, key);
    else bad_key("capacitance.", key);
  }
}

void apply_experiment(ExperimentSpec& e, const json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::parse, "experiment entries must be objects");
  for (const auto& [key, v] : obj.items()) {
    if (key == "problem") e.problem = parse_problem(get<std::string>(v, key));
    else if (key == "sweep") e.sweep = parse_sweep_param(get<std::string>(v, key));
    else if (key == "values") e.values = get<std::vector<double>>(v, key);
    else if (key == "trials") e.trials = get<int>(v, key);
    else if (key == "schemes") {
      e.schemes.clear();
      for (const auto& s : get<std::vector<std::string>>(v, key)) e.schemes.push_back(parse_scheme(s));
    } else if (key == "output") e.output = get<std::string>(v, key);
    else if (key == "full_scale") e.full_scale = get<bool>(v, key);
    else if (key == "timing") e.timing = get<bool>(v, key);
    else if (key == "threads") e.threads = get<int>(v, key);
    else if (key == "no_selection_bs") e.no_selection_bs = get<int>(v, key);
    else bad_key("experiments." + e.name + ".", key);
  }
}

void apply_top_level(ScenarioFile& f, const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "configuration must be a JSON object");
  SystemConfig& c = f.system;
  for (const auto& [key, v] : doc.items()) {
    if (key == "S") c.S = get<int>(v, key);
    else if (key == "K") c.K = get<int>(v, key);
    else if (key == "Nt") c.Nt = get<int>(v, key);
    else if (key == "M") c.M = get<int>(v, key);
    else if (key == "sigma2") c.sigma2 = get<double>(v, key);
    else if (key == "sigma2_dbm") c.sigma2 = dbm_to_watts(get<double>(v, key));
    else if (key == "gamma") c.gamma = get<double>(v, key);
    else if (key == "gamma_db") c.gamma = db_to_linear(get<double>(v, key));
    else if (key == "P") c.P = get<double>(v, key);
    else if (key == "P_db") c.P = db_to_linear(get<double>(v, key));
    else if (key == "L") c.L = get<double>(v, key);
    else if (key == "D") c.D = get<double>(v, key);
    else if (key == "C0") c.C0 = get<double>(v, key);
    else if (key == "C0_db") c.C0 = db_to_linear(get<double>(v, key));
    else if (key == "d0") c.d0 = get<double>(v, key);
    else if (key == "alpha_bi") c.alpha_bi = get<double>(v, key);
    else if (key == "alpha_iu") c.alpha_iu = get<double>(v, key);
    else if (key == "alpha_bu") c.alpha_bu = get<double>(v, key);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "redraw_geometry") c.redraw_geometry = get<bool>(v, key);
    else if (key == "frequencies") c.frequencies.frequencies = get<std::vector<double>>(v, key);
    else if (key == "circuit") apply_circuit(c.circuit, v);
    else if (key == "capacitance") apply_capacitance(f.capacitance, v);
    else if (key == "experiments") {
      if (!v.is_object()) throw Error(ErrorCode::parse, "'experiments' must be an object");
      for (const auto& [name, body] : v.items()) {
        auto it = f.experiments.find(name);
        if (it == f.experiments.end()) {
          ExperimentSpec e;
          e.name = name;
          e.output = name + ".csv";
          it = f.experiments.emplace(name, e).first;
        }
        apply_experiment(it->second, body);
      }
    } else {
      bad_key("", key);
    }
  }
}

}  // namespace

ScenarioFile parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("invalid JSON: ") + e.what());
  }
  ScenarioFile f;
  apply_top_level(f, doc);
  return f;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void override_key(ScenarioFile& file, const std::string& key, const std::string& json_value) {
  json v;
  try {
    v = json::parse(json_value);
  } catch (const json::parse_error&) {
    v = json_value;  // bare words are taken as strings
  }
  json doc = json::object();
  doc[key] = v;
  apply_top_level(file, doc);
}

// ---------------------------------------------------------------------------
// baselines

ChannelSet trial_channels(const SystemConfig& cfg, std::uint64_t master, int trial) {
  Rng rng(derive_seed(master, static_cast<std::uint64_t>(trial)));
  Geometry geometry;
  if (cfg.redraw_geometry) {
    geometry = place_scenario(cfg, rng);
  } else {
    Rng fixed(derive_seed(master, std::numeric_limits<std::uint64_t>::max()));
    geometry = place_scenario(cfg, fixed);
  }
  return draw_channels(cfg, geometry, rng);
}

namespace {

IMat random_one_hot(int S, int M, Rng& rng) {
  IMat A = IMat::Zero(S, M);
  std::uniform_int_distribution<int> pick(0, S - 1);
  for (int m = 0; m < M; ++m) A(pick(rng), m) = 1;
  return A;
}

std::vector<int> no_selection_candidates(int S, int fixed_bs) {
  if (fixed_bs >= 0) {
    if (fixed_bs >= S) throw Error(ErrorCode::invalid_argument, "no_selection_bs out of range");
    return {fixed_bs};
  }
  std::vector<int> all(S);
  for (int s = 0; s < S; ++s) all[s] = s;
  return all;
}

double power_baseline(Scheme scheme, const ChannelSet& ch, const SystemConfig& cfg,
                      std::uint64_t seed, const BaselineOptions& opt) {
  const int S = ch.num_bs();
  const int M = ch.num_elements();
  switch (scheme) {
    case Scheme::proposed:
      return run_algorithm1(ch, cfg, opt.power).report.total_power;
    case Scheme::no_selection: {
      double best = std::numeric_limits<double>::infinity();
      for (int b : no_selection_candidates(S, opt.no_selection_bs)) {
        ReflectionState st(S, M);
        st.a.row(b).setOnes();
        best = std::min(best, optimize_with_fixed_selection(ch, st, cfg, opt.power).report.total_power);
      }
      return best;
    }
    case Scheme::random_selection: {
      Rng rng(derive_seed(seed, 2));
      ReflectionState st(S, M);
      st.a = random_one_hot(S, M, rng);
      return optimize_with_fixed_selection(ch, st, cfg, opt.power).report.total_power;
    }
    case Scheme::no_irs: {
      const ReflectionState st(S, M);
      return optimize_with_fixed_selection(without_irs(ch), st, cfg, opt.power).report.total_power;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown scheme");
}

double rate_baseline(Scheme scheme, const ChannelSet& ch, const SystemConfig& cfg,
                     std::uint64_t seed, const BaselineOptions& opt) {
  const int S = ch.num_bs();
  const int M = ch.num_elements();
  Rng init_rng(derive_seed(seed, 1));
  const ReflectionState init = random_reflection_state(S, M, init_rng);
  Algorithm2Options fixed = opt.rate;
  fixed.mode = SelectionMode::fixed;
  switch (scheme) {
    case Scheme::proposed: {
      Algorithm2Options joint = opt.rate;
      joint.mode = SelectionMode::joint;
      return run_algorithm2(ch, cfg, init, joint).sum_rate;
    }
    case Scheme::no_selection: {
      double best = -std::numeric_limits<double>::infinity();
      for (int b : no_selection_candidates(S, opt.no_selection_bs)) {
        ReflectionState st = init;
        st.a.setZero();
        st.a.row(b).setOnes();
        best = std::max(best, run_algorithm2(ch, cfg, st, fixed).sum_rate);
      }
      return best;
    }
    case Scheme::random_selection: {
      Rng rng(derive_seed(seed, 2));
      ReflectionState st = init;
      st.a = random_one_hot(S, M, rng);
      return run_algorithm2(ch, cfg, st, fixed).sum_rate;
    }
    case Scheme::no_irs: {
      Algorithm2Options plain = opt.rate;
      plain.optimize_reflection = false;
      return run_algorithm2(without_irs(ch), cfg, ReflectionState(S, M), plain).sum_rate;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown scheme");
}

}  // namespace

double run_baseline(Scheme scheme, Problem problem, const ChannelSet& channels,
                    const SystemConfig& cfg, std::uint64_t seed,
                    const BaselineOptions& options) {
  switch (problem) {
    case Problem::power_min: return power_baseline(scheme, channels, cfg, seed, options);
    case Problem::sum_rate: return rate_baseline(scheme, channels, cfg, seed, options);
    default:
      throw Error(ErrorCode::invalid_argument, "baselines exist for power_min and sum_rate only");
  }
}

// ---------------------------------------------------------------------------
// model-error study

std::vector<double> capacitance_grid(const CapacitanceSweep& sweep, int points) {
  if (points < 2 || !(sweep.c_max > sweep.c_min) || !(sweep.c_min > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "capacitance grid needs >= 2 points over a positive range");
  }
  std::vector<double> caps(points);
  for (int g = 0; g < points; ++g) {
    caps[g] = sweep.c_min + (sweep.c_max - sweep.c_min) * g / (points - 1);
  }
  return caps;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

CVec circuit_response(const SystemConfig& cfg, double capacitance) {
  CVec t(cfg.frequencies.size());
  for (std::size_t s = 0; s < cfg.frequencies.size(); ++s) {
    t(s) = reflection_coefficient(cfg.circuit, capacitance, cfg.frequencies.frequencies[s]);
  }
  return t;
}

double rate_of(const ChannelSet& ch, const std::vector<CVec>& th, const BeamformerSet& beams,
               double sigma2) {
  double r = 0.0;
  for (int s = 0; s < ch.num_bs(); ++s) {
    const CMat H = effective_channels(ch, th[s], s);
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
      r += std::log2(1.0 + sinr_from_channels(H, beams.W[s], sigma2, static_cast<int>(k)));
    }
  }
  return r;
}

// Sum-rate from the matrices of received amplitudes g[s](k, j) = h_k^H w_j.
double rate_from_gains(const std::vector<CMat>& g, double sigma2) {
  double r = 0.0;
  for (const CMat& gs : g) {
    for (Eigen::Index k = 0; k < gs.rows(); ++k) {
      const double total = gs.row(k).squaredNorm() + sigma2;
      const double signal = std::norm(gs(k, k));
      r += std::log2(total / (total - signal));
    }
  }
  return r;
}

// Capacitance realizing a simplified-model design: the serving band's phase
// is matched inside its tunable range; unselected elements take the gray-set
// value closest to unit reflection on every band.
std::vector<int> realize_design(const ReflectionState& st, const SystemConfig& cfg,
                                const std::vector<double>& caps,
                                const CapacitancePartition& part) {
  const int S = st.num_bs();
  std::vector<CVec> table(caps.size());
  for (std::size_t g = 0; g < caps.size(); ++g) table[g] = circuit_response(cfg, caps[g]);
  std::vector<int> idx(st.num_elements(), 0);
  for (int m = 0; m < st.num_elements(); ++m) {
    int serving = -1;
    for (int s = 0; s < S; ++s) {
      if (st.a(s, m) == 1) serving = s;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < caps.size(); ++g) {
      double v = 0.0;
      if (serving >= 0) {
        if (!part.tunable[serving].contains(caps[g])) continue;
        v = std::abs(std::arg(table[g](serving) * std::polar(1.0, -st.phi(serving, m))));
      } else {
        bool gray = part.gray.empty();
        for (const auto& iv : part.gray) gray = gray || iv.contains(caps[g]);
        if (!gray) continue;
        for (int s = 0; s < S; ++s) v += std::norm(table[g](s) - 1.0);
      }
      if (v < best) {
        best = v;
        idx[m] = static_cast<int>(g);
      }
    }
  }
  return idx;
}

}  // namespace

CircuitDesign circuit_design(const ChannelSet& ch, const SystemConfig& cfg,
                             const std::vector<double>& caps, std::vector<int> idx,
                             const ModelErrorOptions& opt) {
  const int S = ch.num_bs();
  const int M = ch.num_elements();
  if (static_cast<int>(cfg.frequencies.size()) != S) {
    throw Error(ErrorCode::invalid_argument, "one carrier per BS is required");
  }
  if (static_cast<int>(idx.size()) != M) {
    throw Error(ErrorCode::invalid_argument, "start needs one capacitance index per element");
  }
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(caps.size())) {
      throw Error(ErrorCode::invalid_argument, "capacitance index out of range");
    }
  }
  std::vector<CVec> th(S, CVec(M));
  for (int m = 0; m < M; ++m) {
    const CVec t = circuit_response(cfg, caps[idx[m]]);
    for (int s = 0; s < S; ++s) th[s](m) = t(s);
  }

  CircuitDesign d;
  d.beams.W.resize(S);
  for (int s = 0; s < S; ++s) {
    const CMat H = effective_channels(ch, th[s], s);
    const CMat reg = H * H.adjoint() + (static_cast<double>(H.cols()) * cfg.sigma2 / cfg.P) *
                                           CMat::Identity(H.rows(), H.rows());
    CMat V = reg.ldlt().solve(H);
    for (Eigen::Index k = 0; k < V.cols(); ++k) {
      const double n = V.col(k).norm();
      V.col(k) *= n > 0.0 ? std::sqrt(cfg.P / static_cast<double>(V.cols())) / n : 0.0;
    }
    d.beams.W[s] = V;
  }

  double prev = rate_of(ch, th, d.beams, cfg.sigma2);
  for (int it = 1; it <= opt.max_outer; ++it) {
    // Beam update: one WMMSE step at the current reflection.
    for (int s = 0; s < S; ++s) {
      const CMat H = effective_channels(ch, th[s], s);
      const CMat G = H.adjoint() * d.beams.W[s];
      CVec nu(H.cols());
      RVec mu(H.cols());
      for (Eigen::Index k = 0; k < H.cols(); ++k) {
        nu(k) = G(k, k) / (G.row(k).squaredNorm() + cfg.sigma2);
        mu(k) = 1.0 / mse_from_channels(H, d.beams.W[s], nu(k), cfg.sigma2, static_cast<int>(k));
      }
      d.beams.W[s] = update_w(H, nu, mu, cfg.P).W;
    }

    // Element search with the beams fixed.
    std::vector<CascadeTerms> terms(S);
    std::vector<CMat> gains(S);
    for (int s = 0; s < S; ++s) {
      terms[s] = cascade_terms(ch, d.beams.W[s], s);
      gains[s] = effective_channels(ch, th[s], s).adjoint() * d.beams.W[s];
    }
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      bool changed = false;
      for (int m = 0; m < M; ++m) {
        std::vector<CMat> base = gains;
        for (int s = 0; s < S; ++s) {
          for (Eigen::Index k = 0; k < base[s].rows(); ++k) {
            for (Eigen::Index j = 0; j < base[s].cols(); ++j) {
              base[s](k, j) -= th[s](m) * terms[s].d[k][j](m);
            }
          }
        }
        int best = idx[m];
        double best_rate = rate_from_gains(gains, cfg.sigma2);
        CVec best_t(S);
        for (int s = 0; s < S; ++s) best_t(s) = th[s](m);
        std::vector<CMat> trial = base;
        for (int g = 0; g < static_cast<int>(caps.size()); ++g) {
          const CVec t = circuit_response(cfg, caps[g]);
          for (int s = 0; s < S; ++s) {
            for (Eigen::Index k = 0; k < base[s].rows(); ++k) {
              for (Eigen::Index j = 0; j < base[s].cols(); ++j) {
                trial[s](k, j) = base[s](k, j) + t(s) * terms[s].d[k][j](m);
              }
            }
          }
          const double r = rate_from_gains(trial, cfg.sigma2);
          if (r > best_rate * (1.0 + 1e-12)) {
            best_rate = r;
            best = g;
            best_t = t;
          }
        }
        if (best != idx[m]) {
          idx[m] = best;
          changed = true;
          for (int s = 0; s < S; ++s) {
            th[s](m) = best_t(s);
            for (Eigen::Index k = 0; k < base[s].rows(); ++k) {
              for (Eigen::Index j = 0; j < base[s].cols(); ++j) {
                gains[s](k, j) = base[s](k, j) + best_t(s) * terms[s].d[k][j](m);
              }
            }
          }
        }
      }
      if (!changed) break;
    }
    const double cur = rate_of(ch, th, d.beams, cfg.sigma2);
    d.rate_trace.push_back(cur);
    d.iterations = it;
    if (std::abs(cur - prev) <= opt.tol * std::max(std::abs(prev), 1e-12)) {
      d.converged = true;
      break;
    }
    prev = cur;
  }
  d.capacitance_index = idx;
  d.rate = rate_of(ch, th, d.beams, cfg.sigma2);
  return d;
}

ModelErrorResult model_error_study(const ChannelSet& channels, const SystemConfig& cfg,
                                   std::uint64_t seed, const ModelErrorOptions& options) {
  if (static_cast<int>(cfg.frequencies.size()) != channels.num_bs()) {
    throw Error(ErrorCode::invalid_argument, "one carrier per BS is required");
  }
  const int S = channels.num_bs();
  const int M = channels.num_elements();
  const std::vector<double> caps = capacitance_grid(options.capacitance, options.grid_points);
  ModelErrorResult r;

  Rng init_rng(derive_seed(seed, 1));
  const ReflectionState init = random_reflection_state(S, M, init_rng);
  auto t0 = Clock::now();
  const Algorithm2Result simplified = run_algorithm2(channels, cfg, init, options.rate);
  r.simplified_seconds = seconds_since(t0);
  r.simplified_rate = simplified.sum_rate;

  Rng cap_rng(derive_seed(seed, 3));
  std::uniform_int_distribution<int> pick(0, options.grid_points - 1);
  std::vector<int> start(M);
  for (int m = 0; m < M; ++m) start[m] = pick(cap_rng);
  t0 = Clock::now();
  const CircuitDesign design = circuit_design(channels, cfg, caps, start, options);
  r.true_seconds = seconds_since(t0);
  r.true_rate = design.rate;
  r.true_iterations = design.iterations;
  r.capacitance_index = design.capacitance_index;

  const CapacitancePartition part =
      partition_capacitance(cfg.circuit, cfg.frequencies, options.capacitance);
  const std::vector<int> realized = realize_design(simplified.state, cfg, caps, part);
  std::vector<CVec> th(S, CVec(M));
  for (int m = 0; m < M; ++m) {
    const CVec t = circuit_response(cfg, caps[realized[m]]);
    for (int s = 0; s < S; ++s) th[s](m) = t(s);
  }
  r.realized_rate = rate_of(channels, th, simplified.beams, cfg.sigma2);
  return r;
}

// ---------------------------------------------------------------------------
// experiment driver

namespace {

struct TrialOutput {
  std::vector<ResultRow> rows;
  std::string trace;  // convergence experiments
};

template <typename F>
void parallel_for(int n, int threads, F&& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

SystemConfig effective_config(const ExperimentSpec& spec, const SystemConfig& base) {
  return spec.full_scale ? full_scale(base) : base;
}

std::string metric_name(Problem p) {
  return p == Problem::power_min ? "total_power_w" : "sum_rate_bps_hz";
}

TrialOutput run_trial(const ExperimentSpec& spec, const SystemConfig& cfg,
                      const CapacitanceSweep& capacitance, double value, int trial) {
  TrialOutput out;
  const SystemConfig point = apply_sweep(cfg, spec.sweep, value);
  point.validate();
  const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  const ChannelSet ch = trial_channels(point, cfg.seed, trial);
  auto row = [&](const std::string& scheme, const std::string& metric, double v,
                 std::optional<double> secs) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::numerical, "non-finite metric in experiment '" + spec.name + "'");
    }
    if (!spec.timing) secs.reset();
    out.rows.push_back({spec.name, seed, value, scheme, metric, v, secs});
  };

  switch (spec.problem) {
    case Problem::power_min:
    case Problem::sum_rate: {
      BaselineOptions opt;
      opt.no_selection_bs = spec.no_selection_bs;
      for (Scheme s : spec.schemes) {
        const auto t0 = Clock::now();
        const double v = run_baseline(s, spec.problem, ch, point, seed, opt);
        row(to_string(s), metric_name(spec.problem), v, seconds_since(t0));
      }
      break;
    }
    case Problem::model_error: {
      ModelErrorOptions opt;
      opt.capacitance = capacitance;
      const ModelErrorResult r = model_error_study(ch, point, seed, opt);
      row("simplified", "sum_rate_bps_hz", r.simplified_rate, r.simplified_seconds);
      row("simplified_realized", "sum_rate_bps_hz", r.realized_rate, std::nullopt);
      row("true_circuit", "sum_rate_bps_hz", r.true_rate, r.true_seconds);
      break;
    }
    case Problem::power_convergence: {
      std::ostringstream os;
      os << std::setprecision(17);
      write_power_report_csv(os, run_algorithm1(ch, point).report, seed, false);
      out.trace = os.str();
      break;
    }
    case Problem::rate_convergence: {
      Rng init_rng(derive_seed(seed, 1));
      const ReflectionState init =
          random_reflection_state(ch.num_bs(), ch.num_elements(), init_rng);
      std::ostringstream os;
      os << std::setprecision(17);
      write_rate_trace_csv(os, run_algorithm2(ch, point, init).trace, seed, false);
      out.trace = os.str();
      break;
    }
  }
  return out;
}

std::vector<TrialOutput> run_all(const ExperimentSpec& spec, const SystemConfig& base,
                                 const CapacitanceSweep& capacitance) {
  spec.validate();
  const SystemConfig cfg = effective_config(spec, base);
  const std::vector<double> values =
      spec.sweep == SweepParam::none ? std::vector<double>{0.0} : spec.values;
  const int n = static_cast<int>(values.size()) * spec.trials;
  std::vector<TrialOutput> outputs(n);
  parallel_for(n, spec.threads, [&](int i) {
    outputs[i] = run_trial(spec, cfg, capacitance, values[i / spec.trials], i % spec.trials);
  });
  return outputs;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg,
                                      const CapacitanceSweep& capacitance) {
  if (spec.problem == Problem::power_convergence || spec.problem == Problem::rate_convergence) {
    throw Error(ErrorCode::invalid_argument,
                "convergence experiments produce traces; use run_experiment_to_file");
  }
  std::vector<ResultRow> rows;
  for (auto& t : run_all(spec, cfg, capacitance)) {
    for (auto& r : t.rows) rows.push_back(std::move(r));
  }
  return rows;
}

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                      const std::string& sweep_name) {
  out << "experiment,seed,sweep_param,sweep_value,scheme,metric,value,wall_clock_s\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.seed << ',' << sweep_name << ',' << r.sweep_value << ','
        << r.scheme << ',' << r.metric << ',' << r.value << ',';
    if (r.wall_clock) out << *r.wall_clock;
    out << '\n';
  }
}

void run_experiment_to_file(const ExperimentSpec& spec, const SystemConfig& cfg,
                            const CapacitanceSweep& capacitance) {
  if (spec.output.empty()) throw Error(ErrorCode::invalid_argument, "experiment has no output path");
  const std::vector<TrialOutput> outputs = run_all(spec, cfg, capacitance);
  std::ofstream out(spec.output, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open output file '" + spec.output + "'");
  if (spec.problem == Problem::power_convergence) {
    out << "seed,outer_iter,bs,power_watts,sinr_min,converged\n";
    for (const auto& t : outputs) out << t.trace;
  } else if (spec.problem == Problem::rate_convergence) {
    out << "seed,outer_iter,sum_rate_bps_hz,wmmse_objective\n";
    for (const auto& t : outputs) out << t.trace;
  } else {
    std::vector<ResultRow> rows;
    for (const auto& t : outputs) rows.insert(rows.end(), t.rows.begin(), t.rows.end());
    write_result_csv(out, rows, to_string(spec.sweep));
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing output file '" + spec.output + "'");
}

void print_partition(std::ostream& out, const SystemConfig& cfg,
                     const CapacitanceSweep& capacitance) {
  const CapacitancePartition p = partition_capacitance(cfg.circuit, cfg.frequencies, capacitance);
  auto pf = [](double c) { return c * 1e12; };
  out << std::fixed << std::setprecision(4);
  out << "frequency_ghz  c_lo_pf  c_hi_pf\n";
  for (std::size_t i = 0; i < p.frequencies.size(); ++i) {
    out << std::setw(13) << p.frequencies[i] * 1e-9 << "  " << std::setw(7) << pf(p.tunable[i].lo)
        << "  " << std::setw(7) << pf(p.tunable[i].hi) << '\n';
  }
  for (const auto& g : p.gray) {
    out << std::setw(13) << "gray" << "  " << std::setw(7) << pf(g.lo) << "  " << std::setw(7)
        << pf(g.hi) << '\n';
  }
}

}  // namespace irs
