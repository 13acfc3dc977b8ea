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
#include "irs/service_selection.hpp"

#include <cmath>
#include <functional>
#include <ostream>

namespace irs {

namespace {

CMat random_cmat(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = {n(rng), n(rng)};
  return m;
}

bool check_unit_modulus() {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const ReflectionState st = random_reflection_state(3, 16, rng);
    for (int s = 0; s < 3; ++s) {
      const CVec th = practical_reflection(st, s);
      if ((th.cwiseAbs().array() - 1.0).abs().maxCoeff() > 1e-12) return false;
    }
  }
  return true;
}

bool check_lossless() {
  CircuitParams p;
  p.R = 0.0;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 25; ++j) {
      const double c = 0.5e-12 + 5.5e-12 * i / 39.0;
      const double f = 1e9 + 2e9 * j / 24.0;
      if (std::abs(std::abs(reflection_coefficient(p, c, f)) - 1.0) > 1e-9) return false;
    }
  }
  return true;
}

bool check_partition() {
  const SystemConfig cfg;
  const CapacitancePartition p = partition_capacitance(cfg.circuit, cfg.frequencies);
  for (std::size_t i = 0; i + 1 < p.tunable.size(); ++i) {
    if (!(p.tunable[i].hi < p.tunable[i + 1].lo)) return false;
  }
  for (const auto& iv : p.tunable) {
    if (iv.lo < p.sweep_lo || iv.hi > p.sweep_hi || !(iv.width() > 0.0)) return false;
  }
  return true;
}

bool check_socp_activity() {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const CMat H = random_cmat(4, 3, rng);
    const double gamma = 3.0;
    const CMat W = solve_beamforming_socp(H, gamma, 1.0);
    for (int k = 0; k < 3; ++k) {
      if (std::abs(sinr_from_channels(H, W, 1.0, k) / gamma - 1.0) > 1e-4) return false;
    }
  }
  return true;
}

bool check_gradient() {
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const CMat X = random_cmat(5, 5, rng);
    const CMat D = X * X.adjoint();
    const CVec b = random_cmat(5, 1, rng).col(0);
    const CVec x = random_cmat(5, 1, rng).col(0);
    const CVec g = phase_gradient(D, b, x);
    const double h = 1e-6;
    for (int i = 0; i < 5; ++i) {
      for (int part = 0; part < 2; ++part) {
        CVec xp = x, xm = x;
        const cdouble step = part == 0 ? cdouble(h, 0) : cdouble(0, h);
        xp(i) += step;
        xm(i) -= step;
        const double fd = (phase_objective(D, b, xp) - phase_objective(D, b, xm)) / (2 * h);
        const double an = part == 0 ? g(i).real() : g(i).imag();
        if (std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an))) return false;
      }
    }
  }
  return true;
}

bool check_manifold() {
  Rng rng(14);
  const CMat X = random_cmat(8, 8, rng);
  const CMat D = X * X.adjoint();
  const CVec b = random_cmat(8, 1, rng).col(0);
  CVec init = CVec::Ones(8);
  bool unit = true;
  double last = phase_objective(D, b, init);
  bool monotone = true;
  optimize_phase_manifold(D, b, init, {}, [&](const CVec& x) {
    unit = unit && (x.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-12;
    const double f = phase_objective(D, b, x);
    monotone = monotone && f <= last + 1e-12 * std::abs(last);
    last = f;
  });
  return unit && monotone;
}

bool check_mm_monotone() {
  Rng rng(15);
  const SystemConfig cfg;
  const ChannelSet ch = trial_channels(cfg, 15, 0);
  const ReflectionState st = random_reflection_state(cfg.S, cfg.M, rng);
  const BeamformerSet beams = mmse_beams(ch, st, 1.0, cfg.sigma2);
  const SelectionQuadratics q =
      build_selection_quadratics(ch, beams, st.phi, cfg.gamma, cfg.sigma2);
  const SelectionResult r =
      run_selection(q, RMat::Constant(cfg.S, cfg.M, 1.0 / cfg.S));
  for (std::size_t i = 0; i < r.report.penalized_before.size(); ++i) {
    const double b = r.report.penalized_before[i];
    if (r.report.penalized_after[i] < b - 1e-9 * std::max(1.0, std::abs(b))) return false;
  }
  return r.A.rows() == cfg.S;
}

bool check_element_rule() {
  Rng rng(16);
  for (int t = 0; t < 200; ++t) {
    const CVec z = random_cmat(3, 1, rng).col(0);
    const ElementChoice a = choose_element(z);
    const ElementChoice b = choose_element_enumerated(z);
    if (a.bs != b.bs || std::abs(a.phi - b.phi) > 1e-12) return false;
  }
  return true;
}

bool check_wmmse_monotone() {
  const SystemConfig cfg;
  const ChannelSet ch = trial_channels(cfg, 17, 0);
  Rng rng(17);
  const Algorithm2Result r = run_algorithm2(ch, cfg, random_reflection_state(cfg.S, cfg.M, rng));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].sum_rate < r.trace[i - 1].sum_rate - 1e-9) return false;
  }
  for (const auto& W : r.beams.W) {
    if (bs_power(W) > cfg.P + 1e-9) return false;
  }
  return true;
}

bool check_determinism() {
  const SystemConfig cfg;
  const ChannelSet a = trial_channels(cfg, 99, 3);
  const ChannelSet b = trial_channels(cfg, 99, 3);
  for (int s = 0; s < cfg.S; ++s) {
    if (a.bs[s].G != b.bs[s].G || a.bs[s].Hr != b.bs[s].Hr || a.bs[s].Hd != b.bs[s].Hd) return false;
  }
  return true;
}

}  // namespace

bool validate_invariants(std::ostream& out) {
  const std::pair<const char*, std::function<bool()>> checks[] = {
      {"unit_modulus_reflection", check_unit_modulus},
      {"lossless_reflection_bound", check_lossless},
      {"partition_disjoint", check_partition},
      {"socp_constraints_active", check_socp_activity},
      {"phase_gradient_finite_difference", check_gradient},
      {"manifold_iterates_feasible_and_descending", check_manifold},
      {"selection_mm_monotone", check_mm_monotone},
      {"element_rule_matches_enumeration", check_element_rule},
      {"wmmse_rate_monotone_and_power_feasible", check_wmmse_monotone},
      {"channel_draw_deterministic", check_determinism},
  };
  bool all = true;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    std::string note;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << name << note << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace irs
