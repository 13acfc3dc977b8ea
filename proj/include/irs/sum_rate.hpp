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
#include "irs/downlink_core.hpp"
#include "irs/reflection_model.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace irs {

/// Receive scalars, MSE weights and power multipliers; nu[s](k), mu[s](k).
struct WmmseState {
  std::vector<CVec> nu;
  std::vector<RVec> mu;
  std::vector<double> lambda;
};

/// Receive scalars minimizing every user's MSE for the given beams.
std::vector<CVec> update_nu(const ChannelSet& channels, const ReflectionState& state,
                            const BeamformerSet& beams, double sigma2);

/// Per-user MSE with the receive scalars `nu`.
std::vector<RVec> user_mse(const ChannelSet& channels, const ReflectionState& state,
                           const BeamformerSet& beams, const std::vector<CVec>& nu,
                           double sigma2);

/// mu = 1 / MSE. Throws Error(domain) for a non-positive MSE.
std::vector<RVec> update_mu(const std::vector<RVec>& mse);

struct BeamUpdate {
  CMat W;
  double lambda = 0.0;
};

/// Minimizes the weighted MSE of BS s over W_s subject to ||W_s||_F^2 <= P.
/// `H` holds the effective channels (Nt x K); the multiplier is found by
/// bisection when the unconstrained solution exceeds the budget.
BeamUpdate update_w(const CMat& H, const CVec& nu, const RVec& mu, double P);

/// Weighted-MSE objective sum_{s,k} mu e - ln mu. At the optimal (nu, mu) it
/// equals sum_{s,k} 1 - ln(1 + SINR).
double wmmse_objective(const ChannelSet& channels, const ReflectionState& state,
                       const BeamformerSet& beams, const WmmseState& w, double sigma2);

/// Reflection-dependent part of the weighted MSE of BS s:
///   theta_s^H B_s theta_s - 2 Re{theta_s^H c_s}.
struct ElementQuadratics {
  std::vector<CMat> B;  // M x M, Hermitian PSD
  std::vector<CVec> c;

  int num_bs() const { return static_cast<int>(B.size()); }
  int num_elements() const { return B.empty() ? 0 : static_cast<int>(B.front().rows()); }
};

ElementQuadratics build_element_quadratics(const ChannelSet& channels,
                                           const BeamformerSet& beams,
                                           const WmmseState& w);

double element_objective(const ElementQuadratics& q, const ReflectionState& state);

/// zeta_{s,m} = sum_{n != m} B_s(m,n) theta_{s,n} - c_s(m) for the current state.
cdouble element_zeta(const ElementQuadratics& q, const ReflectionState& state, int s, int m);

/// Coupling vectors of every BS for element m.
CVec element_zetas(const ElementQuadratics& q, const ReflectionState& state, int m);

struct ElementChoice {
  int bs = 0;
  double phi = kTwoPi;
};

/// Best (BS, phase) pair for element m found by evaluating the element's share
/// of the objective for every BS choice. Ties go to the smallest BS index.
ElementChoice choose_element_enumerated(const CVec& zeta);

/// Same choice by maximizing |zeta_s| (1 + cos arg zeta_s).
ElementChoice choose_element(const CVec& zeta);

enum class SelectionMode { joint, fixed };

/// Updates column m of the state in place. In joint mode the element is
/// reassigned to the chosen BS; in fixed mode only the phase of the currently
/// assigned BS changes (nothing happens for an unassigned element).
ElementChoice update_element(const ElementQuadratics& q, ReflectionState& state, int m,
                             SelectionMode mode = SelectionMode::joint,
                             bool enumerate = false);

struct Algorithm2Options {
  double tol = 1e-4;
  int max_outer = 100;
  double sweep_tol = 1e-5;
  int max_sweeps = 20;
  SelectionMode mode = SelectionMode::joint;
  bool optimize_reflection = true;
  bool enumerate = false;  // use the exhaustive element rule
};

struct RateTraceRow {
  int outer_iter = 0;
  double sum_rate = 0.0;
  double objective = 0.0;
};

struct Algorithm2Result {
  BeamformerSet beams;
  ReflectionState state;
  WmmseState wmmse;
  std::vector<RateTraceRow> trace;
  int iterations = 0;
  bool converged = false;
  double sum_rate = 0.0;
};

/// Equal-power MMSE beams of every BS for the given reflection state.
BeamformerSet mmse_beams(const ChannelSet& channels, const ReflectionState& state,
                         double P, double sigma2);

/// Uniform phases in (0, 2pi] and columns drawn uniformly from the S + 1
/// single-or-no selection patterns.
ReflectionState random_reflection_state(int S, int M, Rng& rng);

/// WMMSE block coordinate descent over (nu, mu, W) and the per-element phase
/// and selection. Starts from `init` with equal-power MMSE beams.
Algorithm2Result run_algorithm2(const ChannelSet& channels, const SystemConfig& cfg,
                                const ReflectionState& init,
                                const Algorithm2Options& options = {});

/// CSV with columns seed,outer_iter,sum_rate_bps_hz,wmmse_objective.
void write_rate_trace_csv(std::ostream& out, const std::vector<RateTraceRow>& trace,
                          std::uint64_t seed, bool header = true);

}  // namespace irs
