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
#include "irs/service_selection.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace irs {

struct SocpOptions {
  double tol = 1e-13;
  int max_iter = 100000;
};

/// Minimum-power downlink beamformers meeting SINR >= gamma for every user.
///
/// `H` holds the effective channels as columns (Nt x K). Solved through
/// uplink-downlink duality: the virtual uplink power fixed point yields MMSE
/// receive directions, then the downlink powers follow from a K x K linear
/// system. All constraints are active at the returned point. Throws
/// Error(infeasible) when the fixed point diverges.
CMat solve_beamforming_socp(const CMat& H, double gamma, double sigma2,
                            const SocpOptions& options = {});

/// Quadratic form of the summed QoS margins of one BS in the reflection
/// coefficients of its selected elements x (= theta restricted to I_s):
///   margin(x) = x^T D x^* + 2 Re{x^T b} + constant.
struct QosQuadratics {
  std::vector<int> selected;  // I_s in ascending order
  CascadeTerms terms;         // d_{s,k,j}, b_{s,k,j} over all elements
  CMat D;                     // |I_s| x |I_s|, Hermitian
  CVec b;                     // |I_s|
  double constant = 0.0;      // includes -gamma * sigma2 per user

  double margin(const CVec& x) const;
};

QosQuadratics build_qos_quadratics(const ChannelSet& channels, const CMat& W_s,
                                   const ReflectionState& state, double gamma,
                                   double sigma2, int s);

/// f(x) = -x^T D x^* - 2 Re{x^T b}, the quantity minimized over the circle
/// manifold.
double phase_objective(const CMat& D, const CVec& b, const CVec& x);

/// Euclidean gradient of `phase_objective` with respect to (Re x, Im x),
/// packed as a complex vector.
CVec phase_gradient(const CMat& D, const CVec& b, const CVec& x);

struct ManifoldOptions {
  int max_iter = 1000;
  double grad_tol = 1e-6;
  double armijo_c = 1e-4;
  double contraction = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 60;
};

struct ManifoldResult {
  CVec theta;
  double objective = 0.0;  // in the units of D and b
  double grad_norm = 0.0;  // Riemannian gradient norm of the scale-normalized problem
  int iterations = 0;
  bool converged = false;
};

/// Riemannian conjugate gradient (Polak-Ribiere+, Armijo backtracking) on the
/// complex circle manifold. Every accepted iterate is reported to `observer`.
ManifoldResult optimize_phase_manifold(const CMat& D, const CVec& b, const CVec& theta_init,
                                       const ManifoldOptions& options = {},
                                       const std::function<void(const CVec&)>& observer = {});

/// Writes the angles of `theta_hat` into the selected entries of row s.
void reconstruct_phases(ReflectionState& state, const CVec& theta_hat, int s);

struct BcdOptions {
  double tol = 1e-4;
  int max_iter = 30;
  // Halve each phase move until the beamforming solve needs no more power
  // than the current iterate; off = always take the full move.
  bool monotone = true;
  int max_backtracks = 20;
  ManifoldOptions manifold;
  SocpOptions socp;
};

struct PerBsResult {
  CMat W;
  RVec phi_row;
  std::vector<double> power_trace;     // power of every SOCP solve, in order
  std::vector<double> sinr_min_trace;  // matching minimum SINR
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // stopped after consecutive power increases
};

/// Alternates beamforming and phase updates for BS s with the selection fixed.
/// Returns the lowest-power iterate seen.
PerBsResult per_bs_bcd(const ChannelSet& channels, const ReflectionState& state,
                       double gamma, double sigma2, int s, const BcdOptions& options = {});

struct PowerMinReport {
  struct Row {
    int outer_iter = 0;
    int bs = 0;
    double power = 0.0;
    double sinr_min = 0.0;
    bool converged = false;
  };
  std::vector<Row> rows;
  std::vector<double> bs_power;
  std::vector<int> iterations;
  std::vector<bool> converged;
  double total_power = 0.0;
  SelectionReport selection;
};

struct PowerMinResult {
  BeamformerSet beams;
  ReflectionState state;
  PowerMinReport report;
};

struct PowerMinOptions {
  BcdOptions bcd;
  SelectionOptions selection;
};

/// Three-step design: ideal per-BS BCD with every element tunable, service
/// selection, then per-BS BCD under the chosen selection.
PowerMinResult run_algorithm1(const ChannelSet& channels, const SystemConfig& cfg,
                              const PowerMinOptions& options = {});

/// Per-BS BCD for every BS with the selection held at `state.a`.
PowerMinResult optimize_with_fixed_selection(const ChannelSet& channels,
                                             const ReflectionState& state,
                                             const SystemConfig& cfg,
                                             const PowerMinOptions& options = {});

/// CSV with columns seed,outer_iter,bs,power_watts,sinr_min,converged.
void write_power_report_csv(std::ostream& out, const PowerMinReport& report,
                            std::uint64_t seed, bool header = true);

}  // namespace irs
