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

#include <vector>

namespace irs {

/// Quadratic model of the summed QoS margins as a function of the selection
/// rows a_s (real vectors). The margin of BS s equals
///   a^T E a - a^T D a + Re{a^T beta} + constant_s
/// for every binary row a.
struct SelectionQuadratics {
  std::vector<CMat> E;     // (1 + gamma) sum_k dt_kk dt_kk^H
  std::vector<CMat> D;     // gamma sum_k sum_j dt_kj dt_kj^H
  std::vector<CVec> beta;  // 2 sum_k (dt_kk bt_kk^* - gamma sum_{j!=k} dt_kj bt_kj^*)
  // dt[s][k][j] = diag(exp(j phi_s) - 1) d_{s,k,j}; bt[s][k][j] = 1^T d_{s,k,j} + b_{s,k,j}
  std::vector<std::vector<std::vector<CVec>>> d_tilde;
  std::vector<std::vector<std::vector<cdouble>>> b_tilde;
  double constant = 0.0;  // terms independent of the selection

  int num_bs() const { return static_cast<int>(E.size()); }
  int num_elements() const { return E.empty() ? 0 : static_cast<int>(E.front().rows()); }
};

SelectionQuadratics build_selection_quadratics(const ChannelSet& channels,
                                               const BeamformerSet& beams,
                                               const RMat& phi, double gamma,
                                               double sigma2);

/// Same quadratics divided by a positive scale so that the largest matrix or
/// vector entry is 1. Maximizers are unchanged.
SelectionQuadratics normalized(const SelectionQuadratics& q, double* scale = nullptr);

/// Selection objective without the dropped constant; `a` is S x M.
double selection_objective(const SelectionQuadratics& q, const RMat& a);

/// Summed QoS margins evaluated through the practical reflection model:
/// sum_s sum_k |theta_s^T d_kk + b_kk|^2 - gamma sum_{j!=k} |theta_s^T d_kj + b_kj|^2.
double qos_margin_through_model(const ChannelSet& channels, const BeamformerSet& beams,
                                const ReflectionState& state, double gamma);

/// sum_s (1^T a_s - a_s^T a_s); zero exactly when every entry is 0 or 1.
double binary_violation(const RMat& a);

/// Selection objective minus tau times the binary violation.
double penalized_objective(const SelectionQuadratics& q, const RMat& a, double tau);

/// Concave minorant of the penalized objective built at `anchor` by
/// linearizing its convex part; touches it at a == anchor.
double surrogate_objective(const SelectionQuadratics& q, const RMat& a,
                           const RMat& anchor, double tau);

/// Euclidean projection onto {x in [0,1]^S : sum x <= 1}.
RVec project_column(const RVec& v);

struct MmState {
  RMat a;  // relaxed selection, S x M
  double tau = 0.0;
  int t = 0;
};

struct MmStepOptions {
  int max_iter = 500;
  double tol = 1e-6;
};

struct MmStepResult {
  RMat a;
  int iterations = 0;
  bool converged = false;
};

/// One majorization-minimization step: maximizes the surrogate over the column
/// polytope by projected gradient ascent started from the anchor.
MmStepResult mm_step(const SelectionQuadratics& q, const MmState& state,
                     const MmStepOptions& options = {});

struct SelectionOptions {
  double violation_tol = 1e-3;
  double tau_growth = 5.0;
  double tau_scale = 0.1;
  int max_stages = 40;
  int max_mm_per_stage = 100;
  double mm_tol = 1e-7;
  MmStepOptions step;
};

struct SelectionReport {
  // One entry per MM iteration, evaluated at the tau used by that iteration.
  std::vector<double> penalized_before;
  std::vector<double> penalized_after;
  std::vector<double> tau;
  std::vector<double> violation;
  int mm_iterations = 0;
  int inner_nonconverged = 0;
  double final_violation = 0.0;
  bool converged = false;          // violation reached the tolerance
  bool rounding_fallback = false;  // rounded although still fractional
};

struct SelectionResult {
  IMat A;
  RMat relaxed;
  SelectionReport report;
};

/// Rounds a relaxed selection column by column: keep the largest entry when it
/// exceeds 0.5, otherwise leave the element unselected.
IMat round_selection(const RMat& relaxed);

SelectionResult run_selection(const SelectionQuadratics& q, const RMat& init,
                              const SelectionOptions& options = {});

}  // namespace irs
