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
#include "irs/reflection_model.hpp"

#include <vector>

namespace irs {

/// Transmit precoders; W[s] is Nt x K with column k the beam of user k.
struct BeamformerSet {
  std::vector<CMat> W;

  int num_bs() const { return static_cast<int>(W.size()); }
};

/// h with h^H = h_r^H diag(theta) G + h_d^H for user k of BS s.
CVec effective_channel(const ChannelSet& channels, const CVec& theta_s, int s, int k);

/// All effective channels of BS s as the columns of an Nt x K matrix.
CMat effective_channels(const ChannelSet& channels, const CVec& theta_s, int s);

// Per-user scalars from an explicit effective-channel matrix (column k = h_k).
double sinr_from_channels(const CMat& H, const CMat& W, double sigma2, int k);
double mse_from_channels(const CMat& H, const CMat& W, cdouble nu, double sigma2, int k);

double sinr(const ChannelSet& channels, const ReflectionState& state,
            const BeamformerSet& beams, double sigma2, int s, int k);

/// Sum over all users of log2(1 + SINR), in bit/s/Hz.
double sum_rate(const ChannelSet& channels, const ReflectionState& state,
                const BeamformerSet& beams, double sigma2);

/// Mean square error of the scalar estimate nu^* y of the user's symbol.
double mse(const ChannelSet& channels, const ReflectionState& state,
           const BeamformerSet& beams, cdouble nu, double sigma2, int s, int k);

double total_power(const BeamformerSet& beams);

/// Reflection-linear pieces of every user/beam pair of BS s:
/// d[k][j] = diag(h_{r,k}^*) G w_j and b[k][j] = h_{d,k}^H w_j, so that
/// theta^T d[k][j] + b[k][j] = h_k^H w_j.
struct CascadeTerms {
  std::vector<std::vector<CVec>> d;
  std::vector<std::vector<cdouble>> b;
};

CascadeTerms cascade_terms(const ChannelSet& channels, const CMat& W_s, int s);
double bs_power(const CMat& W);

}  // namespace irs
