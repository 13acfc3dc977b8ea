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

#include "irs/downlink_core.hpp"

#include <cmath>

namespace irs {

namespace {

void check_dims(const ChannelSet& channels, const CVec& theta_s, int s) {
  if (s < 0 || s >= channels.num_bs()) {
    throw Error(ErrorCode::invalid_argument, "BS index out of range");
  }
  if (theta_s.size() != channels.bs[s].num_elements()) {
    throw Error(ErrorCode::invalid_argument, "reflection vector length != element count");
  }
}

}  // namespace

CVec effective_channel(const ChannelSet& channels, const CVec& theta_s, int s, int k) {
  check_dims(channels, theta_s, s);
  const BsChannels& ch = channels.bs[s];
  if (k < 0 || k >= ch.num_users()) {
    throw Error(ErrorCode::invalid_argument, "user index out of range");
  }
  // (h_r^H diag(theta) G)^H = G^H diag(theta^*) h_r
  const CVec weighted = theta_s.conjugate().cwiseProduct(ch.Hr.col(k));
  return ch.G.adjoint() * weighted + ch.Hd.col(k);
}

CMat effective_channels(const ChannelSet& channels, const CVec& theta_s, int s) {
  check_dims(channels, theta_s, s);
  const BsChannels& ch = channels.bs[s];
  const CMat weighted = theta_s.conjugate().asDiagonal() * ch.Hr;
  return ch.G.adjoint() * weighted + ch.Hd;
}

double sinr_from_channels(const CMat& H, const CMat& W, double sigma2, int k) {
  const CVec h = H.col(k);
  double interference = sigma2;
  double signal = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const double g = std::norm(h.dot(W.col(j)));  // |h^H w_j|^2
    if (j == k) signal = g;
    else interference += g;
  }
  return signal / interference;
}

double mse_from_channels(const CMat& H, const CMat& W, cdouble nu, double sigma2, int k) {
  const CVec h = H.col(k);
  double total = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    total += std::norm(std::conj(nu) * h.dot(W.col(j)));
  }
  total -= 2.0 * std::real(std::conj(nu) * h.dot(W.col(k)));
  total += std::norm(nu) * sigma2 + 1.0;
  return total;
}

double sinr(const ChannelSet& channels, const ReflectionState& state,
            const BeamformerSet& beams, double sigma2, int s, int k) {
  const CMat H = effective_channels(channels, practical_reflection(state, s), s);
  return sinr_from_channels(H, beams.W[s], sigma2, k);
}

double sum_rate(const ChannelSet& channels, const ReflectionState& state,
                const BeamformerSet& beams, double sigma2) {
  double total = 0.0;
  for (int s = 0; s < channels.num_bs(); ++s) {
    const CMat H = effective_channels(channels, practical_reflection(state, s), s);
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
      total += std::log2(1.0 + sinr_from_channels(H, beams.W[s], sigma2, static_cast<int>(k)));
    }
  }
  return total;
}

double mse(const ChannelSet& channels, const ReflectionState& state,
           const BeamformerSet& beams, cdouble nu, double sigma2, int s, int k) {
  const CMat H = effective_channels(channels, practical_reflection(state, s), s);
  return mse_from_channels(H, beams.W[s], nu, sigma2, k);
}

double bs_power(const CMat& W) { return W.squaredNorm(); }

double total_power(const BeamformerSet& beams) {
  double p = 0.0;
  for (const auto& w : beams.W) p += w.squaredNorm();
  return p;
}

CascadeTerms cascade_terms(const ChannelSet& channels, const CMat& W_s, int s) {
  const BsChannels& ch = channels.bs[s];
  const int K = ch.num_users();
  if (W_s.rows() != ch.num_antennas()) {
    throw Error(ErrorCode::invalid_argument, "beamformer rows != antenna count");
  }
  const int J = static_cast<int>(W_s.cols());
  const CMat GW = ch.G * W_s;  // M x J
  CascadeTerms t;
  t.d.assign(K, std::vector<CVec>(J));
  t.b.assign(K, std::vector<cdouble>(J));
  for (int k = 0; k < K; ++k) {
    const CVec hr_conj = ch.Hr.col(k).conjugate();
    for (int j = 0; j < J; ++j) {
      t.d[k][j] = hr_conj.cwiseProduct(GW.col(j));
      t.b[k][j] = ch.Hd.col(k).dot(W_s.col(j));
    }
  }
  return t;
}

}  // namespace irs
