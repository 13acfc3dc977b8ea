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

#include <random>

namespace irs::testing {

inline CMat random_cmat(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale / std::sqrt(2.0));
  CMat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = {n(rng), n(rng)};
  return m;
}

inline CVec random_cvec(Eigen::Index n, Rng& rng, double scale = 1.0) {
  return random_cmat(n, 1, rng, scale).col(0);
}

inline CVec random_unit(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, u(rng));
  return v;
}

// Unit-variance channels of the given shape; no geometry involved.
inline ChannelSet random_channels(int S, int K, int Nt, int M, Rng& rng) {
  ChannelSet ch;
  ch.bs.resize(S);
  for (auto& b : ch.bs) {
    b.G = random_cmat(M, Nt, rng);
    b.Hr = random_cmat(M, K, rng);
    b.Hd = random_cmat(Nt, K, rng);
  }
  return ch;
}

inline ReflectionState random_state(int S, int M, Rng& rng) {
  ReflectionState st(S, M);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::uniform_int_distribution<int> pick(0, S);
  for (int m = 0; m < M; ++m) {
    for (int s = 0; s < S; ++s) st.phi(s, m) = wrap_phase(u(rng));
    const int p = pick(rng);
    if (p < S) st.a(p, m) = 1;
  }
  return st;
}

}  // namespace irs::testing
