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

#include "irs/common.hpp"

#include <cmath>
#include <limits>

namespace irs::testing {

// Least total power meeting every SINR target with the beam directions fixed,
// from the K x K linear system with all constraints tight. Infinite when the
// directions cannot support the targets.
inline double power_for_directions(const CMat& H, const CMat& U, double gamma, double sigma2) {
  const Eigen::Index K = H.cols();
  RMat F(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index j = 0; j < K; ++j) {
      const double g = std::norm(H.col(k).dot(U.col(j)));
      F(k, j) = j == k ? g / gamma : -g;
    }
  }
  const RVec p = F.fullPivLu().solve(RVec::Constant(K, sigma2));
  if (!p.allFinite() || p.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  const RVec check = F * p;
  if ((check.array() - sigma2).abs().maxCoeff() > 1e-9 * sigma2) {
    return std::numeric_limits<double>::infinity();
  }
  return p.sum();
}

// Brute-force minimum power for two users and two antennas: each beam
// direction (cos a, sin a e^{jb}) is searched on a grid, then refined by a
// shrinking pattern search around the best grid point.
inline double socp_grid_oracle(const CMat& H, double gamma, double sigma2, int grid = 36) {
  auto dir = [](double a, double b) {
    CVec u(2);
    u << std::cos(a), std::polar(std::sin(a), b);
    return u;
  };
  auto eval = [&](const double* x) {
    CMat U(2, 2);
    U.col(0) = dir(x[0], x[1]);
    U.col(1) = dir(x[2], x[3]);
    return power_for_directions(H, U, gamma, sigma2);
  };
  double best[4] = {0, 0, 0, 0};
  double best_p = std::numeric_limits<double>::infinity();
  const double da = (kPi / 2) / grid;
  const double db = kTwoPi / grid;
  double x[4];
  for (int i0 = 0; i0 <= grid; ++i0) {
    x[0] = i0 * da;
    for (int i1 = 0; i1 < grid; ++i1) {
      x[1] = i1 * db;
      for (int i2 = 0; i2 <= grid; ++i2) {
        x[2] = i2 * da;
        for (int i3 = 0; i3 < grid; ++i3) {
          x[3] = i3 * db;
          const double p = eval(x);
          if (p < best_p) {
            best_p = p;
            std::copy(x, x + 4, best);
          }
        }
      }
    }
  }
  double step[4] = {da, db, da, db};
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (int c = 0; c < 4; ++c) {
      for (int sign : {-1, 1}) {
        double y[4];
        std::copy(best, best + 4, y);
        y[c] += sign * step[c];
        const double p = eval(y);
        if (p < best_p) {
          best_p = p;
          std::copy(y, y + 4, best);
          improved = true;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
    }
  }
  return best_p;
}

}  // namespace irs::testing
