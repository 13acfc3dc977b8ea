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

#include "irs/channel_scenario.hpp"

#include <cmath>

namespace irs {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void SystemConfig::validate() const {
  if (S < 1 || K < 1 || M < 0 || Nt < K) {
    throw Error(ErrorCode::invalid_argument,
                "scenario requires S >= 1, K >= 1, M >= 0 and Nt >= K");
  }
  if (!(sigma2 > 0.0) || !(gamma > 0.0) || !(P > 0.0) || !(L > 0.0) ||
      !(D > 0.0) || !(C0 >= 0.0) || !(d0 > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "noise, SINR target, power, distances must be positive");
  }
  frequencies.validate();
  if (static_cast<int>(frequencies.size()) != S) {
    throw Error(ErrorCode::invalid_argument,
                "frequency plan must list exactly one frequency per BS");
  }
  circuit.validate();
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over the (master, stream) pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double path_gain(const SystemConfig& cfg, double d, double alpha) {
  if (!(d > 0.0)) throw Error(ErrorCode::domain, "path gain requires d > 0");
  return cfg.C0 * std::pow(d / cfg.d0, -alpha);
}

Geometry place_scenario(const SystemConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  Geometry g;
  g.bs.reserve(cfg.S);
  g.users.resize(cfg.S);
  for (int s = 0; s < cfg.S; ++s) {
    const double a = angle(rng);
    g.bs.push_back({cfg.L * std::cos(a), cfg.L * std::sin(a)});
  }
  for (int s = 0; s < cfg.S; ++s) {
    for (int k = 0; k < cfg.K; ++k) {
      const double a = angle(rng);
      g.users[s].push_back({cfg.D * std::cos(a), cfg.D * std::sin(a)});
    }
  }
  return g;
}

namespace {

void fill_gaussian(CMat& m, double variance, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double re = n(rng);
      const double im = n(rng);
      m(r, c) = {re, im};
    }
  }
}

bool equivalent_channel_full_rank(const BsChannels& ch) {
  const CMat eq = ch.G.adjoint() * ch.Hr + ch.Hd;
  if (eq.size() == 0) return true;
  const RVec sv = Eigen::JacobiSVD<CMat>(eq).singularValues();
  const double top = sv(0);
  if (!(top > 0.0)) return false;
  return sv(sv.size() - 1) > 1e-10 * top;
}

}  // namespace

ChannelSet draw_channels(const SystemConfig& cfg, const Geometry& geometry, Rng& rng) {
  const Point2 irs{0.0, 0.0};
  ChannelSet out;
  out.bs.resize(cfg.S);
  constexpr int kMaxRedraws = 100;
  for (int s = 0; s < cfg.S; ++s) {
    BsChannels& ch = out.bs[s];
    const double g_bi = path_gain(cfg, distance(geometry.bs[s], irs), cfg.alpha_bi);
    for (int attempt = 0;; ++attempt) {
      ch.G.resize(cfg.M, cfg.Nt);
      ch.Hr.resize(cfg.M, cfg.K);
      ch.Hd.resize(cfg.Nt, cfg.K);
      fill_gaussian(ch.G, g_bi, rng);
      for (int k = 0; k < cfg.K; ++k) {
        CMat col(cfg.M, 1);
        fill_gaussian(col, path_gain(cfg, distance(geometry.users[s][k], irs), cfg.alpha_iu), rng);
        ch.Hr.col(k) = col.col(0);
      }
      for (int k = 0; k < cfg.K; ++k) {
        CMat col(cfg.Nt, 1);
        fill_gaussian(col, path_gain(cfg, distance(geometry.users[s][k], geometry.bs[s]),
                                     cfg.alpha_bu),
                      rng);
        ch.Hd.col(k) = col.col(0);
      }
      if (cfg.C0 == 0.0 || equivalent_channel_full_rank(ch)) break;
      if (attempt >= kMaxRedraws) {
        throw Error(ErrorCode::infeasible, "could not draw full-rank equivalent channels");
      }
      ++out.redraws;
    }
  }
  return out;
}

ChannelSet without_irs(const ChannelSet& channels) {
  ChannelSet out = channels;
  for (auto& ch : out.bs) ch.Hr.setZero();
  return out;
}

}  // namespace irs
