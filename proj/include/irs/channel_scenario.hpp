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
#include "irs/reflection_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace irs {

using Rng = std::mt19937_64;

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double linear_to_db(double linear);

/// Scenario description shared by every optimizer and the experiment driver.
/// Powers in watts, distances in metres, gains linear.
struct SystemConfig {
  int S = 3;
  int K = 2;
  int Nt = 4;
  int M = 16;
  double sigma2 = 1e-10;             // -70 dBm
  double gamma = 3.1622776601683795;  // 5 dB SINR target
  double P = 0.31622776601683794;     // -5 dB per-BS budget
  double L = 52.0;
  double D = 2.0;
  double C0 = 1e-3;  // -30 dB
  double d0 = 1.0;
  double alpha_bi = 2.5;
  double alpha_iu = 2.8;
  double alpha_bu = 3.5;
  std::uint64_t seed = 1;
  bool redraw_geometry = true;
  FrequencyPlan frequencies{{2.605e9, 2.345e9, 1.885e9}};
  CircuitParams circuit;

  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point2 a, Point2 b);

struct Geometry {
  std::vector<Point2> bs;                  // S entries
  std::vector<std::vector<Point2>> users;  // users[s][k]
};

/// Channels of one cell. Column k of `Hr` is h_{r,s,k} (IRS -> user k), column
/// k of `Hd` is h_{d,s,k} (BS -> user k); `G` maps BS antennas onto IRS
/// elements.
struct BsChannels {
  CMat G;   // M x Nt
  CMat Hr;  // M x K
  CMat Hd;  // Nt x K

  int num_users() const { return static_cast<int>(Hd.cols()); }
  int num_antennas() const { return static_cast<int>(Hd.rows()); }
  int num_elements() const { return static_cast<int>(G.rows()); }
};

struct ChannelSet {
  std::vector<BsChannels> bs;
  int redraws = 0;  // rank-deficiency redraws performed while generating

  int num_bs() const { return static_cast<int>(bs.size()); }
  int num_elements() const { return bs.empty() ? 0 : bs.front().num_elements(); }
};

/// Independent generator seed for stream `stream` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

double path_gain(const SystemConfig& cfg, double d, double alpha);

Geometry place_scenario(const SystemConfig& cfg, Rng& rng);

ChannelSet draw_channels(const SystemConfig& cfg, const Geometry& geometry, Rng& rng);

/// Copy of `channels` with every IRS cascade removed.
ChannelSet without_irs(const ChannelSet& channels);

}  // namespace irs
