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

#include <doctest.h>

#include <cmath>

using namespace irs;

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watts(-70.0) == doctest::Approx(1e-10));
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3));
  CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
}

TEST_CASE("path gain") {
  const SystemConfig cfg;
  CHECK(path_gain(cfg, 1.0, 2.5) == doctest::Approx(1e-3));
  CHECK(path_gain(cfg, 10.0, 2.0) == doctest::Approx(1e-5));
  CHECK(path_gain(cfg, 52.0, 2.5) == doctest::Approx(5.1285151278220148116e-8).epsilon(1e-12));
  CHECK_THROWS_AS(path_gain(cfg, 0.0, 2.0), Error);
  CHECK_THROWS_AS(path_gain(cfg, -3.0, 2.0), Error);
}

TEST_CASE("placement on circles") {
  const SystemConfig cfg;
  Rng rng(5);
  const Geometry g = place_scenario(cfg, rng);
  REQUIRE(g.bs.size() == 3);
  for (const auto& b : g.bs) CHECK(std::abs(distance(b, {0, 0}) - cfg.L) < 1e-9);
  for (const auto& users : g.users) {
    REQUIRE(users.size() == 2);
    for (const auto& u : users) CHECK(std::abs(distance(u, {0, 0}) - cfg.D) < 1e-9);
  }
  Rng again(5);
  const Geometry h = place_scenario(cfg, again);
  for (std::size_t s = 0; s < g.bs.size(); ++s) {
    CHECK(g.bs[s].x == h.bs[s].x);
    CHECK(g.bs[s].y == h.bs[s].y);
  }
}

TEST_CASE("channel second moments follow the path gains") {
  SystemConfig cfg;
  cfg.S = 1;
  cfg.K = 1;
  cfg.Nt = 2;
  cfg.M = 5;
  cfg.frequencies = FrequencyPlan{{2.0e9}};
  Rng rng(9);
  const Geometry g = place_scenario(cfg, rng);
  const double eta = path_gain(cfg, cfg.L, cfg.alpha_bi);
  double acc = 0.0;
  long count = 0;
  for (int t = 0; t < 1000; ++t) {
    const ChannelSet ch = draw_channels(cfg, g, rng);
    acc += ch.bs[0].G.squaredNorm();
    count += ch.bs[0].G.size();
  }
  CHECK(acc / count == doctest::Approx(eta).epsilon(0.05));
}

TEST_CASE("zero reference gain gives zero channels") {
  SystemConfig cfg;
  cfg.C0 = 0.0;
  Rng rng(1);
  const ChannelSet ch = draw_channels(cfg, place_scenario(cfg, rng), rng);
  for (const auto& b : ch.bs) {
    CHECK(b.G.norm() == 0.0);
    CHECK(b.Hr.norm() == 0.0);
    CHECK(b.Hd.norm() == 0.0);
  }
}

TEST_CASE("channels are reproducible from the seed") {
  const SystemConfig cfg;
  Rng a(77), b(77);
  const ChannelSet x = draw_channels(cfg, place_scenario(cfg, a), a);
  const ChannelSet y = draw_channels(cfg, place_scenario(cfg, b), b);
  for (int s = 0; s < cfg.S; ++s) {
    CHECK(x.bs[s].G == y.bs[s].G);
    CHECK(x.bs[s].Hr == y.bs[s].Hr);
    CHECK(x.bs[s].Hd == y.bs[s].Hd);
  }
}

TEST_CASE("equivalent channels are full rank") {
  const SystemConfig cfg;
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const ChannelSet ch = draw_channels(cfg, place_scenario(cfg, rng), rng);
    for (const auto& b : ch.bs) {
      const CMat eq = b.G.adjoint() * b.Hr + b.Hd;
      const RVec sv = Eigen::JacobiSVD<CMat>(eq).singularValues();
      CHECK(sv(sv.size() - 1) > 1e-10 * sv(0));
    }
  }
}

TEST_CASE("configuration validation") {
  SystemConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.Nt = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SystemConfig{};
  cfg.S = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);  // three carriers listed
  cfg = SystemConfig{};
  cfg.sigma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("derived seeds differ per stream") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}

TEST_CASE("removing the surface zeroes the cascade only") {
  const SystemConfig cfg;
  Rng rng(2);
  const ChannelSet ch = draw_channels(cfg, place_scenario(cfg, rng), rng);
  const ChannelSet bare = without_irs(ch);
  for (int s = 0; s < cfg.S; ++s) {
    CHECK(bare.bs[s].Hr.norm() == 0.0);
    CHECK(bare.bs[s].Hd == ch.bs[s].Hd);
  }
}
