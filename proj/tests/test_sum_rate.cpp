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

#include "irs/sim_harness.hpp"
#include "irs/sum_rate.hpp"
#include "support/random.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace irs;
using namespace irs::testing;

namespace {

BeamformerSet random_beams(int S, int Nt, int K, Rng& rng) {
  BeamformerSet b;
  for (int s = 0; s < S; ++s) b.W.push_back(random_cmat(Nt, K, rng));
  return b;
}

WmmseState weights_at(const ChannelSet& ch, const ReflectionState& st, const BeamformerSet& b,
                      double sigma2) {
  WmmseState w;
  w.nu = update_nu(ch, st, b, sigma2);
  w.mu = update_mu(user_mse(ch, st, b, w.nu, sigma2));
  w.lambda.assign(ch.num_bs(), 0.0);
  return w;
}

double weighted_mse(const CMat& H, const CMat& W, const CVec& nu, const RVec& mu, double sigma2) {
  double v = 0.0;
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    v += mu(k) * mse_from_channels(H, W, nu(k), sigma2, static_cast<int>(k));
  }
  return v;
}

// Straightforward WMMSE on a fixed channel with a dense solve per multiplier.
double plain_wmmse_rate(const CMat& H, double P, double sigma2, int iterations) {
  const Eigen::Index Nt = H.rows(), K = H.cols();
  CMat W = (H * H.adjoint() + (K * sigma2 / P) * CMat::Identity(Nt, Nt)).inverse() * H;
  for (Eigen::Index k = 0; k < K; ++k) W.col(k) *= std::sqrt(P / K) / W.col(k).norm();
  auto rate = [&](const CMat& V) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      double sig = 0.0, den = sigma2;
      for (Eigen::Index j = 0; j < K; ++j) {
        const double g = std::norm(H.col(k).dot(V.col(j)));
        if (j == k) sig = g;
        else den += g;
      }
      r += std::log2(1.0 + sig / den);
    }
    return r;
  };
  for (int it = 0; it < iterations; ++it) {
    const CMat G = H.adjoint() * W;
    CMat A = CMat::Zero(Nt, Nt), R(Nt, K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double tot = G.row(k).squaredNorm() + sigma2;
      const cdouble u = G(k, k) / tot;
      const double e = 1.0 - std::norm(G(k, k)) / tot;
      const double w = 1.0 / e;
      A += w * std::norm(u) * H.col(k) * H.col(k).adjoint();
      R.col(k) = w * u * H.col(k);
    }
    auto solve = [&](double l) {
      return CMat((A + l * CMat::Identity(Nt, Nt)).fullPivLu().solve(R));
    };
    CMat next = solve(0.0);
    if (!(next.squaredNorm() <= P)) {
      double lo = 0.0, hi = 1.0;
      while (solve(hi).squaredNorm() > P) hi *= 2.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (solve(mid).squaredNorm() > P ? lo : hi) = mid;
      }
      next = solve(hi);
    }
    W = next;
  }
  return rate(W);
}

}  // namespace

TEST_CASE("receive scalars") {
  Rng rng(1);
  const ChannelSet ch = random_channels(2, 2, 3, 4, rng);
  const ReflectionState st = random_state(2, 4, rng);
  SUBCASE("zero beams give zero scalars") {
    BeamformerSet b;
    b.W.assign(2, CMat::Zero(3, 2));
    for (const CVec& n : update_nu(ch, st, b, 0.1)) CHECK(n.norm() == 0.0);
  }
  SUBCASE("single user closed form") {
    const ChannelSet one = random_channels(1, 1, 3, 4, rng);
    const ReflectionState s1 = random_state(1, 4, rng);
    const BeamformerSet b = random_beams(1, 3, 1, rng);
    const CMat H = effective_channels(one, practical_reflection(s1, 0), 0);
    const cdouble g = H.col(0).dot(b.W[0].col(0));
    const cdouble nu = update_nu(one, s1, b, 0.3)[0](0);
    CHECK(std::abs(nu - g / (std::norm(g) + 0.3)) < 1e-14);
  }
  SUBCASE("scalars minimize the MSE") {
    const BeamformerSet b = random_beams(2, 3, 2, rng);
    const std::vector<CVec> nu = update_nu(ch, st, b, 0.1);
    for (int s = 0; s < 2; ++s) {
      for (int k = 0; k < 2; ++k) {
        const double e0 = mse(ch, st, b, nu[s](k), 0.1, s, k);
        for (cdouble d : {cdouble(1e-4, 0), cdouble(0, 1e-4), cdouble(-1e-4, 0), cdouble(0, -1e-4)}) {
          CHECK(mse(ch, st, b, nu[s](k) + d, 0.1, s, k) >= e0);
        }
      }
    }
  }
  SUBCASE("weights are the inverse MSE and equal one plus SINR") {
    const BeamformerSet b = random_beams(2, 3, 2, rng);
    const std::vector<CVec> nu = update_nu(ch, st, b, 0.1);
    const std::vector<RVec> e = user_mse(ch, st, b, nu, 0.1);
    const std::vector<RVec> mu = update_mu(e);
    for (int s = 0; s < 2; ++s) {
      for (int k = 0; k < 2; ++k) {
        CHECK(mu[s](k) * e[s](k) == doctest::Approx(1.0));
        CHECK(mu[s](k) == doctest::Approx(1.0 + sinr(ch, st, b, 0.1, s, k)).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(update_mu({RVec::Zero(2)}), Error);
}

TEST_CASE("beam update") {
  Rng rng(2);
  SUBCASE("single user points along the channel at full power") {
    const CMat H = random_cmat(4, 1, rng, 0.01);
    CVec nu(1);
    nu(0) = cdouble(0.3, -0.2);
    const BeamUpdate u = update_w(H, nu, RVec::Constant(1, 2.0), 1.0);
    CHECK(u.W.squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
    const CVec dir = H.col(0).normalized();
    CHECK(std::abs(std::abs(dir.dot(u.W.col(0))) - u.W.col(0).norm()) < 1e-8);
    CHECK(u.lambda > 0.0);
  }
  SUBCASE("active budget is met and the update is optimal") {
    for (int t = 0; t < 20; ++t) {
      const CMat H = random_cmat(3, 2, rng, 0.05);
      const CVec nu = random_cvec(2, rng, 3.0);
      const RVec mu = (RVec(2) << 1.5, 4.0).finished();
      const double P = 0.5;
      const BeamUpdate u = update_w(H, nu, mu, P);
      if (u.lambda > 0.0) CHECK(u.W.squaredNorm() == doctest::Approx(P).epsilon(1e-8));
      CHECK(u.W.squaredNorm() <= P * (1.0 + 1e-10));
      const double f0 = weighted_mse(H, u.W, nu, mu, 0.0);
      for (int j = 0; j < 50; ++j) {
        CMat V = u.W + random_cmat(3, 2, rng, 1e-3);
        if (V.squaredNorm() > P) V *= std::sqrt(P / V.squaredNorm());
        CHECK(weighted_mse(H, V, nu, mu, 0.0) >= f0 - 1e-10);
      }
    }
  }
  SUBCASE("inactive budget returns the unconstrained solution") {
    const CMat H = random_cmat(2, 2, rng, 10.0);
    const BeamUpdate u = update_w(H, CVec::Ones(2), RVec::Ones(2), 100.0);
    CHECK(u.lambda == 0.0);
    CHECK((u.W - H.adjoint().inverse()).norm() < 1e-10);
  }
  CHECK_THROWS_AS(update_w(CMat::Ones(2, 1), CVec::Ones(1), RVec::Ones(1), 0.0), Error);
}

TEST_CASE("element quadratics") {
  Rng rng(3);
  const ChannelSet ch = random_channels(2, 2, 3, 5, rng);
  const ReflectionState st = random_state(2, 5, rng);
  const BeamformerSet b = random_beams(2, 3, 2, rng);
  const WmmseState w = weights_at(ch, st, b, 0.2);
  const ElementQuadratics q = build_element_quadratics(ch, b, w);
  for (int s = 0; s < 2; ++s) {
    CHECK((q.B[s] - q.B[s].adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> eig(q.B[s]);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * eig.eigenvalues().maxCoeff());
  }
  SUBCASE("differences match the WMMSE objective") {
    const double base = wmmse_objective(ch, st, b, w, 0.2) - element_objective(q, st);
    for (int t = 0; t < 20; ++t) {
      const ReflectionState other = random_state(2, 5, rng);
      CHECK(wmmse_objective(ch, other, b, w, 0.2) - element_objective(q, other) ==
            doctest::Approx(base).epsilon(1e-8));
    }
  }
  SUBCASE("zero beams give zero quadratics") {
    BeamformerSet z;
    z.W.assign(2, CMat::Zero(3, 2));
    const ElementQuadratics qz = build_element_quadratics(ch, z, w);
    for (int s = 0; s < 2; ++s) {
      CHECK(qz.B[s].norm() == 0.0);
      CHECK(qz.c[s].norm() == 0.0);
    }
  }
  SUBCASE("zeta is the element's coupling") {
    const int m = 3;
    for (int s = 0; s < 2; ++s) {
      const cdouble z = element_zeta(q, st, s, m);
      const CVec th = practical_reflection(st, s);
      cdouble ref = -q.c[s](m);
      for (int n = 0; n < 5; ++n)
        if (n != m) ref += q.B[s](m, n) * th(n);
      CHECK(std::abs(z - ref) < 1e-12);
      CHECK(element_zetas(q, st, m)(s) == z);
    }
  }
}

TEST_CASE("single element, single user by hand") {
  ChannelSet ch;
  ch.bs.resize(1);
  ch.bs[0].G = CMat::Constant(1, 1, cdouble(0.0, 2.0));
  ch.bs[0].Hr = CMat::Constant(1, 1, cdouble(1.0, 0.0));
  ch.bs[0].Hd = CMat::Constant(1, 1, cdouble(0.5, 0.0));
  BeamformerSet b;
  b.W = {CMat::Constant(1, 1, cdouble(1.0, 0.0))};
  WmmseState w;
  w.nu = {CVec::Constant(1, cdouble(0.5, 0.5))};
  w.mu = {RVec::Constant(1, 2.0)};
  w.lambda = {0.0};
  const ElementQuadratics q = build_element_quadratics(ch, b, w);
  const CascadeTerms t = cascade_terms(ch, b.W[0], 0);
  const cdouble d = t.d[0][0](0);
  const cdouble bb = t.b[0][0];
  // mu |nu|^2 |d theta + b|^2 - 2 mu Re{nu^* (d theta + b)} up to constants
  CHECK(q.B[0](0, 0).real() == doctest::Approx(2.0 * 0.5 * std::norm(d)));
  const cdouble c = 2.0 * cdouble(0.5, 0.5) * std::conj(d) - 2.0 * 0.5 * bb * std::conj(d);
  CHECK(std::abs(q.c[0](0) - c) < 1e-14);
}

TEST_CASE("closed-form element rule") {
  SUBCASE("two BSs by hand") {
    const CVec z = (CVec(2) << cdouble(-1, 0), cdouble(0.5, 0)).finished();
    const ElementChoice c = choose_element(z);
    CHECK(c.bs == 1);
    CHECK(c.phi == doctest::Approx(kPi));
  }
  SUBCASE("all-zero couplings pick the first BS") {
    const ElementChoice c = choose_element(CVec::Zero(3));
    CHECK(c.bs == 0);
    CHECK(c.phi == doctest::Approx(kPi));
  }
  SUBCASE("rearranged rule equals enumeration") {
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
      const CVec z = random_cvec(1 + t % 4, rng);
      const ElementChoice a = choose_element(z);
      const ElementChoice e = choose_element_enumerated(z);
      CHECK(a.bs == e.bs);
      CHECK(a.phi == doctest::Approx(e.phi).epsilon(1e-12));
    }
  }
  SUBCASE("update matches a fine grid over every BS and phase") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
      const ChannelSet ch = random_channels(3, 2, 2, 4, rng);
      ReflectionState st = random_state(3, 4, rng);
      const BeamformerSet b = random_beams(3, 2, 2, rng);
      const ElementQuadratics q = build_element_quadratics(ch, b, weights_at(ch, st, b, 0.3));
      const int m = t % 4;
      double best = 1e300;
      for (int s = 0; s < 3; ++s) {
        for (int i = 0; i < 3600; ++i) {
          ReflectionState trial = st;
          trial.a.col(m).setZero();
          trial.a(s, m) = 1;
          trial.phi(s, m) = kTwoPi * (i + 1) / 3600.0;
          best = std::min(best, element_objective(q, trial));
        }
      }
      update_element(q, st, m);
      CHECK(element_objective(q, st) <= best + 1e-9 * std::abs(best));
      CHECK(st.a.col(m).sum() == 1);
    }
  }
  SUBCASE("fixed mode keeps the selection") {
    Rng rng(6);
    const ChannelSet ch = random_channels(2, 2, 2, 3, rng);
    ReflectionState st = random_state(2, 3, rng);
    st.a.setZero();
    st.a(1, 0) = 1;
    const BeamformerSet b = random_beams(2, 2, 2, rng);
    const ElementQuadratics q = build_element_quadratics(ch, b, weights_at(ch, st, b, 0.3));
    const double before = element_objective(q, st);
    CHECK(update_element(q, st, 0, SelectionMode::fixed).bs == 1);
    CHECK(update_element(q, st, 1, SelectionMode::fixed).bs == -1);
    CHECK(st.a(1, 0) == 1);
    CHECK(st.a.sum() == 1);
    CHECK(element_objective(q, st) <= before + 1e-12);
  }
  CHECK_THROWS_AS(
      [] {
        ReflectionState st(1, 2);
        update_element(ElementQuadratics{}, st, 5);
      }(),
      Error);
}

TEST_CASE("MMSE initial beams use the budget evenly") {
  Rng rng(7);
  const ChannelSet ch = random_channels(2, 3, 4, 5, rng);
  const BeamformerSet b = mmse_beams(ch, random_state(2, 5, rng), 0.6, 0.1);
  for (const CMat& W : b.W)
    for (Eigen::Index k = 0; k < W.cols(); ++k)
      CHECK(W.col(k).squaredNorm() == doctest::Approx(0.2));
}

TEST_CASE("random reflection states are valid") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const ReflectionState st = random_reflection_state(3, 10, rng);
    CHECK_NOTHROW(st.validate());
  }
}

TEST_CASE("alternating optimization") {
  SUBCASE("one BS without selected elements is plain WMMSE") {
    SystemConfig cfg;
    cfg.S = 1;
    cfg.frequencies = FrequencyPlan{{2.345e9}};
    const ChannelSet ch = trial_channels(cfg, 11, 0);
    Algorithm2Options opt;
    opt.mode = SelectionMode::fixed;
    const Algorithm2Result r = run_algorithm2(ch, cfg, ReflectionState(1, cfg.M), opt);
    const CMat H = effective_channels(ch, CVec::Ones(cfg.M), 0);
    CHECK(r.sum_rate == doctest::Approx(plain_wmmse_rate(H, cfg.P, cfg.sigma2, r.iterations))
                            .epsilon(1e-6));
  }
  SUBCASE("traces are monotone and budgets respected") {
    const SystemConfig cfg;
    for (int seed = 0; seed < 10; ++seed) {
      const ChannelSet ch = trial_channels(cfg, 300 + seed, 0);
      Rng rng(seed);
      const Algorithm2Result r = run_algorithm2(ch, cfg, random_reflection_state(cfg.S, cfg.M, rng));
      CHECK(r.trace.front().outer_iter == 0);
      for (std::size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].objective <= r.trace[i - 1].objective + 1e-9);
      }
      for (const CMat& W : r.beams.W) CHECK(bs_power(W) <= cfg.P * (1.0 + 1e-9));
      CHECK_NOTHROW(r.state.validate());
      CHECK(r.sum_rate == doctest::Approx(sum_rate(ch, r.state, r.beams, cfg.sigma2)));
      CHECK(r.converged);
    }
  }
  SUBCASE("rate equals the log of the optimal weights") {
    const SystemConfig cfg;
    const ChannelSet ch = trial_channels(cfg, 12, 0);
    Rng rng(12);
    const Algorithm2Result r = run_algorithm2(ch, cfg, random_reflection_state(cfg.S, cfg.M, rng));
    const WmmseState w = weights_at(ch, r.state, r.beams, cfg.sigma2);
    double total = 0.0;
    for (const RVec& mu : w.mu) total += mu.array().log2().sum();
    CHECK(total == doctest::Approx(r.sum_rate).epsilon(1e-10));
  }
  SUBCASE("shape mismatch is rejected") {
    const SystemConfig cfg;
    const ChannelSet ch = trial_channels(cfg, 13, 0);
    CHECK_THROWS_AS(run_algorithm2(ch, cfg, ReflectionState(2, cfg.M)), Error);
  }
}

TEST_CASE("rate trace CSV") {
  std::ostringstream os;
  write_rate_trace_csv(os, {{0, 1.5, -0.25}, {1, 2.0, -0.5}}, 7);
  CHECK(os.str() == "seed,outer_iter,sum_rate_bps_hz,wmmse_objective\n7,0,1.5,-0.25\n7,1,2,-0.5\n");
}

TEST_CASE("MSE weights by hand") {
  const std::vector<RVec> mu = update_mu({(RVec(2) << 1.0, 0.5).finished()});
  CHECK(mu[0](0) == 1.0);
  CHECK(mu[0](1) == 2.0);
}

TEST_CASE("beam update satisfies the stationarity condition") {
  Rng rng(20);
  for (int t = 0; t < 20; ++t) {
    const CMat H = random_cmat(4, 3, rng, 0.1);
    const CVec nu = random_cvec(3, rng, 2.0);
    const RVec mu = (RVec(3) << 1.0, 2.0, 3.0).finished();
    const BeamUpdate u = update_w(H, nu, mu, 0.3);
    CMat A = CMat::Zero(4, 4), R(4, 3);
    for (int k = 0; k < 3; ++k) {
      const CVec hb = nu(k) * H.col(k);
      A += mu(k) * hb * hb.adjoint();
      R.col(k) = mu(k) * hb;
    }
    const CMat residual = (A + u.lambda * CMat::Identity(4, 4)) * u.W - R;
    CHECK(residual.norm() <= 1e-5 * R.norm());
    CHECK(u.lambda >= 0.0);
  }
}
