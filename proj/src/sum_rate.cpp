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

#include "irs/sum_rate.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace irs {

namespace {

CMat channels_of(const ChannelSet& channels, const ReflectionState& state, int s) {
  return effective_channels(channels, practical_reflection(state, s), s);
}

}  // namespace

std::vector<CVec> update_nu(const ChannelSet& channels, const ReflectionState& state,
                            const BeamformerSet& beams, double sigma2) {
  std::vector<CVec> nu(channels.num_bs());
  for (int s = 0; s < channels.num_bs(); ++s) {
    const CMat H = channels_of(channels, state, s);
    const CMat G = H.adjoint() * beams.W[s];  // G(k, j) = h_k^H w_j
    nu[s].resize(H.cols());
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
      nu[s](k) = G(k, k) / (G.row(k).squaredNorm() + sigma2);
    }
  }
  return nu;
}

std::vector<RVec> user_mse(const ChannelSet& channels, const ReflectionState& state,
                           const BeamformerSet& beams, const std::vector<CVec>& nu,
                           double sigma2) {
  std::vector<RVec> e(channels.num_bs());
  for (int s = 0; s < channels.num_bs(); ++s) {
    const CMat H = channels_of(channels, state, s);
    e[s].resize(H.cols());
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
      e[s](k) = mse_from_channels(H, beams.W[s], nu[s](k), sigma2, static_cast<int>(k));
    }
  }
  return e;
}

std::vector<RVec> update_mu(const std::vector<RVec>& mse) {
  std::vector<RVec> mu(mse.size());
  for (std::size_t s = 0; s < mse.size(); ++s) {
    if (mse[s].size() && !(mse[s].minCoeff() > 0.0)) {
      throw Error(ErrorCode::domain, "MSE weights need a positive MSE");
    }
    mu[s] = mse[s].cwiseInverse();
  }
  return mu;
}

BeamUpdate update_w(const CMat& H, const CVec& nu, const RVec& mu, double P) {
  const Eigen::Index Nt = H.rows();
  const Eigen::Index K = H.cols();
  if (!(P > 0.0)) throw Error(ErrorCode::invalid_argument, "power budget must be positive");
  if (mu.size() && !(mu.minCoeff() > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "MSE weights must be positive");
  }
  CMat Hbar(Nt, K);
  for (Eigen::Index k = 0; k < K; ++k) Hbar.col(k) = nu(k) * H.col(k);
  const CMat A = Hbar * mu.asDiagonal() * Hbar.adjoint();
  const CMat R = Hbar * mu.asDiagonal();

  Eigen::SelfAdjointEigenSolver<CMat> eig(A);
  const RVec lam = eig.eigenvalues().cwiseMax(0.0);
  const CMat U = eig.eigenvectors();
  const CMat T = U.adjoint() * R;
  const RVec weight = T.rowwise().squaredNorm();
  const double top = lam.size() ? lam.maxCoeff() : 0.0;
  const double floor = 1e-12 * top;

  auto power = [&](double l) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double denom = lam(i) + l;
      if (denom <= floor) continue;  // numerically null direction
      p += weight(i) / (denom * denom);
    }
    return p;
  };
  auto beams_at = [&](double l) {
    RVec inv(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double denom = lam(i) + l;
      inv(i) = denom <= floor ? 0.0 : 1.0 / denom;
    }
    return CMat(U * inv.asDiagonal() * T);
  };

  BeamUpdate out;
  if (!(top > 0.0)) {
    out.W = CMat::Zero(Nt, K);
    return out;
  }
  if (power(0.0) <= P) {
    out.W = beams_at(0.0);
    return out;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (power(hi) > P) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorCode::numerical, "power multiplier diverged");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = power(mid);
    if (p > P) lo = mid;
    else hi = mid;
    if (std::abs(power(hi) - P) <= 1e-12 * P) break;
  }
  out.lambda = hi;
  out.W = beams_at(hi);
  return out;
}

double wmmse_objective(const ChannelSet& channels, const ReflectionState& state,
                       const BeamformerSet& beams, const WmmseState& w, double sigma2) {
  const std::vector<RVec> e = user_mse(channels, state, beams, w.nu, sigma2);
  double v = 0.0;
  for (std::size_t s = 0; s < e.size(); ++s) {
    for (Eigen::Index k = 0; k < e[s].size(); ++k) {
      v += w.mu[s](k) * e[s](k) - std::log(w.mu[s](k));
    }
  }
  return v;
}

ElementQuadratics build_element_quadratics(const ChannelSet& channels,
                                           const BeamformerSet& beams,
                                           const WmmseState& w) {
  const int S = channels.num_bs();
  const int M = channels.num_elements();
  ElementQuadratics q;
  q.B.assign(S, CMat::Zero(M, M));
  q.c.assign(S, CVec::Zero(M));
  for (int s = 0; s < S; ++s) {
    const CascadeTerms t = cascade_terms(channels, beams.W[s], s);
    const int K = static_cast<int>(t.d.size());
    for (int k = 0; k < K; ++k) {
      const cdouble nu = w.nu[s](k);
      const double mu = w.mu[s](k);
      const double weight = mu * std::norm(nu);
      // theta^T d + b = u^H theta + b with u = conj(d)
      const CVec ukk = t.d[k][k].conjugate();
      q.c[s] += mu * nu * ukk;
      for (std::size_t j = 0; j < t.d[k].size(); ++j) {
        const CVec u = t.d[k][j].conjugate();
        q.B[s] += weight * u * u.adjoint();
        q.c[s] -= weight * t.b[k][j] * u;
      }
    }
  }
  return q;
}

double element_objective(const ElementQuadratics& q, const ReflectionState& state) {
  double v = 0.0;
  for (int s = 0; s < q.num_bs(); ++s) {
    const CVec theta = practical_reflection(state, s);
    v += std::real(theta.dot(q.B[s] * theta)) - 2.0 * std::real(theta.dot(q.c[s]));
  }
  return v;
}

cdouble element_zeta(const ElementQuadratics& q, const ReflectionState& state, int s, int m) {
  cdouble z = -q.c[s](m);
  for (int n = 0; n < q.num_elements(); ++n) {
    if (n == m) continue;
    z += q.B[s](m, n) * std::polar(1.0, state.phi(s, n) * state.a(s, n));
  }
  return z;
}

CVec element_zetas(const ElementQuadratics& q, const ReflectionState& state, int m) {
  CVec z(q.num_bs());
  for (int s = 0; s < q.num_bs(); ++s) z(s) = element_zeta(q, state, s, m);
  return z;
}

namespace {

// Element m's share of the objective, without the constant B(m, m) terms, when
// it serves BS `chosen` with phase `phi` and reflects with phase 0 elsewhere.
double element_share(const CVec& zeta, int chosen, double phi) {
  double v = 0.0;
  for (Eigen::Index s = 0; s < zeta.size(); ++s) {
    const cdouble theta = s == chosen ? std::polar(1.0, phi) : cdouble(1.0, 0.0);
    v += 2.0 * std::real(std::conj(theta) * zeta(s));
  }
  return v;
}

double best_phase(cdouble zeta) { return wrap_phase(kPi + std::arg(zeta)); }

}  // namespace

ElementChoice choose_element_enumerated(const CVec& zeta) {
  ElementChoice best;
  double best_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < zeta.size(); ++s) {
    const double phi = best_phase(zeta(s));
    const double v = element_share(zeta, static_cast<int>(s), phi);
    if (v < best_value) {
      best_value = v;
      best = {static_cast<int>(s), phi};
    }
  }
  return best;
}

ElementChoice choose_element(const CVec& zeta) {
  ElementChoice best;
  double best_score = -1.0;
  for (Eigen::Index s = 0; s < zeta.size(); ++s) {
    const double score = std::abs(zeta(s)) + std::real(zeta(s));
    if (score > best_score) {
      best_score = score;
      best = {static_cast<int>(s), best_phase(zeta(s))};
    }
  }
  return best;
}

ElementChoice update_element(const ElementQuadratics& q, ReflectionState& state, int m,
                             SelectionMode mode, bool enumerate) {
  if (m < 0 || m >= state.num_elements()) {
    throw Error(ErrorCode::invalid_argument, "element index out of range");
  }
  if (mode == SelectionMode::fixed) {
    ElementChoice c;
    c.bs = -1;
    for (int s = 0; s < state.num_bs(); ++s) {
      if (state.a(s, m) != 1) continue;
      c.bs = s;
      c.phi = best_phase(element_zeta(q, state, s, m));
      state.phi(s, m) = c.phi;
    }
    return c;
  }
  const CVec zeta = element_zetas(q, state, m);
  const ElementChoice c = enumerate ? choose_element_enumerated(zeta) : choose_element(zeta);
  state.a.col(m).setZero();
  state.a(c.bs, m) = 1;
  state.phi(c.bs, m) = c.phi;
  return c;
}

BeamformerSet mmse_beams(const ChannelSet& channels, const ReflectionState& state,
                         double P, double sigma2) {
  BeamformerSet beams;
  beams.W.resize(channels.num_bs());
  for (int s = 0; s < channels.num_bs(); ++s) {
    const CMat H = channels_of(channels, state, s);
    const Eigen::Index Nt = H.rows();
    const Eigen::Index K = H.cols();
    const CMat reg = H * H.adjoint() + (static_cast<double>(K) * sigma2 / P) *
                                           CMat::Identity(Nt, Nt);
    CMat V = reg.ldlt().solve(H);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double n = V.col(k).norm();
      V.col(k) *= n > 0.0 ? std::sqrt(P / static_cast<double>(K)) / n : 0.0;
    }
    beams.W[s] = V;
  }
  return beams;
}

ReflectionState random_reflection_state(int S, int M, Rng& rng) {
  ReflectionState st(S, M);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_int_distribution<int> pattern(0, S);
  for (int m = 0; m < M; ++m) {
    for (int s = 0; s < S; ++s) st.phi(s, m) = wrap_phase(angle(rng));
    const int p = pattern(rng);
    if (p < S) st.a(p, m) = 1;
  }
  return st;
}

namespace {

WmmseState optimal_weights(const ChannelSet& channels, const ReflectionState& state,
                           const BeamformerSet& beams, double sigma2) {
  WmmseState w;
  w.nu = update_nu(channels, state, beams, sigma2);
  w.mu = update_mu(user_mse(channels, state, beams, w.nu, sigma2));
  w.lambda.assign(channels.num_bs(), 0.0);
  return w;
}

void element_sweeps(const ElementQuadratics& q, ReflectionState& state,
                    const Algorithm2Options& options) {
  double prev = element_objective(q, state);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (int m = 0; m < state.num_elements(); ++m) {
      update_element(q, state, m, options.mode, options.enumerate);
    }
    const double cur = element_objective(q, state);
    if (std::abs(prev - cur) <= options.sweep_tol * std::abs(prev)) break;
    prev = cur;
  }
}

}  // namespace

Algorithm2Result run_algorithm2(const ChannelSet& channels, const SystemConfig& cfg,
                                const ReflectionState& init,
                                const Algorithm2Options& options) {
  init.validate();
  if (init.num_bs() != channels.num_bs() || init.num_elements() != channels.num_elements()) {
    throw Error(ErrorCode::invalid_argument, "initial reflection state has the wrong shape");
  }
  Algorithm2Result r;
  r.state = init;
  r.beams = mmse_beams(channels, r.state, cfg.P, cfg.sigma2);
  r.wmmse = optimal_weights(channels, r.state, r.beams, cfg.sigma2);
  double prev = wmmse_objective(channels, r.state, r.beams, r.wmmse, cfg.sigma2);
  r.trace.push_back({0, sum_rate(channels, r.state, r.beams, cfg.sigma2), prev});

  for (int it = 1; it <= options.max_outer; ++it) {
    r.wmmse = optimal_weights(channels, r.state, r.beams, cfg.sigma2);
    for (int s = 0; s < channels.num_bs(); ++s) {
      const CMat H = channels_of(channels, r.state, s);
      const BeamUpdate u = update_w(H, r.wmmse.nu[s], r.wmmse.mu[s], cfg.P);
      r.beams.W[s] = u.W;
      r.wmmse.lambda[s] = u.lambda;
    }
    if (options.optimize_reflection) {
      const ElementQuadratics q = build_element_quadratics(channels, r.beams, r.wmmse);
      element_sweeps(q, r.state, options);
    }
    const double cur = wmmse_objective(channels, r.state, r.beams, r.wmmse, cfg.sigma2);
    r.trace.push_back({it, sum_rate(channels, r.state, r.beams, cfg.sigma2), cur});
    r.iterations = it;
    if (std::abs(prev - cur) <= options.tol * std::max(std::abs(prev), 1.0)) {
      r.converged = true;
      break;
    }
    prev = cur;
  }
  r.sum_rate = r.trace.back().sum_rate;
  return r;
}

void write_rate_trace_csv(std::ostream& out, const std::vector<RateTraceRow>& trace,
                          std::uint64_t seed, bool header) {
  if (header) out << "seed,outer_iter,sum_rate_bps_hz,wmmse_objective\n";
  for (const auto& r : trace) {
    out << seed << ',' << r.outer_iter << ',' << r.sum_rate << ',' << r.objective << '\n';
  }
}

}  // namespace irs
