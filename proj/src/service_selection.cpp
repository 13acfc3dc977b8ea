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

#include "irs/service_selection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace irs {

SelectionQuadratics build_selection_quadratics(const ChannelSet& channels,
                                               const BeamformerSet& beams,
                                               const RMat& phi, double gamma,
                                               double /*sigma2*/) {
  const int S = channels.num_bs();
  const int M = channels.num_elements();
  if (beams.num_bs() != S || phi.rows() != S || phi.cols() != M) {
    throw Error(ErrorCode::invalid_argument, "selection quadratics: shape mismatch");
  }
  SelectionQuadratics q;
  q.E.assign(S, CMat::Zero(M, M));
  q.D.assign(S, CMat::Zero(M, M));
  q.beta.assign(S, CVec::Zero(M));
  q.d_tilde.resize(S);
  q.b_tilde.resize(S);
  for (int s = 0; s < S; ++s) {
    const CascadeTerms t = cascade_terms(channels, beams.W[s], s);
    CVec rot(M);
    for (int m = 0; m < M; ++m) rot(m) = std::polar(1.0, phi(s, m)) - 1.0;
    const int K = static_cast<int>(t.d.size());
    const int J = K == 0 ? 0 : static_cast<int>(t.d.front().size());
    q.d_tilde[s].assign(K, std::vector<CVec>(J));
    q.b_tilde[s].assign(K, std::vector<cdouble>(J));
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < J; ++j) {
        q.d_tilde[s][k][j] = rot.cwiseProduct(t.d[k][j]);
        q.b_tilde[s][k][j] = t.d[k][j].sum() + t.b[k][j];
      }
    }
    for (int k = 0; k < K; ++k) {
      const CVec& dkk = q.d_tilde[s][k][k];
      const cdouble bkk = q.b_tilde[s][k][k];
      q.E[s] += (1.0 + gamma) * dkk * dkk.adjoint();
      q.beta[s] += 2.0 * dkk * std::conj(bkk);
      q.constant += std::norm(bkk);
      for (int j = 0; j < J; ++j) {
        const CVec& dkj = q.d_tilde[s][k][j];
        q.D[s] += gamma * dkj * dkj.adjoint();
        if (j == k) continue;
        q.beta[s] -= 2.0 * gamma * dkj * std::conj(q.b_tilde[s][k][j]);
        q.constant -= gamma * std::norm(q.b_tilde[s][k][j]);
      }
    }
  }
  return q;
}

SelectionQuadratics normalized(const SelectionQuadratics& q, double* scale) {
  double mx = 0.0;
  for (int s = 0; s < q.num_bs(); ++s) {
    mx = std::max({mx, q.E[s].cwiseAbs().maxCoeff(), q.D[s].cwiseAbs().maxCoeff(),
                   q.beta[s].size() ? q.beta[s].cwiseAbs().maxCoeff() : 0.0});
  }
  if (!(mx > 0.0)) mx = 1.0;
  SelectionQuadratics out = q;
  for (int s = 0; s < q.num_bs(); ++s) {
    out.E[s] /= mx;
    out.D[s] /= mx;
    out.beta[s] /= mx;
  }
  out.constant /= mx;
  if (scale) *scale = mx;
  return out;
}

double selection_objective(const SelectionQuadratics& q, const RMat& a) {
  double v = 0.0;
  for (int s = 0; s < q.num_bs(); ++s) {
    const RVec row = a.row(s).transpose();
    v += row.dot(q.E[s].real() * row) - row.dot(q.D[s].real() * row) +
         row.dot(q.beta[s].real());
  }
  return v;
}

double qos_margin_through_model(const ChannelSet& channels, const BeamformerSet& beams,
                                const ReflectionState& state, double gamma) {
  double v = 0.0;
  for (int s = 0; s < channels.num_bs(); ++s) {
    const CMat H = effective_channels(channels, practical_reflection(state, s), s);
    const CMat& W = beams.W[s];
    for (Eigen::Index k = 0; k < H.cols(); ++k) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        const double g = std::norm(H.col(k).dot(W.col(j)));
        v += (j == k) ? g : -gamma * g;
      }
    }
  }
  return v;
}

double binary_violation(const RMat& a) { return a.sum() - a.squaredNorm(); }

double penalized_objective(const SelectionQuadratics& q, const RMat& a, double tau) {
  return selection_objective(q, a) - tau * binary_violation(a);
}

double surrogate_objective(const SelectionQuadratics& q, const RMat& a,
                           const RMat& anchor, double tau) {
  double v = 0.0;
  for (int s = 0; s < q.num_bs(); ++s) {
    const RVec x = a.row(s).transpose();
    const RVec x0 = anchor.row(s).transpose();
    const RVec Ex0 = q.E[s].real() * x0;
    v += -x0.dot(Ex0) + 2.0 * x.dot(Ex0);
    v += -x.dot(q.D[s].real() * x) + x.dot(q.beta[s].real());
    v += -tau * x.sum() + 2.0 * tau * x0.dot(x) - tau * x0.squaredNorm();
  }
  return v;
}

RVec project_column(const RVec& v) {
  RVec x = v.cwiseMax(0.0).cwiseMin(1.0);
  if (x.sum() <= 1.0) return x;
  // Sum constraint active: the box's upper bound cannot bind, so this is the
  // projection onto the probability simplex.
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) shift = t;
  }
  return (v.array() - shift).cwiseMax(0.0).matrix();
}

namespace {

RMat project_columns(const RMat& a) {
  RMat out(a.rows(), a.cols());
  for (Eigen::Index m = 0; m < a.cols(); ++m) out.col(m) = project_column(a.col(m));
  return out;
}

}  // namespace

MmStepResult mm_step(const SelectionQuadratics& q, const MmState& state,
                     const MmStepOptions& options) {
  const int S = q.num_bs();
  const int M = q.num_elements();
  // Linear coefficient of the surrogate: 2 E a_t + beta + tau (2 a_t - 1).
  RMat lin(S, M);
  std::vector<RMat> Dr(S);
  double lipschitz = 0.0;
  for (int s = 0; s < S; ++s) {
    const RVec x0 = state.a.row(s).transpose();
    const RVec c = 2.0 * (q.E[s].real() * x0) + q.beta[s].real() +
                   state.tau * (2.0 * x0 - RVec::Ones(M));
    lin.row(s) = c.transpose();
    Dr[s] = q.D[s].real();
    if (M > 0) {
      Eigen::SelfAdjointEigenSolver<RMat> eig(Dr[s], Eigen::EigenvaluesOnly);
      lipschitz = std::max(lipschitz, 2.0 * eig.eigenvalues().maxCoeff());
    }
  }
  const double scale = std::max({lin.size() ? lin.cwiseAbs().maxCoeff() : 0.0, lipschitz, 1e-300});
  const double step = 1.0 / std::max(lipschitz, 1e-9 * scale);

  MmStepResult r;
  r.a = project_columns(state.a);
  for (; r.iterations < options.max_iter; ++r.iterations) {
    RMat grad(S, M);
    for (int s = 0; s < S; ++s) {
      grad.row(s) = (lin.row(s).transpose() - 2.0 * (Dr[s] * r.a.row(s).transpose())).transpose();
    }
    const RMat next = project_columns(r.a + step * grad);
    const double pg = (next - r.a).norm() / step;
    r.a = next;
    if (pg < options.tol) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

IMat round_selection(const RMat& relaxed) {
  IMat A = IMat::Zero(relaxed.rows(), relaxed.cols());
  for (Eigen::Index m = 0; m < relaxed.cols(); ++m) {
    Eigen::Index best = 0;
    const double v = relaxed.col(m).maxCoeff(&best);
    if (v > 0.5) A(best, m) = 1;
  }
  return A;
}

SelectionResult run_selection(const SelectionQuadratics& raw, const RMat& init,
                              const SelectionOptions& options) {
  const int S = raw.num_bs();
  const int M = raw.num_elements();
  if (init.rows() != S || init.cols() != M) {
    throw Error(ErrorCode::invalid_argument, "selection init has the wrong shape");
  }
  for (Eigen::Index m = 0; m < init.cols(); ++m) {
    if (init.col(m).minCoeff() < -1e-9 || init.col(m).maxCoeff() > 1.0 + 1e-9 ||
        init.col(m).sum() > 1.0 + 1e-9) {
      throw Error(ErrorCode::invalid_argument, "selection init is infeasible");
    }
  }
  const SelectionQuadratics q = normalized(raw);

  CMat total = CMat::Zero(M, M);
  for (int s = 0; s < S; ++s) total += q.E[s];
  double tau = 0.0;
  if (M > 0) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(total, Eigen::EigenvaluesOnly);
    tau = options.tau_scale * eig.eigenvalues().cwiseAbs().maxCoeff();
  }
  if (!(tau > 0.0)) tau = options.tau_scale;

  SelectionResult res;
  MmState state{init, tau, 0};
  SelectionReport& rep = res.report;
  for (int stage = 0; stage < options.max_stages; ++stage) {
    for (int it = 0; it < options.max_mm_per_stage; ++it) {
      const double before = penalized_objective(q, state.a, state.tau);
      MmStepResult step = mm_step(q, state, options.step);
      if (!step.converged) ++rep.inner_nonconverged;
      const double after = penalized_objective(q, step.a, state.tau);
      const double change = (step.a - state.a).cwiseAbs().maxCoeff();
      state.a = std::move(step.a);
      ++state.t;
      rep.penalized_before.push_back(before);
      rep.penalized_after.push_back(after);
      rep.tau.push_back(state.tau);
      rep.violation.push_back(binary_violation(state.a));
      if (change < options.mm_tol) break;
    }
    if (binary_violation(state.a) <= options.violation_tol) {
      rep.converged = true;
      break;
    }
    state.tau *= options.tau_growth;
  }
  rep.mm_iterations = state.t;
  rep.final_violation = binary_violation(state.a);
  rep.rounding_fallback = !rep.converged;
  res.relaxed = state.a;
  res.A = round_selection(state.a);
  return res;
}

}  // namespace irs
