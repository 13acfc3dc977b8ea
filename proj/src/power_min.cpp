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

#include "irs/power_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace irs {

CMat solve_beamforming_socp(const CMat& H, double gamma, double sigma2,
                            const SocpOptions& options) {
  const Eigen::Index Nt = H.rows();
  const Eigen::Index K = H.cols();
  if (!(gamma > 0.0) || !(sigma2 > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "SOCP needs gamma > 0 and sigma2 > 0");
  }
  if (K == 0) return CMat(Nt, 0);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!(H.col(k).squaredNorm() > 0.0)) {
      throw Error(ErrorCode::infeasible, "SOCP: a user has an all-zero channel");
    }
  }

  // Virtual uplink: q_k = 1 / ((1 + 1/gamma) h_k^H Sigma(q)^{-1} h_k).
  RVec q = RVec::Zero(K);
  CMat sigma = CMat::Identity(Nt, Nt) * sigma2;
  bool converged = false;
  double first_total = 0.0;
  for (int it = 0; it < options.max_iter; ++it) {
    sigma = CMat::Identity(Nt, Nt) * sigma2;
    for (Eigen::Index j = 0; j < K; ++j) sigma += q(j) * H.col(j) * H.col(j).adjoint();
    Eigen::LLT<CMat> llt(sigma);
    const CMat X = llt.solve(H);
    RVec next(K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double t = std::real(H.col(k).dot(X.col(k)));
      next(k) = 1.0 / ((1.0 + 1.0 / gamma) * t);
    }
    if (!next.allFinite()) {
      throw Error(ErrorCode::infeasible, "SOCP: uplink power iteration produced non-finite powers");
    }
    if (it == 0) first_total = next.sum();
    if (next.sum() > 1e15 * first_total) {
      throw Error(ErrorCode::infeasible,
                  "SOCP: uplink power iteration diverges; channels not full rank");
    }
    const double change = ((next - q).cwiseAbs().array() / next.array()).maxCoeff();
    q = next;
    if (change < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::infeasible, "SOCP: uplink power iteration did not converge");
  }

  sigma = CMat::Identity(Nt, Nt) * sigma2;
  for (Eigen::Index j = 0; j < K; ++j) sigma += q(j) * H.col(j) * H.col(j).adjoint();
  CMat U = Eigen::LLT<CMat>(sigma).solve(H);
  for (Eigen::Index k = 0; k < K; ++k) U.col(k).normalize();

  // Downlink powers with every SINR constraint met with equality.
  RMat F(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index j = 0; j < K; ++j) {
      const double g = std::norm(H.col(k).dot(U.col(j)));
      F(k, j) = (j == k) ? g / gamma : -g;
    }
  }
  const RVec p = F.fullPivLu().solve(RVec::Constant(K, sigma2));
  if (!p.allFinite() || p.minCoeff() <= 0.0) {
    throw Error(ErrorCode::infeasible, "SOCP: downlink power system has no positive solution");
  }
  CMat W(Nt, K);
  for (Eigen::Index k = 0; k < K; ++k) W.col(k) = std::sqrt(p(k)) * U.col(k);
  return W;
}

double QosQuadratics::margin(const CVec& x) const {
  const cdouble quad = (x.transpose() * D * x.conjugate())(0, 0);
  const cdouble lin = (x.transpose() * b)(0, 0);
  return quad.real() + 2.0 * lin.real() + constant;
}

QosQuadratics build_qos_quadratics(const ChannelSet& channels, const CMat& W_s,
                                   const ReflectionState& state, double gamma,
                                   double sigma2, int s) {
  QosQuadratics out;
  const int M = channels.num_elements();
  for (int m = 0; m < M; ++m) {
    if (state.a(s, m) == 1) out.selected.push_back(m);
  }
  const auto n = static_cast<Eigen::Index>(out.selected.size());
  out.terms = cascade_terms(channels, W_s, s);
  out.D = CMat::Zero(n, n);
  out.b = CVec::Zero(n);
  const int K = static_cast<int>(out.terms.d.size());
  for (int k = 0; k < K; ++k) {
    out.constant -= gamma * sigma2;
    for (int j = 0; j < static_cast<int>(out.terms.d[k].size()); ++j) {
      const CVec& d = out.terms.d[k][j];
      // Unselected elements reflect with theta = 1 and fold into the offset.
      cdouble offset = out.terms.b[k][j] + d.sum();
      CVec d_hat(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        d_hat(i) = d(out.selected[i]);
        offset -= d_hat(i);
      }
      const double coef = (j == k) ? 1.0 : -gamma;
      out.D += coef * d_hat * d_hat.adjoint();
      out.b += coef * d_hat * std::conj(offset);
      out.constant += coef * std::norm(offset);
    }
  }
  return out;
}

double phase_objective(const CMat& D, const CVec& b, const CVec& x) {
  const cdouble quad = (x.transpose() * D * x.conjugate())(0, 0);
  const cdouble lin = (x.transpose() * b)(0, 0);
  return -quad.real() - 2.0 * lin.real();
}

CVec phase_gradient(const CMat& D, const CVec& b, const CVec& x) {
  return -2.0 * (D.conjugate() * x + b.conjugate());
}

namespace {

CVec tangent_projection(const CVec& x, const CVec& v) {
  CVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out(i) = v(i) - std::real(v(i) * std::conj(x(i))) * x(i);
  }
  return out;
}

CVec retract(const CVec& v) {
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = std::abs(v(i));
    out(i) = r > 0.0 ? v(i) / r : cdouble(1.0, 0.0);
  }
  return out;
}

double inner(const CVec& a, const CVec& b) { return std::real(a.dot(b)); }

}  // namespace

ManifoldResult optimize_phase_manifold(const CMat& D, const CVec& b, const CVec& theta_init,
                                       const ManifoldOptions& options,
                                       const std::function<void(const CVec&)>& observer) {
  if (D.rows() != D.cols() || D.rows() != b.size() || b.size() != theta_init.size()) {
    throw Error(ErrorCode::invalid_argument, "manifold problem: dimension mismatch");
  }
  ManifoldResult res;
  res.theta = retract(theta_init);
  if (theta_init.size() == 0) {
    res.converged = true;
    return res;
  }
  // Bound on the Riemannian gradient's Lipschitz constant, so that the unit
  // trial step does not overshoot.
  double scale = 4.0 * D.cwiseAbs().rowwise().sum().maxCoeff() + 2.0 * b.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) {
    res.objective = 0.0;
    res.converged = true;
    return res;
  }
  const CMat Dn = D / scale;
  const CVec bn = b / scale;

  CVec x = res.theta;
  double f = phase_objective(Dn, bn, x);
  CVec rg = tangent_projection(x, phase_gradient(Dn, bn, x));
  double gn = rg.norm();
  CVec dir = -rg;
  for (; res.iterations < options.max_iter; ++res.iterations) {
    if (gn <= options.grad_tol * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }
    double slope = inner(rg, dir);
    if (slope >= 0.0) {
      dir = -rg;
      slope = -gn * gn;
    }
    double t = options.initial_step;
    bool accepted = false;
    CVec xn;
    double fn = f;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      xn = retract(x + t * dir);
      fn = phase_objective(Dn, bn, xn);
      if (fn <= f + options.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= options.contraction;
    }
    if (!accepted) break;  // no representable descent left
    const CVec rgn = tangent_projection(xn, phase_gradient(Dn, bn, xn));
    const CVec rg_moved = tangent_projection(xn, rg);
    const CVec dir_moved = tangent_projection(xn, dir);
    double beta = std::max(0.0, inner(rgn, rgn - rg_moved) / (gn * gn));
    // Powell restart when successive gradients are far from orthogonal
    if (std::abs(inner(rgn, rg_moved)) >= 0.2 * rgn.squaredNorm()) beta = 0.0;
    dir = -rgn + beta * dir_moved;
    x = xn;
    f = fn;
    rg = rgn;
    gn = rg.norm();
    if (observer) observer(x);
  }
  if (!res.converged && gn <= options.grad_tol * (1.0 + std::abs(f))) res.converged = true;
  res.theta = x;
  res.objective = f * scale;
  res.grad_norm = gn;
  return res;
}

void reconstruct_phases(ReflectionState& state, const CVec& theta_hat, int s) {
  Eigen::Index i = 0;
  for (int m = 0; m < state.num_elements(); ++m) {
    if (state.a(s, m) != 1) continue;
    if (i >= theta_hat.size()) {
      throw Error(ErrorCode::invalid_argument, "fewer phases than selected elements");
    }
    state.phi(s, m) = wrap_phase(std::arg(theta_hat(i++)));
  }
  if (i != theta_hat.size()) {
    throw Error(ErrorCode::invalid_argument, "more phases than selected elements");
  }
}

namespace {

double min_sinr(const CMat& H, const CMat& W, double sigma2) {
  double v = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    v = std::min(v, sinr_from_channels(H, W, sigma2, static_cast<int>(k)));
  }
  return v;
}

}  // namespace

PerBsResult per_bs_bcd(const ChannelSet& channels, const ReflectionState& state,
                       double gamma, double sigma2, int s, const BcdOptions& options) {
  ReflectionState work = state;
  PerBsResult res;
  CVec theta = practical_reflection(work, s);
  CMat H = effective_channels(channels, theta, s);
  CMat W = solve_beamforming_socp(H, gamma, sigma2, options.socp);
  double p = bs_power(W);
  res.power_trace.push_back(p);
  res.sinr_min_trace.push_back(min_sinr(H, W, sigma2));
  res.W = W;
  res.phi_row = work.phi.row(s).transpose();
  res.iterations = 1;
  int increases = 0;
  for (int it = 1; it < options.max_iter; ++it) {
    const QosQuadratics q = build_qos_quadratics(channels, W, work, gamma, sigma2, s);
    if (q.selected.empty()) {
      res.converged = true;
      break;
    }
    CVec x0(q.selected.size());
    for (std::size_t i = 0; i < q.selected.size(); ++i) x0(i) = theta(q.selected[i]);
    const ManifoldResult mr = optimize_phase_manifold(q.D, q.b, x0, options.manifold);
    ReflectionState next = work;
    reconstruct_phases(next, mr.theta, s);

    CMat Hn, Wn;
    double pn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    if (!options.monotone) {
      Hn = effective_channels(channels, practical_reflection(next, s), s);
      Wn = solve_beamforming_socp(Hn, gamma, sigma2, options.socp);
      pn = bs_power(Wn);
      accepted = true;
    } else {
      // Shorten the phase move until the beamforming solve does not need
      // more power than the current iterate.
      const RVec from = work.phi.row(s).transpose();
      const RVec to = next.phi.row(s).transpose();
      double step = 1.0;
      for (int bt = 0; bt <= options.max_backtracks && !accepted; ++bt, step *= 0.5) {
        for (int m = 0; m < work.num_elements(); ++m) {
          next.phi(s, m) = wrap_phase(from(m) + step * std::remainder(to(m) - from(m), kTwoPi));
        }
        Hn = effective_channels(channels, practical_reflection(next, s), s);
        try {
          Wn = solve_beamforming_socp(Hn, gamma, sigma2, options.socp);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::infeasible) throw;
          continue;
        }
        pn = bs_power(Wn);
        accepted = pn <= p;
      }
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const double prev = p;
    work = next;
    theta = practical_reflection(work, s);
    H = Hn;
    W = Wn;
    p = pn;
    res.power_trace.push_back(p);
    res.sinr_min_trace.push_back(min_sinr(H, W, sigma2));
    res.iterations = it + 1;
    if (p < bs_power(res.W)) {
      res.W = W;
      res.phi_row = work.phi.row(s).transpose();
    }
    if (std::abs(prev - p) <= options.tol * prev) {
      res.converged = true;
      break;
    }
    if (p > prev) {
      if (++increases >= 2) {
        res.stalled = true;
        break;
      }
    } else {
      increases = 0;
    }
  }
  return res;
}

namespace {

void run_pass(const ChannelSet& channels, ReflectionState& state, BeamformerSet& beams,
              const SystemConfig& cfg, const BcdOptions& options, PowerMinReport& report,
              std::vector<int>& iter_offset) {
  const int S = channels.num_bs();
  for (int s = 0; s < S; ++s) {
    PerBsResult r;
    try {
      r = per_bs_bcd(channels, state, cfg.gamma, cfg.sigma2, s, options);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "BS " << s << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
    beams.W[s] = r.W;
    state.phi.row(s) = r.phi_row.transpose();
    for (std::size_t i = 0; i < r.power_trace.size(); ++i) {
      const bool last = i + 1 == r.power_trace.size();
      report.rows.push_back({iter_offset[s] + static_cast<int>(i), s, r.power_trace[i],
                             r.sinr_min_trace[i], last && r.converged});
    }
    iter_offset[s] += static_cast<int>(r.power_trace.size());
    report.iterations[s] += r.iterations;
    report.converged[s] = r.converged;
  }
}

void finish_report(const BeamformerSet& beams, PowerMinReport& report) {
  report.bs_power.clear();
  for (const auto& W : beams.W) report.bs_power.push_back(bs_power(W));
  report.total_power = total_power(beams);
}

}  // namespace

PowerMinResult run_algorithm1(const ChannelSet& channels, const SystemConfig& cfg,
                              const PowerMinOptions& options) {
  const int S = channels.num_bs();
  const int M = channels.num_elements();
  PowerMinResult res;
  res.beams.W.resize(S);
  res.report.iterations.assign(S, 0);
  res.report.converged.assign(S, false);
  std::vector<int> offsets(S, 0);

  // Step 1: every element tunable for every BS.
  ReflectionState ideal(S, M);
  ideal.a.setOnes();
  run_pass(channels, ideal, res.beams, cfg, options.bcd, res.report, offsets);

  // Step 2: service selection from the ideal designs.
  const SelectionQuadratics q =
      build_selection_quadratics(channels, res.beams, ideal.phi, cfg.gamma, cfg.sigma2);
  const RMat init = RMat::Constant(S, M, 1.0 / S);
  SelectionResult sel = run_selection(q, init, options.selection);
  res.report.selection = sel.report;

  // Step 3: redesign under the selection, warm-started from the ideal phases.
  res.state = ReflectionState(S, M);
  res.state.phi = ideal.phi;
  res.state.a = sel.A;
  run_pass(channels, res.state, res.beams, cfg, options.bcd, res.report, offsets);
  finish_report(res.beams, res.report);
  return res;
}

PowerMinResult optimize_with_fixed_selection(const ChannelSet& channels,
                                             const ReflectionState& state,
                                             const SystemConfig& cfg,
                                             const PowerMinOptions& options) {
  state.validate();
  const int S = channels.num_bs();
  PowerMinResult res;
  res.beams.W.resize(S);
  res.report.iterations.assign(S, 0);
  res.report.converged.assign(S, false);
  std::vector<int> offsets(S, 0);
  res.state = state;
  run_pass(channels, res.state, res.beams, cfg, options.bcd, res.report, offsets);
  finish_report(res.beams, res.report);
  return res;
}

void write_power_report_csv(std::ostream& out, const PowerMinReport& report,
                            std::uint64_t seed, bool header) {
  if (header) out << "seed,outer_iter,bs,power_watts,sinr_min,converged\n";
  for (const auto& r : report.rows) {
    out << seed << ',' << r.outer_iter << ',' << r.bs << ',' << r.power << ','
        << r.sinr_min << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace irs
