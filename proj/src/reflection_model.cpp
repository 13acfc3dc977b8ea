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

#include "irs/reflection_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace irs {

void CircuitParams::validate() const {
  if (!(L1 > 0.0) || !(L2 > 0.0) || !(R >= 0.0) || !(Z0 > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "circuit parameters require L1 > 0, L2 > 0, R >= 0, Z0 > 0");
  }
}

void FrequencyPlan::validate() const {
  if (frequencies.empty()) {
    throw Error(ErrorCode::invalid_argument, "frequency plan is empty");
  }
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "frequencies must be positive");
    }
    if (i > 0 && !(frequencies[i] < frequencies[i - 1])) {
      throw Error(ErrorCode::invalid_argument,
                  "frequencies must be strictly descending");
    }
  }
}

ReflectionState::ReflectionState(int num_bs, int num_elements)
    : phi(RMat::Constant(num_bs, num_elements, kTwoPi)),
      a(IMat::Zero(num_bs, num_elements)) {}

bool ReflectionState::selection_is_exclusive() const {
  for (int m = 0; m < a.cols(); ++m) {
    int ones = 0;
    for (int s = 0; s < a.rows(); ++s) {
      const int v = a(s, m);
      if (v != 0 && v != 1) return false;
      ones += v;
    }
    if (ones > 1) return false;
  }
  return true;
}

void ReflectionState::validate() const {
  if (phi.rows() != a.rows() || phi.cols() != a.cols()) {
    throw Error(ErrorCode::invalid_argument, "phase and selection shapes differ");
  }
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double p = phi.data()[i];
    if (!(p > 0.0 && p <= kTwoPi)) {
      throw Error(ErrorCode::invalid_argument, "phase outside (0, 2pi]");
    }
  }
  if (!selection_is_exclusive()) {
    throw Error(ErrorCode::invalid_argument,
                "each element may serve at most one BS with a binary indicator");
  }
}

cdouble impedance(const CircuitParams& params, double capacitance, double frequency) {
  if (!(capacitance > 0.0) || !(frequency > 0.0)) {
    throw Error(ErrorCode::domain, "impedance requires C > 0 and f > 0");
  }
  const double w = kTwoPi * frequency;
  const cdouble j(0.0, 1.0);
  const cdouble shunt = j * w * params.L1;
  const cdouble branch = j * w * params.L2 + 1.0 / (j * w * capacitance) + params.R;
  return shunt * branch / (shunt + branch);
}

cdouble reflection_coefficient(const CircuitParams& params, double capacitance,
                               double frequency) {
  const cdouble z = impedance(params, capacitance, frequency);
  const cdouble den = z + params.Z0;
  if (std::abs(den) < 1e-12) {
    throw Error(ErrorCode::numerical, "Z + Z0 vanishes; reflection undefined");
  }
  return (z - params.Z0) / den;
}

std::vector<double> unwrapped_phase(const CircuitParams& params, double frequency,
                                    const std::vector<double>& capacitances) {
  std::vector<double> out;
  out.reserve(capacitances.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < capacitances.size(); ++i) {
    double p = std::arg(reflection_coefficient(params, capacitances[i], frequency));
    if (i > 0) {
      while (p - prev > kPi) p -= kTwoPi;
      while (p - prev < -kPi) p += kTwoPi;
    }
    out.push_back(p);
    prev = p;
  }
  return out;
}

namespace {

struct IndexRange {
  int lo = 0;
  int hi = 0;
};

// Narrowest grid window whose phase excursion reaches `target`.
IndexRange narrowest_window(const std::vector<double>& phase, double target) {
  const int n = static_cast<int>(phase.size());
  IndexRange best{0, n - 1};
  for (int i = 0; i < n; ++i) {
    double lo = phase[i], hi = phase[i];
    for (int j = i + 1; j < n && j - i < best.hi - best.lo; ++j) {
      lo = std::min(lo, phase[j]);
      hi = std::max(hi, phase[j]);
      if (hi - lo >= target) {
        best = {i, j};
        break;
      }
    }
  }
  return best;
}

}  // namespace

CapacitancePartition partition_capacitance(const CircuitParams& params,
                                           const FrequencyPlan& plan,
                                           const CapacitanceSweep& sweep) {
  params.validate();
  plan.validate();
  if (!(sweep.c_min > 0.0) || !(sweep.c_max > sweep.c_min) || sweep.points < 2) {
    throw Error(ErrorCode::invalid_argument, "invalid capacitance sweep");
  }
  if (!(sweep.span_fraction > 0.0 && sweep.span_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "span fraction must be in (0, 1]");
  }

  const int n = sweep.points;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = sweep.c_min + (sweep.c_max - sweep.c_min) * i / (n - 1);
  }

  const std::size_t num_f = plan.size();
  std::vector<IndexRange> raw(num_f);
  for (std::size_t s = 0; s < num_f; ++s) {
    const auto phase = unwrapped_phase(params, plan.frequencies[s], grid);
    const auto [mn, mx] = std::minmax_element(phase.begin(), phase.end());
    raw[s] = narrowest_window(phase, sweep.span_fraction * (*mx - *mn));
  }

  for (std::size_t s = 0; s < num_f; ++s) {
    for (std::size_t t = s + 1; t < num_f; ++t) {
      const int ov = std::min(raw[s].hi, raw[t].hi) - std::max(raw[s].lo, raw[t].lo);
      if (ov <= 0) continue;
      const int narrow = std::max(1, std::min(raw[s].hi - raw[s].lo, raw[t].hi - raw[t].lo));
      const double frac = static_cast<double>(ov) / narrow;
      if (frac > sweep.max_overlap) {
        std::ostringstream msg;
        msg << "tunable ranges of " << plan.frequencies[s] << " Hz and "
            << plan.frequencies[t] << " Hz overlap by " << 100.0 * frac
            << "%; frequencies too close for the selection model";
        throw Error(ErrorCode::domain, msg.str());
      }
    }
  }

  // Resolve overlaps between neighbours (in capacitance order) at the midpoint.
  std::vector<std::size_t> order(num_f);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return raw[x].lo < raw[y].lo; });
  std::vector<IndexRange> cut = raw;
  for (std::size_t k = 1; k < num_f; ++k) {
    IndexRange& prev = cut[order[k - 1]];
    IndexRange& next = cut[order[k]];
    if (next.lo <= prev.hi) {
      const int mid = (next.lo + prev.hi) / 2;
      prev.hi = mid;
      next.lo = mid + 1;
      if (next.hi < next.lo || prev.hi < prev.lo) {
        throw Error(ErrorCode::domain, "nested tunable ranges cannot be separated");
      }
    }
  }

  CapacitancePartition out;
  out.frequencies = plan.frequencies;
  out.sweep_lo = grid.front();
  out.sweep_hi = grid.back();
  out.tunable.resize(num_f);
  for (std::size_t s = 0; s < num_f; ++s) {
    out.tunable[s] = {grid[cut[s].lo], grid[cut[s].hi]};
  }

  int next_free = 0;
  for (std::size_t k = 0; k < num_f; ++k) {
    const IndexRange& r = cut[order[k]];
    if (r.lo > next_free) out.gray.push_back({grid[next_free], grid[r.lo - 1]});
    next_free = std::max(next_free, r.hi + 1);
  }
  if (next_free < n) out.gray.push_back({grid[next_free], grid[n - 1]});
  return out;
}

CVec practical_reflection(const ReflectionState& state, int s) {
  const int m_count = state.num_elements();
  CVec theta(m_count);
  for (int m = 0; m < m_count; ++m) {
    theta(m) = std::polar(1.0, state.phi(s, m) * state.a(s, m));
  }
  return theta;
}

}  // namespace irs
