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

#include <vector>

namespace irs {

/// Equivalent-circuit constants of one reflecting element: an inductance L1 in
/// parallel with a series L2-C-R branch, radiating into free space of
/// impedance Z0.
struct CircuitParams {
  double L1 = 2.5e-9;
  double L2 = 0.7e-9;
  double R = 1.0;
  double Z0 = 377.0;

  void validate() const;
};

/// Carrier frequencies of the S base stations, strictly descending.
struct FrequencyPlan {
  std::vector<double> frequencies;

  std::size_t size() const { return frequencies.size(); }
  void validate() const;
};

/// Ideal phases and binary service selection of every element for every BS.
///
/// `phi(s, m)` lives in (0, 2pi]. `a(s, m)` is 0 or 1 and each column holds at
/// most one 1. The practical reflection seen by BS s is exp(j phi a).
struct ReflectionState {
  RMat phi;
  IMat a;

  ReflectionState() = default;
  ReflectionState(int num_bs, int num_elements);

  int num_bs() const { return static_cast<int>(phi.rows()); }
  int num_elements() const { return static_cast<int>(phi.cols()); }

  /// True when every entry of `a` is binary and each column selects at most
  /// one BS.
  bool selection_is_exclusive() const;
  /// Throws Error(invalid_argument) when shapes, phase range or selection
  /// exclusivity are violated.
  void validate() const;
};

struct CapacitanceInterval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double c) const { return c >= lo && c <= hi; }
};

/// Per-frequency tunable capacitance ranges plus the residual ("gray") set.
struct CapacitancePartition {
  std::vector<double> frequencies;
  std::vector<CapacitanceInterval> tunable;  // one per frequency, same order
  std::vector<CapacitanceInterval> gray;
  double sweep_lo = 0.0;
  double sweep_hi = 0.0;
};

struct CapacitanceSweep {
  double c_min = 0.5e-12;
  double c_max = 6.0e-12;
  int points = 2000;
  // Fraction of the total phase excursion that a frequency's tunable range must
  // cover.
  double span_fraction = 0.75;
  // Overlap between two raw ranges, relative to the narrower one, above which
  // the frequencies are declared too close to partition.
  double max_overlap = 0.5;
};

cdouble impedance(const CircuitParams& params, double capacitance, double frequency);

cdouble reflection_coefficient(const CircuitParams& params, double capacitance,
                               double frequency);

CapacitancePartition partition_capacitance(const CircuitParams& params,
                                           const FrequencyPlan& plan,
                                           const CapacitanceSweep& sweep = {});

/// theta_s with theta_{s,m} = exp(j phi_{s,m} a_{s,m}).
CVec practical_reflection(const ReflectionState& state, int s);

/// Unwrapped phase of the reflection coefficient along a capacitance grid.
std::vector<double> unwrapped_phase(const CircuitParams& params, double frequency,
                                    const std::vector<double>& capacitances);

}  // namespace irs
