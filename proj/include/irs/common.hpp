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

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irs {

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using IMat = Eigen::MatrixXi;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorCode {
  invalid_argument = 1,
  domain = 2,
  infeasible = 3,
  numerical = 4,
  io = 5,
  parse = 6,
  not_converged = 7,
};

// All library failures are reported through this type; the C API maps the code
// onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Maps any angle onto (0, 2*pi]; an angle of zero maps to 2*pi.
inline double wrap_phase(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r;
}

}  // namespace irs
