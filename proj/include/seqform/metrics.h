// Copyright 2026 The Seqform Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQFORM_METRICS_H_
#define SEQFORM_METRICS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

#include "seqform/game.h"
#include "seqform/regularizer.h"

namespace seqform {

struct MetricsRecord {
  int64_t iter = 0;
  double tau = 0.0;
  double duality_gap = 0.0;
  double saddle_residual = 0.0;
  double regret_bound = 0.0;
  double dist_ref_l2 = 0.0;
  double dist_ref_bregman = 0.0;
  int64_t wall_ns = 0;
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), achieved_residual(residual) {}
  double achieved_residual;
};

// max over comparators in Z^gamma of F(z)^T (z - comparator); two exact
// best responses.
double duality_gap(const GameSpec& game, const JointStrategy& z, double gamma);

// Regularized analog: max over comparators of
// F(z)^T (z - zhat) + tau psi(z) - tau psi(zhat), via the dilated
// smoothed best response. Equals the duality gap when tau = 0.
double saddle_residual(const GameSpec& game, const DilatedRegularizer& reg_x,
                       const DilatedRegularizer& reg_y, double tau,
                       const JointStrategy& z, double gamma);

// Long fixed-tau optimistic run until the saddle residual drops below
// tol, then polished to a numerical fixed point. The regularized problem
// has a unique solution for tau > 0, which makes this a usable oracle.
// Throws ConvergenceError (carrying the achieved residual) past the
// iteration cap.
JointStrategy reference_solution(const GameSpec& game, RegKind kind,
                                 double tau, double gamma, double tol,
                                 int64_t max_iters = 5000000);

// Both sides of: gap over the unperturbed game <= gap over the
// gamma-floored game + gamma * P^2.
struct EfpeCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
EfpeCheck efpe_gap_bound_check(const GameSpec& game, const JointStrategy& z,
                               double gamma);

// ||z - z_ref|| and the Bregman divergence D(z_ref, z), in that argument
// order (reference first).
struct DistancePair {
  double l2 = 0.0;
  double bregman = 0.0;
};
DistancePair distance_metrics(const DilatedRegularizer& reg_x,
                              const DilatedRegularizer& reg_y,
                              const JointStrategy& z,
                              const JointStrategy& z_ref);

// Upper bound C_B on |psi| over the joint treeplex:
// P * max alpha * log(max actions) for entropy,
// P * max alpha / max actions for Euclidean.
double regularizer_bound(const GameSpec& game, RegKind kind);

}  // namespace seqform

#endif  // SEQFORM_METRICS_H_
