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

#include "seqform/metrics.h"

#include <cmath>
#include <sstream>

#include "seqform/domd.h"

namespace seqform {

double duality_gap(const GameSpec& game, const JointStrategy& z,
                   double gamma) {
  GradientPair g = game.payoff_operator(z.x, z.y);
  double best_x = best_response(game.x(), g.x, gamma, Sense::kMin).value;
  double best_y = best_response(game.y(), g.y, gamma, Sense::kMin).value;
  return -(best_x + best_y);
}

double saddle_residual(const GameSpec& game, const DilatedRegularizer& reg_x,
                       const DilatedRegularizer& reg_y, double tau,
                       const JointStrategy& z, double gamma) {
  GradientPair g = game.payoff_operator(z.x, z.y);
  double own = tau * (reg_x.value(z.x) + reg_y.value(z.y));
  for (int i = 0; i < game.x().dim(); ++i) own += g.x[i] * z.x.values[i];
  for (int j = 0; j < game.y().dim(); ++j) own += g.y[j] * z.y.values[j];
  double best_x = smoothed_best_response(reg_x, g.x, tau, gamma).value;
  double best_y = smoothed_best_response(reg_y, g.y, tau, gamma).value;
  return own - best_x - best_y;
}

JointStrategy reference_solution(const GameSpec& game, RegKind kind,
                                 double tau, double gamma, double tol,
                                 int64_t max_iters) {
  if (tau <= 0.0) {
    throw std::invalid_argument(
        "the reference oracle needs tau > 0 for uniqueness");
  }
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  double eta = 1.0 / (8.0 * game.dim());
  DomdSolver solver(game, kind, eta, tau, gamma);

  const int64_t check_every = 64;
  double residual = std::numeric_limits<double>::infinity();
  int64_t t = 0;
  while (t < max_iters) {
    solver.step();
    ++t;
    if (t % check_every == 0) {
      residual = saddle_residual(game, solver.reg_x(), solver.reg_y(), tau,
                                 solver.last_iterate(), gamma);
      if (residual <= tol) break;
    }
  }
  if (residual > tol) {
    std::ostringstream os;
    os << "reference solve stalled at residual " << residual << " after " << t
       << " iterations (tol " << tol << ")";
    throw ConvergenceError(os.str(), residual);
  }

  // Polish to the numerical fixed point so downstream Bregman distances
  // are limited by the iterates, not by the oracle.
  const int64_t polish_cap = 500000;
  for (int64_t k = 0; k < polish_cap; ++k) {
    JointStrategy before = solver.last_iterate();
    solver.step();
    const JointStrategy& after = solver.last_iterate();
    double move = 0.0;
    for (int i = 0; i < game.x().dim(); ++i) {
      move = std::max(move, std::abs(after.x[i] - before.x[i]));
    }
    for (int j = 0; j < game.y().dim(); ++j) {
      move = std::max(move, std::abs(after.y[j] - before.y[j]));
    }
    if (move <= 1e-15) break;
  }
  return solver.last_iterate();
}

EfpeCheck efpe_gap_bound_check(const GameSpec& game, const JointStrategy& z,
                               double gamma) {
  EfpeCheck out;
  out.lhs = duality_gap(game, z, 0.0);
  double p = game.dim();
  out.rhs = duality_gap(game, z, gamma) + gamma * p * p;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

DistancePair distance_metrics(const DilatedRegularizer& reg_x,
                              const DilatedRegularizer& reg_y,
                              const JointStrategy& z,
                              const JointStrategy& z_ref) {
  DistancePair out;
  double sq = 0.0;
  for (int i = 0; i < z.x.size(); ++i) {
    double d = z.x[i] - z_ref.x[i];
    sq += d * d;
  }
  for (int j = 0; j < z.y.size(); ++j) {
    double d = z.y[j] - z_ref.y[j];
    sq += d * d;
  }
  out.l2 = std::sqrt(sq);
  out.bregman = reg_x.bregman(z_ref.x, z.x) + reg_y.bregman(z_ref.y, z.y);
  return out;
}

double regularizer_bound(const GameSpec& game, RegKind kind) {
  DilatedRegularizer rx(game.x(), kind), ry(game.y(), kind);
  double alpha_max = std::max(rx.alpha_max(), ry.alpha_max());
  double c_omega = std::max(game.x().max_actions(), game.y().max_actions());
  double p = game.dim();
  if (kind == RegKind::kEntropy) {
    return p * alpha_max * std::log(c_omega);
  }
  return p * alpha_max / c_omega;
}

}  // namespace seqform
