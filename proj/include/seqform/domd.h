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

#ifndef SEQFORM_DOMD_H_
#define SEQFORM_DOMD_H_

#include <cstdint>
#include <span>

#include "seqform/game.h"
#include "seqform/regularizer.h"
#include "seqform/treeplex.h"

namespace seqform {

// One optimistic step holds the previous iterate and the prox center.
struct DomdState {
  JointStrategy z_prev;  // the iterate the last gradient was taken at
  JointStrategy z_hat;   // the prox center
  int64_t iter = 0;      // completed steps
  double eta = 0.0;
  double tau = 0.0;
};

// Exact minimizer of <z, g + tau * grad psi(z_hat)> + (1/eta) D(z, z_hat)
// over one player's gamma-floored treeplex, leaf to root. The tau term is
// folded into the linear part; the Bregman anchor is handled in
// behavioral coordinates so boundary centers are well-defined (uniform on
// zero-parent blocks). Entropy kind supports gamma = 0 only.
SequenceStrategy dilated_prox(const DilatedRegularizer& reg,
                              const SequenceStrategy& z_hat,
                              std::span<const double> g, double eta,
                              double tau, double gamma);

struct DomdStepResult {
  DomdState state;
  JointStrategy iterate;  // the new z_t
};

// Full optimistic update: z_t from F(z_{t-1}), then the next prox center
// from F(z_t), both anchored at the same center.
DomdStepResult domd_step(const DomdState& state, const GameSpec& game,
                         const DilatedRegularizer& reg_x,
                         const DilatedRegularizer& reg_y, double gamma,
                         bool parallel = true);

// Reg-DOMWU (entropy) / Reg-DOGDA (Euclidean) driver with regret
// accounting for the folk-theorem checks.
class DomdSolver {
 public:
  DomdSolver(const GameSpec& game, RegKind kind, double eta, double tau,
             double gamma);

  void step();
  int64_t iter() const { return state_.iter; }
  // The prox center after the last step; the theorems track this point.
  const JointStrategy& last_iterate() const { return state_.z_hat; }
  // The played iterate z_t.
  const JointStrategy& current_iterate() const { return state_.z_prev; }
  const DomdState& state() const { return state_; }

  JointStrategy average_strategy() const;
  // Exact external regret of the played iterates under the regularized
  // losses, one value per player.
  std::array<double, 2> global_regret() const;

  double tau() const { return state_.tau; }
  double eta() const { return state_.eta; }
  double gamma() const { return gamma_; }
  const DilatedRegularizer& reg_x() const { return reg_x_; }
  const DilatedRegularizer& reg_y() const { return reg_y_; }

  void set_tau(double tau);
  // Adopt the prox center as the played iterate (warm restart used by the
  // adaptive weight-shrinking loop).
  void restart_from_center();
  void set_parallel(bool on) { parallel_ = on; }

 private:
  const GameSpec* game_;
  DilatedRegularizer reg_x_, reg_y_;
  double gamma_;
  bool parallel_ = true;
  DomdState state_;
  // played-iterate accounting
  std::vector<double> cum_g_x_, cum_g_y_;
  std::vector<double> avg_x_, avg_y_;
  double cum_played_[2] = {0.0, 0.0};
  double cum_tau_ = 0.0;
};

}  // namespace seqform

#endif  // SEQFORM_DOMD_H_
