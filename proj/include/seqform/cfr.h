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

#ifndef SEQFORM_CFR_H_
#define SEQFORM_CFR_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seqform/game.h"
#include "seqform/regularizer.h"
#include "seqform/treeplex.h"

namespace seqform {

// Counterfactual value recursion. For each player, `action_values`
// (flat per sequence) holds the loss of taking that action given the
// opponent part of z, and `infoset_values` the regularized value of the
// subtree rooted at each decision point:
//   action_values[i] = g_i + sum of child infoset values
//   infoset_values[h] = <q_h, action_values_h> + tau * alpha_h * base(q_h)
struct CfValues {
  std::array<std::vector<double>, 2> action_values;
  std::array<std::vector<double>, 2> infoset_values;
  GradientPair grad;
};

// Derives the action distributions from z (uniform on unreached blocks).
CfValues counterfactual_values(const GameSpec& game,
                               const DilatedRegularizer& reg_x,
                               const DilatedRegularizer& reg_y, double tau,
                               const JointStrategy& z, bool parallel = true);

// Solver-facing variant: the action distributions are the local learners'
// states, which matter at decision points the sequence form leaves
// unreached. z must be the sequence form of (qx, qy).
CfValues counterfactual_values(const GameSpec& game,
                               const DilatedRegularizer& reg_x,
                               const DilatedRegularizer& reg_y, double tau,
                               const JointStrategy& z,
                               std::span<const double> qx,
                               std::span<const double> qy, bool parallel);

// Reg-CFR: per-infoset dual-stabilized optimistic mirror descent with the
// adaptive scale lambda_h = sqrt(kappa + accumulated value variation).
// Euclidean base kind only.
class RegCfrSolver {
 public:
  RegCfrSolver(const GameSpec& game, RegKind kind, double tau, double gamma,
               double kappa);

  void step();
  int64_t iter() const { return iter_; }

  // z_{t+1/2}: the played iterate that defines losses and averages.
  const JointStrategy& half_iterate() const { return z_half_; }
  // The local learners' action distributions behind the half iterate.
  std::span<const double> half_profile(int player) const {
    return q_half_[player];
  }
  JointStrategy average_strategy() const;

  // R_T^h for one decision point: played losses minus the best fixed
  // response to the accumulated loss vector.
  double local_regret(int player, int infoset) const;
  // max over comparators of the reach-weighted sum of local regrets,
  // summed over both players.
  double regret_upper_bound() const;
  // Exact external regret per player under the regularized losses.
  std::array<double, 2> global_regret() const;

  double lambda(int player, int infoset) const {
    return lambda_cur_[player][infoset];
  }
  std::span<const double> anchor(int player) const {
    return q_anchor_[player];
  }

  double tau() const { return tau_; }
  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  const GameSpec& game() const { return *game_; }
  const DilatedRegularizer& reg(int player) const {
    return player == 0 ? reg_x_ : reg_y_;
  }

  void set_tau(double tau);
  // Adopt the half iterate as the full iterate (adaptive-shrinking warm
  // restart).
  void warm_restart();
  void set_parallel(bool on) { parallel_ = on; }

 private:
  const Treeplex& tp(int player) const {
    return player == 0 ? game_->x() : game_->y();
  }

  const GameSpec* game_;
  DilatedRegularizer reg_x_, reg_y_;
  double tau_, gamma_, kappa_;
  bool parallel_ = true;
  int64_t iter_ = 0;

  std::array<std::vector<double>, 2> q_full_;    // current full iterate
  std::array<std::vector<double>, 2> q_half_;    // current half iterate
  std::array<std::vector<double>, 2> q_anchor_;  // first full iterate
  JointStrategy z_half_;
  std::array<std::vector<double>, 2> v_prev_;  // action values at z_half_
  std::array<std::vector<double>, 2> lambda_prev_, lambda_cur_;  // per infoset
  std::array<std::vector<double>, 2> delta_sum_;                 // per infoset
  std::array<std::vector<double>, 2> cum_v_;       // per sequence
  std::array<std::vector<double>, 2> cum_played_;  // per infoset
  std::array<std::vector<double>, 2> avg_;         // per sequence
  std::array<std::vector<double>, 2> cum_g_;       // per sequence
  double cum_played_global_[2] = {0.0, 0.0};
  double cum_tau_ = 0.0;
};

// Regret matching baselines (plain and plus) fed the linearized
// regularized loss. Unperturbed games only.
class RegretMatchingSolver {
 public:
  RegretMatchingSolver(const GameSpec& game, RegKind kind, double tau,
                       bool plus);

  void step();
  int64_t iter() const { return iter_; }
  const JointStrategy& current_iterate() const { return z_cur_; }
  std::span<const double> profile(int player) const { return q_[player]; }
  JointStrategy average_strategy() const;
  double local_regret(int player, int infoset) const;
  double regret_upper_bound() const;
  std::array<double, 2> global_regret() const;
  double tau() const { return tau_; }
  void set_tau(double tau);

 private:
  const Treeplex& tp(int player) const {
    return player == 0 ? game_->x() : game_->y();
  }

  const GameSpec* game_;
  DilatedRegularizer reg_x_, reg_y_;
  double tau_;
  bool plus_;
  int64_t iter_ = 0;

  std::array<std::vector<double>, 2> regrets_;  // per sequence
  std::array<std::vector<double>, 2> q_;        // per sequence
  JointStrategy z_cur_;
  std::array<std::vector<double>, 2> cum_v_;
  std::array<std::vector<double>, 2> cum_played_;
  std::array<std::vector<double>, 2> avg_;
  std::array<std::vector<double>, 2> cum_g_;
  double cum_played_global_[2] = {0.0, 0.0};
  double cum_tau_ = 0.0;
};

// Both sides of the laminar decomposition identity, evaluated from a
// played history and a comparator. Test instrumentation, not a hot path.
struct LaminarCheck {
  double global = 0.0;
  double decomposed = 0.0;
};
LaminarCheck laminar_difference(const GameSpec& game,
                                const DilatedRegularizer& reg_x,
                                const DilatedRegularizer& reg_y, double tau,
                                std::span<const JointStrategy> history,
                                const JointStrategy& z);

}  // namespace seqform

#endif  // SEQFORM_CFR_H_
