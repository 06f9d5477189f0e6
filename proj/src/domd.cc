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

#include "seqform/domd.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace seqform {

SequenceStrategy dilated_prox(const DilatedRegularizer& reg,
                              const SequenceStrategy& z_hat,
                              std::span<const double> g, double eta,
                              double tau, double gamma) {
  const Treeplex& tp = reg.treeplex();
  if (static_cast<int>(g.size()) != tp.dim() || z_hat.size() != tp.dim()) {
    throw std::invalid_argument("dilated_prox dimension mismatch");
  }
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (reg.kind() == RegKind::kEntropy && gamma > 0.0) {
    throw std::invalid_argument(
        "entropy prox over a gamma-floored treeplex is not supported");
  }

  BehavioralStrategy hat = sequence_to_behavioral(tp, z_hat);
  std::vector<double> lin(tp.dim());
  for (int i = 0; i < tp.dim(); ++i) lin[i] = eta * g[i];
  if (tau > 0.0) {
    std::vector<double> reg_grad = reg.grad_from_behavioral(hat.probs);
    for (int i = 0; i < tp.dim(); ++i) lin[i] += eta * tau * reg_grad[i];
  }

  std::vector<double> val(tp.dim());
  std::vector<double> opt(tp.num_infosets());
  std::vector<double> q(tp.dim());
  for (int h : tp.topo_order()) {
    const InfoSet& is = tp.infoset(h);
    const double a = reg.alpha()[h];
    double m = std::numeric_limits<double>::infinity();
    for (int i = is.first; i < is.first + is.size; ++i) {
      double v = lin[i];
      for (int ch : tp.children_of(i)) v += opt[ch];
      val[i] = v;
      m = std::min(m, v);
    }
    if (reg.kind() == RegKind::kEntropy) {
      double sum = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        q[i] = hat.probs[i] * std::exp(-(val[i] - m) / a);
        sum += q[i];
      }
      for (int i = is.first; i < is.first + is.size; ++i) q[i] /= sum;
      opt[h] = m - a * std::log(sum);
    } else {
      std::vector<double> target(is.size);
      for (int k = 0; k < is.size; ++k) {
        target[k] = hat.probs[is.first + k] - val[is.first + k] / a;
      }
      std::vector<double> qh = project_simplex(target, gamma);
      double o = 0.0;
      for (int k = 0; k < is.size; ++k) {
        int i = is.first + k;
        q[i] = qh[k];
        double d = qh[k] - hat.probs[i];
        o += val[i] * qh[k] + 0.5 * a * d * d;
      }
      opt[h] = o;
    }
  }
  return behavioral_to_sequence(tp, q);
}

DomdStepResult domd_step(const DomdState& state, const GameSpec& game,
                         const DilatedRegularizer& reg_x,
                         const DilatedRegularizer& reg_y, double gamma,
                         bool parallel) {
  GradientPair g_prev = game.payoff_operator(state.z_prev.x, state.z_prev.y);

  JointStrategy z_t;
#pragma omp parallel sections if (parallel)
  {
#pragma omp section
    {
      z_t.x = dilated_prox(reg_x, state.z_hat.x, g_prev.x, state.eta,
                           state.tau, gamma);
    }
#pragma omp section
    {
      z_t.y = dilated_prox(reg_y, state.z_hat.y, g_prev.y, state.eta,
                           state.tau, gamma);
    }
  }

  GradientPair g_t = game.payoff_operator(z_t.x, z_t.y);
  JointStrategy z_hat_next;
#pragma omp parallel sections if (parallel)
  {
#pragma omp section
    {
      z_hat_next.x = dilated_prox(reg_x, state.z_hat.x, g_t.x, state.eta,
                                  state.tau, gamma);
    }
#pragma omp section
    {
      z_hat_next.y = dilated_prox(reg_y, state.z_hat.y, g_t.y, state.eta,
                                  state.tau, gamma);
    }
  }

  DomdStepResult result;
  result.state = DomdState{z_t, std::move(z_hat_next), state.iter + 1,
                           state.eta, state.tau};
  result.iterate = std::move(z_t);
  return result;
}

DomdSolver::DomdSolver(const GameSpec& game, RegKind kind, double eta,
                       double tau, double gamma)
    : game_(&game),
      reg_x_(game.x(), kind),
      reg_y_(game.y(), kind),
      gamma_(gamma) {
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (kind == RegKind::kEntropy && gamma > 0.0) {
    throw std::invalid_argument(
        "the entropy update runs on the unperturbed treeplex only");
  }
  double eta_bound = 1.0 / (8.0 * game.dim());
  if (eta > eta_bound + 1e-15 || tau > 1.0) {
    std::fprintf(stderr,
                 "warning: eta=%g tau=%g outside the analyzed regime "
                 "(eta <= %g, tau <= 1)\n",
                 eta, tau, eta_bound);
  }
  state_.z_prev.x = uniform_strategy(game.x());
  state_.z_prev.y = uniform_strategy(game.y());
  state_.z_hat = state_.z_prev;
  state_.eta = eta;
  state_.tau = tau;
  cum_g_x_.assign(game.x().dim(), 0.0);
  cum_g_y_.assign(game.y().dim(), 0.0);
  avg_x_.assign(game.x().dim(), 0.0);
  avg_y_.assign(game.y().dim(), 0.0);
}

void DomdSolver::step() {
  DomdStepResult r = domd_step(state_, *game_, reg_x_, reg_y_, gamma_,
                               parallel_);
  state_ = std::move(r.state);

  // Played-iterate bookkeeping for regret and averaging.
  const JointStrategy& z = state_.z_prev;
  GradientPair g = game_->payoff_operator(z.x, z.y);
  double dot_x = 0.0, dot_y = 0.0;
  for (int i = 0; i < game_->x().dim(); ++i) {
    cum_g_x_[i] += g.x[i];
    avg_x_[i] += z.x[i];
    dot_x += g.x[i] * z.x[i];
  }
  for (int j = 0; j < game_->y().dim(); ++j) {
    cum_g_y_[j] += g.y[j];
    avg_y_[j] += z.y[j];
    dot_y += g.y[j] * z.y[j];
  }
  cum_played_[0] += dot_x + state_.tau * reg_x_.value(z.x);
  cum_played_[1] += dot_y + state_.tau * reg_y_.value(z.y);
  cum_tau_ += state_.tau;
}

JointStrategy DomdSolver::average_strategy() const {
  if (state_.iter == 0) return state_.z_prev;
  JointStrategy avg;
  avg.x.values.resize(avg_x_.size());
  avg.y.values.resize(avg_y_.size());
  for (size_t i = 0; i < avg_x_.size(); ++i) {
    avg.x.values[i] = avg_x_[i] / state_.iter;
  }
  for (size_t j = 0; j < avg_y_.size(); ++j) {
    avg.y.values[j] = avg_y_[j] / state_.iter;
  }
  return avg;
}

std::array<double, 2> DomdSolver::global_regret() const {
  if (state_.iter == 0) return {0.0, 0.0};
  double best_x =
      smoothed_best_response(reg_x_, cum_g_x_, cum_tau_, gamma_).value;
  double best_y =
      smoothed_best_response(reg_y_, cum_g_y_, cum_tau_, gamma_).value;
  return {cum_played_[0] - best_x, cum_played_[1] - best_y};
}

void DomdSolver::set_tau(double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  state_.tau = tau;
}

void DomdSolver::restart_from_center() { state_.z_prev = state_.z_hat; }

}  // namespace seqform
