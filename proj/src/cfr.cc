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

#include "seqform/cfr.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace seqform {

namespace {

void fill_action_values(const Treeplex& tp, const DilatedRegularizer& reg,
                        double tau, std::span<const double> g,
                        std::span<const double> q, std::vector<double>* v,
                        std::vector<double>* w) {
  v->resize(tp.dim());
  w->resize(tp.num_infosets());
  for (int h : tp.topo_order()) {
    const InfoSet& is = tp.infoset(h);
    double wh = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) {
      double val = g[i];
      for (int ch : tp.children_of(i)) val += (*w)[ch];
      (*v)[i] = val;
      wh += q[i] * val;
    }
    if (tau > 0.0) {
      wh += tau * reg.alpha()[h] *
            base_value(reg.kind(), q.subspan(is.first, is.size));
    }
    (*w)[h] = wh;
  }
}

}  // namespace

CfValues counterfactual_values(const GameSpec& game,
                               const DilatedRegularizer& reg_x,
                               const DilatedRegularizer& reg_y, double tau,
                               const JointStrategy& z,
                               std::span<const double> qx,
                               std::span<const double> qy, bool parallel) {
  CfValues cf;
  cf.grad = game.payoff_operator(z.x, z.y);
#pragma omp parallel sections if (parallel)
  {
#pragma omp section
    fill_action_values(game.x(), reg_x, tau, cf.grad.x, qx,
                       &cf.action_values[0], &cf.infoset_values[0]);
#pragma omp section
    fill_action_values(game.y(), reg_y, tau, cf.grad.y, qy,
                       &cf.action_values[1], &cf.infoset_values[1]);
  }
  return cf;
}

CfValues counterfactual_values(const GameSpec& game,
                               const DilatedRegularizer& reg_x,
                               const DilatedRegularizer& reg_y, double tau,
                               const JointStrategy& z, bool parallel) {
  BehavioralStrategy qx = sequence_to_behavioral(game.x(), z.x);
  BehavioralStrategy qy = sequence_to_behavioral(game.y(), z.y);
  return counterfactual_values(game, reg_x, reg_y, tau, z, qx.probs, qy.probs,
                               parallel);
}

RegCfrSolver::RegCfrSolver(const GameSpec& game, RegKind kind, double tau,
                           double gamma, double kappa)
    : game_(&game),
      reg_x_(game.x(), kind),
      reg_y_(game.y(), kind),
      tau_(tau),
      gamma_(gamma),
      kappa_(kappa) {
  if (kind != RegKind::kEuclidean) {
    throw std::invalid_argument(
        "the per-infoset update is defined for the Euclidean base kind");
  }
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (kappa < 1.0) throw std::invalid_argument("kappa must be at least 1");
  double alpha_max = std::max(reg_x_.alpha_max(), reg_y_.alpha_max());
  if (tau > 0.0 && tau > 1.0 / (2.0 * alpha_max)) {
    std::fprintf(stderr,
                 "warning: tau=%g exceeds 1/(2*max alpha)=%g, outside the "
                 "analyzed regime\n",
                 tau, 1.0 / (2.0 * alpha_max));
  }

  for (int p = 0; p < 2; ++p) {
    const Treeplex& t = tp(p);
    q_full_[p].resize(t.dim());
    for (const InfoSet& is : t.infosets()) {
      double u = 1.0 / is.size;
      for (int i = is.first; i < is.first + is.size; ++i) q_full_[p][i] = u;
    }
    q_half_[p] = q_full_[p];
    q_anchor_[p] = q_full_[p];
    lambda_prev_[p].assign(t.num_infosets(), std::sqrt(kappa_));
    lambda_cur_[p] = lambda_prev_[p];
    delta_sum_[p].assign(t.num_infosets(), 0.0);
    cum_v_[p].assign(t.dim(), 0.0);
    cum_played_[p].assign(t.num_infosets(), 0.0);
    avg_[p].assign(t.dim(), 0.0);
    cum_g_[p].assign(t.dim(), 0.0);
  }
  z_half_.x = behavioral_to_sequence(game.x(), q_half_[0]);
  z_half_.y = behavioral_to_sequence(game.y(), q_half_[1]);
  CfValues cf = counterfactual_values(game, reg_x_, reg_y_, tau_, z_half_,
                                      q_half_[0], q_half_[1], parallel_);
  v_prev_[0] = std::move(cf.action_values[0]);
  v_prev_[1] = std::move(cf.action_values[1]);
}

void RegCfrSolver::step() {
  const int64_t t = iter_ + 1;
  // Per-infoset synchronous sweep: both prox lines read the action
  // values frozen at the previous half iterate.
  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = tp(p);
    const DilatedRegularizer& reg = p == 0 ? reg_x_ : reg_y_;
    const int nh = tpl.num_infosets();
#pragma omp parallel for schedule(static) if (parallel_)
    for (int h = 0; h < nh; ++h) {
      const InfoSet& is = tpl.infoset(h);
      const double a = reg.alpha()[h];
      std::span<const double> v(v_prev_[p].data() + is.first,
                                static_cast<size_t>(is.size));
      std::span<double> qf(q_full_[p].data() + is.first,
                           static_cast<size_t>(is.size));
      std::span<double> qh(q_half_[p].data() + is.first,
                           static_cast<size_t>(is.size));

      std::vector<double> g1(is.size);
      for (int k = 0; k < is.size; ++k) g1[k] = v[k] + tau_ * a * qf[k];
      std::vector<double> q_new;
      if (t == 1) {
        q_new = local_prox(RegKind::kEuclidean, qf, g1,
                           lambda_prev_[p][h], std::nullopt, gamma_);
      } else {
        ProxAnchor anchor{lambda_cur_[p][h] - lambda_prev_[p][h],
                          std::span<const double>(
                              q_anchor_[p].data() + is.first,
                              static_cast<size_t>(is.size))};
        q_new = local_prox(RegKind::kEuclidean, qf, g1,
                           lambda_prev_[p][h], anchor, gamma_);
      }

      std::vector<double> g2(is.size);
      for (int k = 0; k < is.size; ++k) g2[k] = v[k] + tau_ * a * q_new[k];
      std::vector<double> q_next =
          local_prox(RegKind::kEuclidean, q_new, g2, lambda_cur_[p][h],
                     std::nullopt, gamma_);

      for (int k = 0; k < is.size; ++k) {
        qf[k] = q_new[k];
        qh[k] = q_next[k];
      }
      if (t == 1) {
        for (int k = 0; k < is.size; ++k) {
          q_anchor_[p][is.first + k] = q_new[k];
        }
      }
    }
  }

  z_half_.x = behavioral_to_sequence(game_->x(), q_half_[0]);
  z_half_.y = behavioral_to_sequence(game_->y(), q_half_[1]);
  CfValues cf = counterfactual_values(*game_, reg_x_, reg_y_, tau_, z_half_,
                                      q_half_[0], q_half_[1], parallel_);

  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = tp(p);
    const std::vector<double>& v_new = cf.action_values[p];
    const int nh = tpl.num_infosets();
#pragma omp parallel for schedule(static) if (parallel_)
    for (int h = 0; h < nh; ++h) {
      const InfoSet& is = tpl.infoset(h);
      double delta = 0.0;
      double played = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        double d = v_new[i] - v_prev_[p][i];
        delta += d * d;
        played += v_new[i] * q_half_[p][i];
        cum_v_[p][i] += v_new[i];
      }
      if (tau_ > 0.0) {
        played += tau_ * reg(p).alpha()[h] *
                  base_value(RegKind::kEuclidean,
                             std::span<const double>(
                                 q_half_[p].data() + is.first,
                                 static_cast<size_t>(is.size)));
      }
      cum_played_[p][h] += played;
      delta_sum_[p][h] += delta;
      lambda_prev_[p][h] = lambda_cur_[p][h];
      lambda_cur_[p][h] = std::sqrt(kappa_ + delta_sum_[p][h]);
    }

    const SequenceStrategy& zp = p == 0 ? z_half_.x : z_half_.y;
    const std::vector<double>& gp = p == 0 ? cf.grad.x : cf.grad.y;
    double dot = 0.0;
    for (int i = 0; i < tpl.dim(); ++i) {
      avg_[p][i] += zp[i];
      cum_g_[p][i] += gp[i];
      dot += gp[i] * zp[i];
    }
    cum_played_global_[p] += dot + tau_ * reg(p).value(zp);
  }
  cum_tau_ += tau_;

  v_prev_[0] = std::move(cf.action_values[0]);
  v_prev_[1] = std::move(cf.action_values[1]);
  iter_ = t;
}

JointStrategy RegCfrSolver::average_strategy() const {
  if (iter_ == 0) return z_half_;
  JointStrategy avg;
  avg.x.values.resize(avg_[0].size());
  avg.y.values.resize(avg_[1].size());
  for (size_t i = 0; i < avg_[0].size(); ++i) {
    avg.x.values[i] = avg_[0][i] / iter_;
  }
  for (size_t j = 0; j < avg_[1].size(); ++j) {
    avg.y.values[j] = avg_[1][j] / iter_;
  }
  return avg;
}

double RegCfrSolver::local_regret(int player, int infoset) const {
  const InfoSet& is = tp(player).infoset(infoset);
  std::span<const double> c(cum_v_[player].data() + is.first,
                            static_cast<size_t>(is.size));
  LocalMin best = local_smoothed_min(
      RegKind::kEuclidean, c, cum_tau_ * reg(player).alpha()[infoset], gamma_);
  return cum_played_[player][infoset] - best.value;
}

double RegCfrSolver::regret_upper_bound() const {
  double total = 0.0;
  std::vector<double> zero;
  std::vector<double> bonus;
  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = tp(p);
    bonus.resize(tpl.num_infosets());
    for (int h = 0; h < tpl.num_infosets(); ++h) {
      bonus[h] = local_regret(p, h);
    }
    zero.assign(tpl.dim(), 0.0);
    total += treeplex_linear_opt(tpl, zero, bonus, gamma_, Sense::kMax).value;
  }
  return total;
}

std::array<double, 2> RegCfrSolver::global_regret() const {
  if (iter_ == 0) return {0.0, 0.0};
  double best_x =
      smoothed_best_response(reg_x_, cum_g_[0], cum_tau_, gamma_).value;
  double best_y =
      smoothed_best_response(reg_y_, cum_g_[1], cum_tau_, gamma_).value;
  return {cum_played_global_[0] - best_x, cum_played_global_[1] - best_y};
}

void RegCfrSolver::set_tau(double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  tau_ = tau;
}

void RegCfrSolver::warm_restart() {
  q_full_ = q_half_;
  // The anchor keeps its role; action values at the half iterate are
  // already in v_prev_.
}

// ---------------------------------------------------------------------------

RegretMatchingSolver::RegretMatchingSolver(const GameSpec& game, RegKind kind,
                                           double tau, bool plus)
    : game_(&game),
      reg_x_(game.x(), kind),
      reg_y_(game.y(), kind),
      tau_(tau),
      plus_(plus) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  for (int p = 0; p < 2; ++p) {
    const Treeplex& t = tp(p);
    regrets_[p].assign(t.dim(), 0.0);
    q_[p].resize(t.dim());
    for (const InfoSet& is : t.infosets()) {
      double u = 1.0 / is.size;
      for (int i = is.first; i < is.first + is.size; ++i) q_[p][i] = u;
    }
    cum_v_[p].assign(t.dim(), 0.0);
    cum_played_[p].assign(t.num_infosets(), 0.0);
    avg_[p].assign(t.dim(), 0.0);
    cum_g_[p].assign(t.dim(), 0.0);
  }
  z_cur_.x = behavioral_to_sequence(game.x(), q_[0]);
  z_cur_.y = behavioral_to_sequence(game.y(), q_[1]);
}

void RegretMatchingSolver::step() {
  CfValues cf = counterfactual_values(*game_, reg_x_, reg_y_, tau_, z_cur_,
                                      q_[0], q_[1], true);

  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = tp(p);
    const DilatedRegularizer& reg = p == 0 ? reg_x_ : reg_y_;
    const std::vector<double>& v = cf.action_values[p];

    for (const InfoSet& is : tpl.infosets()) {
      std::span<const double> qh(q_[p].data() + is.first,
                                 static_cast<size_t>(is.size));
      std::vector<double> loss(is.size);
      for (int k = 0; k < is.size; ++k) loss[k] = v[is.first + k];
      if (tau_ > 0.0) {
        std::vector<double> base = base_grad(reg.kind(), qh);
        for (int k = 0; k < is.size; ++k) {
          loss[k] += tau_ * reg.alpha()[is.id] * base[k];
        }
      }
      double played_loss = 0.0;
      for (int k = 0; k < is.size; ++k) played_loss += loss[k] * qh[k];

      // bookkeeping against the unlinearized local loss
      double played = 0.0;
      for (int k = 0; k < is.size; ++k) {
        played += v[is.first + k] * qh[k];
        cum_v_[p][is.first + k] += v[is.first + k];
      }
      if (tau_ > 0.0) {
        played += tau_ * reg.alpha()[is.id] * base_value(reg.kind(), qh);
      }
      cum_played_[p][is.id] += played;

      for (int k = 0; k < is.size; ++k) {
        double inst = played_loss - loss[k];
        double r = regrets_[p][is.first + k] + inst;
        regrets_[p][is.first + k] = plus_ ? std::max(r, 0.0) : r;
      }
      double positive = 0.0;
      for (int k = 0; k < is.size; ++k) {
        positive += std::max(regrets_[p][is.first + k], 0.0);
      }
      if (positive > 0.0) {
        for (int k = 0; k < is.size; ++k) {
          q_[p][is.first + k] =
              std::max(regrets_[p][is.first + k], 0.0) / positive;
        }
      } else {
        for (int k = 0; k < is.size; ++k) {
          q_[p][is.first + k] = 1.0 / is.size;
        }
      }
    }

    const SequenceStrategy& zp = p == 0 ? z_cur_.x : z_cur_.y;
    const std::vector<double>& gp = p == 0 ? cf.grad.x : cf.grad.y;
    double dot = 0.0;
    for (int i = 0; i < tpl.dim(); ++i) {
      avg_[p][i] += zp[i];
      cum_g_[p][i] += gp[i];
      dot += gp[i] * zp[i];
    }
    cum_played_global_[p] += dot + tau_ * reg.value(zp);
  }
  cum_tau_ += tau_;
  ++iter_;

  z_cur_.x = behavioral_to_sequence(game_->x(), q_[0]);
  z_cur_.y = behavioral_to_sequence(game_->y(), q_[1]);
}

JointStrategy RegretMatchingSolver::average_strategy() const {
  if (iter_ == 0) return z_cur_;
  JointStrategy avg;
  avg.x.values.resize(avg_[0].size());
  avg.y.values.resize(avg_[1].size());
  for (size_t i = 0; i < avg_[0].size(); ++i) {
    avg.x.values[i] = avg_[0][i] / iter_;
  }
  for (size_t j = 0; j < avg_[1].size(); ++j) {
    avg.y.values[j] = avg_[1][j] / iter_;
  }
  return avg;
}

double RegretMatchingSolver::local_regret(int player, int infoset) const {
  const InfoSet& is = tp(player).infoset(infoset);
  const DilatedRegularizer& reg = player == 0 ? reg_x_ : reg_y_;
  std::span<const double> c(cum_v_[player].data() + is.first,
                            static_cast<size_t>(is.size));
  LocalMin best = local_smoothed_min(reg.kind(), c,
                                     cum_tau_ * reg.alpha()[infoset], 0.0);
  return cum_played_[player][infoset] - best.value;
}

double RegretMatchingSolver::regret_upper_bound() const {
  double total = 0.0;
  std::vector<double> zero;
  std::vector<double> bonus;
  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = tp(p);
    bonus.resize(tpl.num_infosets());
    for (int h = 0; h < tpl.num_infosets(); ++h) {
      bonus[h] = local_regret(p, h);
    }
    zero.assign(tpl.dim(), 0.0);
    total += treeplex_linear_opt(tpl, zero, bonus, 0.0, Sense::kMax).value;
  }
  return total;
}

std::array<double, 2> RegretMatchingSolver::global_regret() const {
  if (iter_ == 0) return {0.0, 0.0};
  double best_x = smoothed_best_response(reg_x_, cum_g_[0], cum_tau_, 0.0).value;
  double best_y = smoothed_best_response(reg_y_, cum_g_[1], cum_tau_, 0.0).value;
  return {cum_played_global_[0] - best_x, cum_played_global_[1] - best_y};
}

void RegretMatchingSolver::set_tau(double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  tau_ = tau;
}

// ---------------------------------------------------------------------------

LaminarCheck laminar_difference(const GameSpec& game,
                                const DilatedRegularizer& reg_x,
                                const DilatedRegularizer& reg_y, double tau,
                                std::span<const JointStrategy> history,
                                const JointStrategy& z) {
  LaminarCheck out;
  const int64_t horizon = static_cast<int64_t>(history.size());
  if (horizon == 0) return out;

  BehavioralStrategy qzx = sequence_to_behavioral(game.x(), z.x);
  BehavioralStrategy qzy = sequence_to_behavioral(game.y(), z.y);
  double psi_z = reg_x.value(z.x) + reg_y.value(z.y);

  std::array<std::vector<double>, 2> cum_v;
  std::array<std::vector<double>, 2> cum_played;
  cum_v[0].assign(game.x().dim(), 0.0);
  cum_v[1].assign(game.y().dim(), 0.0);
  cum_played[0].assign(game.x().num_infosets(), 0.0);
  cum_played[1].assign(game.y().num_infosets(), 0.0);

  for (const JointStrategy& zt : history) {
    CfValues cf = counterfactual_values(game, reg_x, reg_y, tau, zt);
    double f_dot_zt = 0.0, f_dot_z = 0.0;
    for (int i = 0; i < game.x().dim(); ++i) {
      f_dot_zt += cf.grad.x[i] * zt.x[i];
      f_dot_z += cf.grad.x[i] * z.x[i];
      cum_v[0][i] += cf.action_values[0][i];
    }
    for (int j = 0; j < game.y().dim(); ++j) {
      f_dot_zt += cf.grad.y[j] * zt.y[j];
      f_dot_z += cf.grad.y[j] * z.y[j];
      cum_v[1][j] += cf.action_values[1][j];
    }
    double psi_zt = reg_x.value(zt.x) + reg_y.value(zt.y);
    out.global += f_dot_zt - f_dot_z + tau * psi_zt - tau * psi_z;
    // The played local loss equals the infoset value at the played point.
    for (int p = 0; p < 2; ++p) {
      for (size_t h = 0; h < cf.infoset_values[p].size(); ++h) {
        cum_played[p][h] += cf.infoset_values[p][h];
      }
    }
  }

  for (int p = 0; p < 2; ++p) {
    const Treeplex& tpl = p == 0 ? game.x() : game.y();
    const DilatedRegularizer& reg = p == 0 ? reg_x : reg_y;
    const SequenceStrategy& zp = p == 0 ? z.x : z.y;
    const std::vector<double>& qz = p == 0 ? qzx.probs : qzy.probs;
    for (const InfoSet& is : tpl.infosets()) {
      double reach = is.parent == kNoParent ? 1.0 : zp[is.parent];
      if (reach == 0.0) continue;
      double comparator = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        comparator += cum_v[p][i] * qz[i];
      }
      if (tau > 0.0) {
        comparator += static_cast<double>(horizon) * tau * reg.alpha()[is.id] *
                      base_value(reg.kind(),
                                 std::span<const double>(
                                     qz.data() + is.first,
                                     static_cast<size_t>(is.size)));
      }
      out.decomposed += reach * (cum_played[p][is.id] - comparator);
    }
  }
  return out;
}

}  // namespace seqform
