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

#include "seqform/regularizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqform {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double base_value(RegKind kind, std::span<const double> q) {
  double s = 0.0;
  if (kind == RegKind::kEntropy) {
    for (double v : q) s += xlogx(v);
  } else {
    for (double v : q) s += 0.5 * v * v;
  }
  return s;
}

std::vector<double> base_grad(RegKind kind, std::span<const double> q) {
  std::vector<double> g(q.size());
  if (kind == RegKind::kEntropy) {
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i] <= 0.0) {
        throw std::domain_error("entropy gradient at the simplex boundary");
      }
      g[i] = 1.0 + std::log(q[i]);
    }
  } else {
    for (size_t i = 0; i < q.size(); ++i) g[i] = q[i];
  }
  return g;
}

std::vector<double> compute_alpha(const Treeplex& tp, RegKind /*kind*/) {
  std::vector<double> alpha(tp.num_infosets());
  for (int h : tp.topo_order()) {
    const InfoSet& is = tp.infoset(h);
    double worst_child_sum = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) {
      double s = 0.0;
      for (int ch : tp.children_of(i)) s += alpha[ch];
      worst_child_sum = std::max(worst_child_sum, s);
    }
    alpha[h] = 2.0 + 2.0 * worst_child_sum;
  }
  return alpha;
}

DilatedRegularizer::DilatedRegularizer(const Treeplex& tp, RegKind kind)
    : tp_(&tp), kind_(kind), alpha_(compute_alpha(tp, kind)) {
  for (double a : alpha_) alpha_max_ = std::max(alpha_max_, a);
}

// psi is extended off the flow manifold with the in-block mass
// sum_{j in Omega_h} z_j standing in for the parent variable; the two
// coincide on valid strategies and the in-block form keeps every block's
// partial derivatives self-contained.
double DilatedRegularizer::value(const SequenceStrategy& z) const {
  if (z.size() != tp_->dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  double total = 0.0;
  std::vector<double> q;
  for (const InfoSet& is : tp_->infosets()) {
    double s = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) s += z[i];
    if (s == 0.0) continue;
    q.assign(is.size, 0.0);
    for (int k = 0; k < is.size; ++k) q[k] = z[is.first + k] / s;
    total += alpha_[is.id] * s * base_value(kind_, q);
  }
  return total;
}

std::vector<double> DilatedRegularizer::grad(const SequenceStrategy& z) const {
  if (z.size() != tp_->dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  std::vector<double> g(tp_->dim());
  for (const InfoSet& is : tp_->infosets()) {
    double s = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) s += z[i];
    if (s <= 0.0) throw std::domain_error("gradient needs interior z");
    const double a = alpha_[is.id];
    if (kind_ == RegKind::kEntropy) {
      for (int i = is.first; i < is.first + is.size; ++i) {
        if (z[i] <= 0.0) throw std::domain_error("gradient needs interior z");
        g[i] = a * std::log(z[i] / s);
      }
    } else {
      double sq = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        double q = z[i] / s;
        sq += q * q;
      }
      for (int i = is.first; i < is.first + is.size; ++i) {
        g[i] = 0.5 * a * (2.0 * z[i] / s - sq);
      }
    }
  }
  return g;
}

std::vector<double> DilatedRegularizer::grad_from_behavioral(
    std::span<const double> q) const {
  if (static_cast<int>(q.size()) != tp_->dim()) {
    throw std::invalid_argument("behavioral dimension mismatch");
  }
  std::vector<double> g(tp_->dim());
  for (const InfoSet& is : tp_->infosets()) {
    const double a = alpha_[is.id];
    if (kind_ == RegKind::kEntropy) {
      for (int i = is.first; i < is.first + is.size; ++i) {
        if (q[i] <= 0.0) throw std::domain_error("gradient needs interior q");
        g[i] = a * std::log(q[i]);
      }
    } else {
      double sq = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) sq += q[i] * q[i];
      for (int i = is.first; i < is.first + is.size; ++i) {
        g[i] = 0.5 * a * (2.0 * q[i] - sq);
      }
    }
  }
  return g;
}

double DilatedRegularizer::bregman(const SequenceStrategy& z1,
                                   const SequenceStrategy& z2) const {
  if (z1.size() != tp_->dim() || z2.size() != tp_->dim()) {
    throw std::invalid_argument("strategy dimension mismatch");
  }
  BehavioralStrategy q1 = sequence_to_behavioral(*tp_, z1);
  BehavioralStrategy q2 = sequence_to_behavioral(*tp_, z2);
  double total = 0.0;
  for (const InfoSet& is : tp_->infosets()) {
    double s1 = is.parent == kNoParent ? 1.0 : z1[is.parent];
    if (s1 == 0.0) continue;
    double local = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) {
      if (kind_ == RegKind::kEuclidean) {
        double d = q1.probs[i] - q2.probs[i];
        local += 0.5 * d * d;
      } else {
        if (q1.probs[i] > 0.0) {
          if (q2.probs[i] <= 0.0) {
            throw std::domain_error("KL divergence at the boundary");
          }
          local += q1.probs[i] * std::log(q1.probs[i] / q2.probs[i]);
        }
      }
    }
    total += alpha_[is.id] * s1 * local;
  }
  return total;
}

double DilatedRegularizer::bregman_from_definition(
    const SequenceStrategy& z1, const SequenceStrategy& z2) const {
  std::vector<double> g2 = grad(z2);
  double dot = 0.0;
  for (int i = 0; i < tp_->dim(); ++i) dot += g2[i] * (z1[i] - z2[i]);
  return value(z1) - value(z2) - dot;
}

std::vector<double> local_prox(RegKind kind, std::span<const double> q_prev,
                               std::span<const double> g, double step,
                               std::optional<ProxAnchor> anchor, double gamma) {
  const size_t n = q_prev.size();
  if (g.size() != n) throw std::invalid_argument("local_prox size mismatch");
  if (step <= 0.0) throw std::invalid_argument("prox step must be positive");
  double anchor_weight = anchor ? anchor->weight : 0.0;
  if (anchor_weight < 0.0) {
    throw std::invalid_argument("anchor weight must be nonnegative");
  }
  double total = step + anchor_weight;

  if (kind == RegKind::kEuclidean) {
    std::vector<double> target(n);
    for (size_t i = 0; i < n; ++i) {
      double num = step * q_prev[i] - g[i];
      if (anchor_weight > 0.0) num += anchor_weight * anchor->q[i];
      target[i] = num / total;
    }
    return project_simplex(target, gamma);
  }

  if (gamma > 0.0) {
    throw std::invalid_argument(
        "entropy prox over a gamma-floored simplex is not supported");
  }
  std::vector<double> logits(n);
  double m = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    if (q_prev[i] <= 0.0) {
      throw std::domain_error("entropy prox needs an interior center");
    }
    double l = step * std::log(q_prev[i]) - g[i];
    if (anchor_weight > 0.0) {
      if (anchor->q[i] <= 0.0) {
        throw std::domain_error("entropy prox needs an interior anchor");
      }
      l += anchor_weight * std::log(anchor->q[i]);
    }
    logits[i] = l / total;
    m = std::max(m, logits[i]);
  }
  double sum = 0.0;
  std::vector<double> q(n);
  for (size_t i = 0; i < n; ++i) {
    q[i] = std::exp(logits[i] - m);
    sum += q[i];
  }
  for (size_t i = 0; i < n; ++i) q[i] /= sum;
  return q;
}

LocalMin local_smoothed_min(RegKind kind, std::span<const double> c, double a,
                            double gamma) {
  const int n = static_cast<int>(c.size());
  LocalMin out;
  if (a < 0.0) throw std::invalid_argument("weight must be nonnegative");
  if (a == 0.0) {
    int best = 0;
    double floor_sum = 0.0;
    for (int k = 0; k < n; ++k) {
      floor_sum += c[k];
      if (c[k] < c[best]) best = k;
    }
    out.q.assign(n, gamma);
    out.q[best] += 1.0 - gamma * n;
    out.value = gamma * floor_sum + (1.0 - gamma * n) * c[best];
    return out;
  }
  if (kind == RegKind::kEntropy) {
    if (gamma > 0.0) {
      throw std::invalid_argument(
          "entropy smoothed minimum over a gamma floor is not supported");
    }
    // soft minimum at temperature a
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) m = std::min(m, c[k]);
    out.q.resize(n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      out.q[k] = std::exp(-(c[k] - m) / a);
      sum += out.q[k];
    }
    for (int k = 0; k < n; ++k) out.q[k] /= sum;
    out.value = m - a * std::log(sum);
    return out;
  }
  // Reduce to the plain simplex through q = gamma + slack * p and solve
  // the threshold equation directly at the scale of c; forming -c/a and
  // projecting would shred precision once a is far below |c|.
  const double slack = 1.0 - gamma * n;
  out.q.assign(n, gamma);
  if (slack > 0.0) {
    std::vector<double> ct(n);
    for (int k = 0; k < n; ++k) ct[k] = slack * (c[k] + a * gamma);
    const double at = a * slack * slack;
    std::vector<int> order(n);
    for (int k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return ct[i] < ct[j]; });
    // active set = the k smallest costs with p_i = (-ct_i - mu)/at > 0
    double prefix = 0.0;
    double mu = 0.0;
    int active = 0;
    for (int k = 0; k < n; ++k) {
      prefix += ct[order[k]];
      double candidate = (-prefix - at) / (k + 1);
      if (-ct[order[k]] - candidate > 0.0) {
        mu = candidate;
        active = k + 1;
      }
    }
    std::vector<double> p(n, 0.0);
    double mass = 0.0;
    for (int k = 0; k < active; ++k) {
      p[order[k]] = (-ct[order[k]] - mu) / at;
      mass += p[order[k]];
    }
    for (int k = 0; k < active; ++k) {
      out.q[order[k]] = gamma + slack * p[order[k]] / mass;
    }
  }
  for (int k = 0; k < n; ++k) {
    out.value += c[k] * out.q[k] + 0.5 * a * out.q[k] * out.q[k];
  }
  return out;
}

LinearOpt smoothed_best_response(const DilatedRegularizer& reg,
                                 std::span<const double> g, double weight,
                                 double gamma) {
  const Treeplex& tp = reg.treeplex();
  if (static_cast<int>(g.size()) != tp.dim()) {
    throw std::invalid_argument("gradient dimension mismatch");
  }
  if (weight < 0.0) throw std::invalid_argument("weight must be nonnegative");
  if (weight == 0.0) return best_response(tp, g, gamma, Sense::kMin);
  if (reg.kind() == RegKind::kEntropy && gamma > 0.0) {
    throw std::invalid_argument(
        "entropy smoothed response over a gamma floor is not supported");
  }

  std::vector<double> val(tp.dim());
  std::vector<double> opt(tp.num_infosets());
  std::vector<double> q(tp.dim());
  for (int h : tp.topo_order()) {
    const InfoSet& is = tp.infoset(h);
    for (int i = is.first; i < is.first + is.size; ++i) {
      double v = g[i];
      for (int ch : tp.children_of(i)) v += opt[ch];
      val[i] = v;
    }
    LocalMin local = local_smoothed_min(
        reg.kind(), std::span<const double>(val).subspan(is.first, is.size),
        weight * reg.alpha()[h], gamma);
    for (int k = 0; k < is.size; ++k) q[is.first + k] = local.q[k];
    opt[h] = local.value;
  }

  LinearOpt result;
  for (const InfoSet& is : tp.infosets()) {
    if (is.parent == kNoParent) result.value += opt[is.id];
  }
  result.arg = behavioral_to_sequence(tp, q);
  return result;
}

}  // namespace seqform
