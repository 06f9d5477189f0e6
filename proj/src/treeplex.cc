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

#include "seqform/treeplex.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seqform {

namespace {

void check_gamma(const Treeplex& tp, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (tp.max_actions() > 0 && gamma * tp.max_actions() >= 1.0 + 1e-15) {
    throw std::invalid_argument("infeasible gamma: gamma * |Omega_h| >= 1");
  }
}

void check_dim(const Treeplex& tp, int n, const char* what) {
  if (n != tp.dim()) {
    std::ostringstream os;
    os << what << " has length " << n << ", treeplex dim is " << tp.dim();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Treeplex::Treeplex(const std::vector<InfoSetSpec>& specs) {
  infosets_.reserve(specs.size());
  dim_ = 0;
  for (int h = 0; h < static_cast<int>(specs.size()); ++h) {
    const InfoSetSpec& s = specs[h];
    if (s.num_actions < 1) {
      throw std::invalid_argument("information set needs at least one action");
    }
    infosets_.push_back(
        InfoSet{h, s.parent, dim_, s.num_actions, s.label});
    dim_ += s.num_actions;
    max_actions_ = std::max(max_actions_, s.num_actions);
  }

  seq_infoset_.assign(dim_, -1);
  seq_children_.assign(dim_, {});
  for (const InfoSet& is : infosets_) {
    for (int i = is.first; i < is.first + is.size; ++i) seq_infoset_[i] = is.id;
  }
  for (const InfoSet& is : infosets_) {
    if (is.parent == kNoParent) continue;
    if (is.parent < 0 || is.parent >= dim_) {
      throw std::invalid_argument("parent sequence index out of range");
    }
    if (is.parent >= is.first && is.parent < is.first + is.size) {
      throw std::invalid_argument("information set cannot parent itself");
    }
    seq_children_[is.parent].push_back(is.id);
  }

  // Children-before-parents order via depth from the root. The parent
  // relation must be acyclic; a cycle shows up as an unresolvable depth.
  std::vector<int> depth(infosets_.size(), -1);
  std::vector<int> pending(infosets_.size());
  std::iota(pending.begin(), pending.end(), 0);
  int resolved = 0;
  while (!pending.empty()) {
    std::vector<int> next;
    for (int h : pending) {
      const InfoSet& is = infosets_[h];
      if (is.parent == kNoParent) {
        depth[h] = 0;
        ++resolved;
      } else {
        int ph = seq_infoset_[is.parent];
        if (depth[ph] >= 0) {
          depth[h] = depth[ph] + 1;
          ++resolved;
        } else {
          next.push_back(h);
        }
      }
    }
    if (next.size() == pending.size()) {
      throw std::invalid_argument("cyclic parent structure");
    }
    pending.swap(next);
  }
  (void)resolved;

  topo_order_.resize(infosets_.size());
  std::iota(topo_order_.begin(), topo_order_.end(), 0);
  std::stable_sort(topo_order_.begin(), topo_order_.end(),
                   [&](int a, int b) { return depth[a] > depth[b]; });
}

bool Treeplex::operator==(const Treeplex& other) const {
  if (dim_ != other.dim_ || infosets_.size() != other.infosets_.size()) {
    return false;
  }
  for (size_t h = 0; h < infosets_.size(); ++h) {
    const InfoSet& a = infosets_[h];
    const InfoSet& b = other.infosets_[h];
    if (a.parent != b.parent || a.first != b.first || a.size != b.size ||
        a.label != b.label) {
      return false;
    }
  }
  return true;
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "valid";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (const Violation& v : violations) {
    switch (v.kind) {
      case Violation::Kind::kNegative:
        os << " [negative seq " << v.seq << " = " << v.amount << "]";
        break;
      case Violation::Kind::kFlow:
        os << " [flow infoset " << v.infoset << " off by " << v.amount << "]";
        break;
      case Violation::Kind::kGammaFloor:
        os << " [gamma floor seq " << v.seq << " q = " << v.amount << "]";
        break;
    }
  }
  return os.str();
}

ValidationReport validate(const Treeplex& tp, const SequenceStrategy& z,
                          double gamma, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  // An over-large floor is not a structural error here: the report simply
  // flags every probability below it.
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("gamma must be in [0, 1)");
  }
  check_dim(tp, z.size(), "strategy");

  ValidationReport report;
  for (int i = 0; i < tp.dim(); ++i) {
    if (z[i] < -tol) {
      report.violations.push_back(
          Violation{Violation::Kind::kNegative, tp.infoset_of(i), i, z[i]});
    }
  }
  for (const InfoSet& is : tp.infosets()) {
    double parent_mass = is.parent == kNoParent ? 1.0 : z[is.parent];
    double sum = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) sum += z[i];
    if (std::abs(sum - parent_mass) > tol) {
      report.violations.push_back(Violation{Violation::Kind::kFlow, is.id, -1,
                                            sum - parent_mass});
    }
    if (gamma > 0.0) {
      if (parent_mass <= tol) {
        // In a gamma-floored treeplex every decision point keeps positive
        // reach, so a vanished parent is itself a floor violation.
        report.violations.push_back(
            Violation{Violation::Kind::kGammaFloor, is.id, -1, 0.0});
        continue;
      }
      for (int i = is.first; i < is.first + is.size; ++i) {
        double q = z[i] / parent_mass;
        if (q < gamma - tol) {
          report.violations.push_back(
              Violation{Violation::Kind::kGammaFloor, is.id, i, q});
        }
      }
    }
  }
  return report;
}

SequenceStrategy behavioral_to_sequence(const Treeplex& tp,
                                        std::span<const double> q) {
  check_dim(tp, static_cast<int>(q.size()), "behavioral strategy");
  SequenceStrategy z;
  z.values.resize(tp.dim());
  const std::vector<int>& topo = tp.topo_order();
  // Root to leaf: parents appear after children in topo order.
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const InfoSet& is = tp.infoset(*it);
    double parent_mass = is.parent == kNoParent ? 1.0 : z[is.parent];
    for (int i = is.first; i < is.first + is.size; ++i) {
      z[i] = q[i] * parent_mass;
    }
  }
  return z;
}

BehavioralStrategy sequence_to_behavioral(const Treeplex& tp,
                                          const SequenceStrategy& z) {
  check_dim(tp, z.size(), "strategy");
  BehavioralStrategy q;
  q.probs.resize(tp.dim());
  for (const InfoSet& is : tp.infosets()) {
    double parent_mass = is.parent == kNoParent ? 1.0 : z[is.parent];
    if (parent_mass == 0.0) {
      double u = 1.0 / is.size;
      for (int i = is.first; i < is.first + is.size; ++i) q.probs[i] = u;
      q.zero_parent_infosets.push_back(is.id);
    } else {
      for (int i = is.first; i < is.first + is.size; ++i) {
        q.probs[i] = z[i] / parent_mass;
      }
    }
  }
  return q;
}

SequenceStrategy uniform_strategy(const Treeplex& tp) {
  std::vector<double> q(tp.dim());
  for (const InfoSet& is : tp.infosets()) {
    double u = 1.0 / is.size;
    for (int i = is.first; i < is.first + is.size; ++i) q[i] = u;
  }
  return behavioral_to_sequence(tp, q);
}

LinearOpt treeplex_linear_opt(const Treeplex& tp, std::span<const double> g,
                              std::span<const double> infoset_bonus,
                              double gamma, Sense sense) {
  check_dim(tp, static_cast<int>(g.size()), "gradient");
  check_gamma(tp, gamma);
  if (!infoset_bonus.empty() &&
      static_cast<int>(infoset_bonus.size()) != tp.num_infosets()) {
    throw std::invalid_argument("infoset_bonus size mismatch");
  }

  std::vector<double> val(tp.dim());  // g_i plus optimal child values
  std::vector<double> opt(tp.num_infosets());
  std::vector<double> q(tp.dim());
  const bool maximize = sense == Sense::kMax;
  for (int h : tp.topo_order()) {
    const InfoSet& is = tp.infoset(h);
    int best = is.first;
    for (int i = is.first; i < is.first + is.size; ++i) {
      double v = g[i];
      for (int ch : tp.children_of(i)) v += opt[ch];
      val[i] = v;
      if (maximize ? v > val[best] : v < val[best]) best = i;
    }
    double o;
    if (gamma > 0.0) {
      double floor_sum = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        q[i] = gamma;
        floor_sum += val[i];
      }
      q[best] += 1.0 - gamma * is.size;
      o = gamma * floor_sum + (1.0 - gamma * is.size) * val[best];
    } else {
      for (int i = is.first; i < is.first + is.size; ++i) q[i] = 0.0;
      q[best] = 1.0;
      o = val[best];
    }
    if (!infoset_bonus.empty()) o += infoset_bonus[h];
    opt[h] = o;
  }

  LinearOpt result;
  result.value = 0.0;
  for (const InfoSet& is : tp.infosets()) {
    if (is.parent == kNoParent) result.value += opt[is.id];
  }
  result.arg = behavioral_to_sequence(tp, q);
  return result;
}

LinearOpt best_response(const Treeplex& tp, std::span<const double> g,
                        double gamma, Sense sense) {
  return treeplex_linear_opt(tp, g, {}, gamma, sense);
}

std::vector<double> project_simplex(std::span<const double> v, double gamma) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("cannot project an empty vector");
  if (gamma < 0.0 || gamma * n > 1.0 + 1e-15) {
    throw std::invalid_argument("infeasible gamma for simplex projection");
  }
  double slack = 1.0 - gamma * n;
  std::vector<double> q(n, gamma);
  if (slack <= 0.0) return q;  // the floor uses up all mass

  // Project (v - gamma)/slack onto the plain simplex by the sorting rule,
  // then map back.
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = (v[i] - gamma) / slack;
  std::vector<double> sorted(u);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (int k = 0; k < n; ++k) {
    cumsum += sorted[k];
    double candidate = (cumsum - 1.0) / (k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  for (int i = 0; i < n; ++i) {
    q[i] = gamma + slack * std::max(u[i] - theta, 0.0);
  }
  return q;
}

}  // namespace seqform
