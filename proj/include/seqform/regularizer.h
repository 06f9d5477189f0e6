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

#ifndef SEQFORM_REGULARIZER_H_
#define SEQFORM_REGULARIZER_H_

#include <optional>
#include <span>
#include <vector>

#include "seqform/treeplex.h"

namespace seqform {

enum class RegKind { kEntropy, kEuclidean };

// Base regularizer on one simplex: negative entropy sum q log q, or the
// halved squared norm 1/2 sum q^2. The halved form makes the dilated
// Bregman divergence collapse to a per-infoset quadratic.
double base_value(RegKind kind, std::span<const double> q);
std::vector<double> base_grad(RegKind kind, std::span<const double> q);

// Weights making the dilated regularizer strongly convex:
// alpha_h = 2 + 2 * max_{i in Omega_h} sum_{h' child of i} alpha_{h'}.
// The same scheme is used for both base kinds.
std::vector<double> compute_alpha(const Treeplex& tp, RegKind kind);

// Dilated regularizer psi(z) = sum_h alpha_h * z_parent(h) *
// base(z_h / z_parent(h)) over one player's treeplex.
class DilatedRegularizer {
 public:
  DilatedRegularizer(const Treeplex& tp, RegKind kind);

  const Treeplex& treeplex() const { return *tp_; }
  RegKind kind() const { return kind_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double alpha_max() const { return alpha_max_; }

  // psi(z); decision points with zero mass contribute 0 (the limit
  // value). Off the flow manifold the in-block mass stands in for the
  // parent variable, which keeps value and grad a consistent pair under
  // finite differences.
  double value(const SequenceStrategy& z) const;

  // Euclidean gradient of psi as a function on R^dim. Requires interior
  // z; throws std::domain_error at the boundary.
  std::vector<double> grad(const SequenceStrategy& z) const;

  // The same gradient evaluated from behavioral coordinates, assuming
  // flow conservation. Well-defined at the boundary through the
  // uniform-on-zero-parent convention, which is what the solvers need.
  std::vector<double> grad_from_behavioral(std::span<const double> q) const;

  // Bregman divergence D(z1, z2). Euclidean kind uses the closed form
  // sum_h (alpha_h/2) z1_parent ||q1_h - q2_h||^2; entropy kind the
  // dilated KL sum_h alpha_h z1_parent KL(q1_h || q2_h).
  double bregman(const SequenceStrategy& z1, const SequenceStrategy& z2) const;

  // psi(z1) - psi(z2) - <grad(z2), z1 - z2>, the textbook definition.
  // Interior z2 required. Kept as an independent route for testing the
  // closed forms.
  double bregman_from_definition(const SequenceStrategy& z1,
                                 const SequenceStrategy& z2) const;

 private:
  const Treeplex* tp_;
  RegKind kind_;
  std::vector<double> alpha_;
  double alpha_max_ = 0.0;
};

// argmin_{q in simplex^gamma} <g, q> + step * D(q, q_prev)
//                                    + anchor_weight * D(q, q_anchor)
// where D is the base-kind Bregman divergence on the simplex. The
// entropy kind supports gamma = 0 only.
struct ProxAnchor {
  double weight = 0.0;
  std::span<const double> q;
};
std::vector<double> local_prox(RegKind kind, std::span<const double> q_prev,
                               std::span<const double> g, double step,
                               std::optional<ProxAnchor> anchor, double gamma);

// min_{q in simplex^gamma} <c, q> + a * base(kind, q). a = 0 degenerates
// to the gamma-floored linear minimum; entropy needs gamma = 0 when
// a > 0. Returns the optimal value and minimizer.
struct LocalMin {
  double value = 0.0;
  std::vector<double> q;
};
LocalMin local_smoothed_min(RegKind kind, std::span<const double> c, double a,
                            double gamma);

// Exact minimizer of <g, z> + weight * psi(z) over the gamma-floored
// treeplex, leaf to root. weight = 0 degenerates to best_response(kMin).
LinearOpt smoothed_best_response(const DilatedRegularizer& reg,
                                 std::span<const double> g, double weight,
                                 double gamma);

}  // namespace seqform

#endif  // SEQFORM_REGULARIZER_H_
