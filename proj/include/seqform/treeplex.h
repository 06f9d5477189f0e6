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

#ifndef SEQFORM_TREEPLEX_H_
#define SEQFORM_TREEPLEX_H_

#include <span>
#include <string>
#include <vector>

namespace seqform {

inline constexpr int kNoParent = -1;

// One decision point. Owns the contiguous block of sequence indices
// [first, first + size).
struct InfoSet {
  int id = 0;
  int parent = kNoParent;  // sequence index of the parent, or kNoParent
  int first = 0;
  int size = 0;
  std::string label;
};

// Sequence-form strategy: one probability mass per sequence index. The
// virtual root is not stored; its mass is 1 by convention.
struct SequenceStrategy {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

// Per-infoset action distributions, stored flat in sequence-index order.
// `zero_parent_infosets` lists decision points whose parent mass was zero
// when converting from sequence form; those blocks were set to uniform.
struct BehavioralStrategy {
  std::vector<double> probs;
  std::vector<int> zero_parent_infosets;
};

struct Violation {
  enum class Kind { kNegative, kFlow, kGammaFloor };
  Kind kind;
  int infoset;  // -1 when not tied to a decision point
  int seq;      // -1 when not tied to a single sequence
  double amount;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// A player's sequence-form decision set. Information sets are stored in
// declaration order (which fixes the index layout); `topo_order()` gives
// them sorted children-before-parents so every bottom-up recursion is a
// single pass.
class Treeplex {
 public:
  struct InfoSetSpec {
    int parent = kNoParent;
    int num_actions = 0;
    std::string label;
  };

  Treeplex() = default;
  explicit Treeplex(const std::vector<InfoSetSpec>& specs);

  int dim() const { return dim_; }
  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const InfoSet& infoset(int h) const { return infosets_[h]; }
  const std::vector<InfoSet>& infosets() const { return infosets_; }
  const std::vector<int>& topo_order() const { return topo_order_; }

  // h(i): the decision point owning sequence index i.
  int infoset_of(int seq) const { return seq_infoset_[seq]; }
  // Decision points whose parent sequence is i.
  const std::vector<int>& children_of(int seq) const {
    return seq_children_[seq];
  }
  // max_h |Omega_h|
  int max_actions() const { return max_actions_; }

  bool operator==(const Treeplex& other) const;

 private:
  std::vector<InfoSet> infosets_;
  std::vector<int> topo_order_;
  std::vector<int> seq_infoset_;
  std::vector<std::vector<int>> seq_children_;
  int dim_ = 0;
  int max_actions_ = 0;
};

enum class Sense { kMax, kMin };

struct LinearOpt {
  double value = 0.0;
  SequenceStrategy arg;
};

// Checks flow conservation, nonnegativity and the gamma floor on
// behavioral probabilities. Throws std::invalid_argument on dimension
// mismatch or an infeasible gamma.
ValidationReport validate(const Treeplex& tp, const SequenceStrategy& z,
                          double gamma, double tol = 1e-9);

// Root-to-leaf expansion z_i = q_i * z_parent. The result satisfies flow
// conservation up to rounding.
SequenceStrategy behavioral_to_sequence(const Treeplex& tp,
                                        std::span<const double> q);

// q_i = z_i / z_parent; blocks with zero parent mass become uniform and
// are flagged in the result.
BehavioralStrategy sequence_to_behavioral(const Treeplex& tp,
                                          const SequenceStrategy& z);

// Uniform action distribution at every decision point, in sequence form.
SequenceStrategy uniform_strategy(const Treeplex& tp);

// Exact linear optimization over the gamma-floored treeplex, leaf to
// root. `infoset_bonus`, when non-empty, adds a constant reward for
// reaching each decision point (credited at its parent sequence).
LinearOpt treeplex_linear_opt(const Treeplex& tp, std::span<const double> g,
                              std::span<const double> infoset_bonus,
                              double gamma, Sense sense);

// argopt_{z in Z^gamma} <g, z>. Ties broken toward the lowest index.
LinearOpt best_response(const Treeplex& tp, std::span<const double> g,
                        double gamma, Sense sense);

// Euclidean projection onto {q : q_i >= gamma, sum q = 1} by sorting.
std::vector<double> project_simplex(std::span<const double> v, double gamma);

}  // namespace seqform

#endif  // SEQFORM_TREEPLEX_H_
