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

#ifndef SEQFORM_GAME_H_
#define SEQFORM_GAME_H_

#include <string>
#include <vector>

#include "seqform/treeplex.h"

namespace seqform {

struct PayoffEntry {
  int x_seq = 0;
  int y_seq = 0;
  double value = 0.0;  // payoff to the max player, normalized to [-1, 1]
};

// Joint strategy profile z = (x, y).
struct JointStrategy {
  SequenceStrategy x;
  SequenceStrategy y;
};

// Loss gradients F(z) = (A y, -A^T x) for the min and max player.
struct GradientPair {
  std::vector<double> x;  // A y, length M
  std::vector<double> y;  // -A^T x, length N
};

// A two-player zero-sum game in sequence form: two treeplexes and a
// sparse payoff matrix normalized so every entry is in [-1, 1]. `scale`
// is the divisor applied during normalization; multiplying values by it
// recovers raw chips.
class GameSpec {
 public:
  GameSpec(Treeplex tp_x, Treeplex tp_y, std::vector<PayoffEntry> payoffs,
           double scale);

  const Treeplex& x() const { return tp_x_; }
  const Treeplex& y() const { return tp_y_; }
  double scale() const { return scale_; }
  // Sorted by (x_seq, y_seq); pairs are unique.
  const std::vector<PayoffEntry>& payoffs() const { return payoffs_; }
  int dim() const { return tp_x_.dim() + tp_y_.dim(); }  // P = M + N

  // F(z). Rows and columns are partitioned across threads; each output
  // coordinate is accumulated by exactly one thread in index order, so
  // the result is bit-identical to the serial variant.
  GradientPair payoff_operator(const SequenceStrategy& x,
                               const SequenceStrategy& y) const;
  GradientPair payoff_operator_serial(const SequenceStrategy& x,
                                      const SequenceStrategy& y) const;

  // x^T A y
  double bilinear_value(const SequenceStrategy& x,
                        const SequenceStrategy& y) const;

 private:
  Treeplex tp_x_, tp_y_;
  std::vector<PayoffEntry> payoffs_;  // row-major (by x_seq)
  double scale_ = 1.0;
  std::vector<int> row_ptr_;    // size M+1 into payoffs_
  std::vector<int> col_order_;  // payoff indices sorted by (y_seq, x_seq)
  std::vector<int> col_ptr_;    // size N+1 into col_order_
};

// 3-card Kuhn poker; chance probabilities and chip payoffs are folded
// into the payoff matrix, then normalized.
GameSpec build_kuhn();

// 6-card Leduc poker: ante 1, two betting rounds with at most two raises
// each, raise size 1 in round one and 2 in round two, one public card
// between rounds, ties split the pot.
GameSpec build_leduc();

// A normal-form game as a pair of single-simplex treeplexes.
GameSpec build_matrix_game(const std::vector<std::vector<double>>& raw);

// JSON game file round trip. load_game rejects malformed files,
// out-of-range or duplicate payoff entries.
GameSpec load_game(const std::string& path);
void save_game(const GameSpec& game, const std::string& path);

}  // namespace seqform

#endif  // SEQFORM_GAME_H_
