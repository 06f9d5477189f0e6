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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "seqform/cfr.h"
#include "seqform/domd.h"
#include "seqform/game.h"
#include "seqform/metrics.h"

using namespace seqform;

namespace {

JointStrategy random_joint(const GameSpec& game, std::mt19937* rng) {
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  JointStrategy z;
  for (int p = 0; p < 2; ++p) {
    const Treeplex& tp = p == 0 ? game.x() : game.y();
    std::vector<double> q(tp.dim());
    for (const InfoSet& is : tp.infosets()) {
      double sum = 0.0;
      for (int i = is.first; i < is.first + is.size; ++i) {
        q[i] = u(*rng);
        sum += q[i];
      }
      for (int i = is.first; i < is.first + is.size; ++i) q[i] /= sum;
    }
    (p == 0 ? z.x : z.y) = behavioral_to_sequence(tp, q);
  }
  return z;
}

}  // namespace

TEST_CASE("duality gap basics and gamma monotonicity") {
  GameSpec mp = build_matrix_game({{1, -1}, {-1, 1}});
  JointStrategy u{uniform_strategy(mp.x()), uniform_strategy(mp.y())};
  CHECK(duality_gap(mp, u, 0.0) == doctest::Approx(0.0).epsilon(1e-14));

  GameSpec kuhn = build_kuhn();
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    JointStrategy z = random_joint(kuhn, &rng);
    double g0 = duality_gap(kuhn, z, 0.0);
    CHECK(g0 >= -1e-12);
    double prev = g0;
    for (double gamma : {0.05, 0.1, 0.2}) {
      double gg = duality_gap(kuhn, z, gamma);
      CHECK(gg <= prev + 1e-12);
      prev = gg;
    }
  }
}

TEST_CASE("saddle residual degenerates to the gap at tau = 0") {
  GameSpec kuhn = build_kuhn();
  DilatedRegularizer rx(kuhn.x(), RegKind::kEntropy);
  DilatedRegularizer ry(kuhn.y(), RegKind::kEntropy);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    JointStrategy z = random_joint(kuhn, &rng);
    double gap = duality_gap(kuhn, z, 0.0);
    double res = saddle_residual(kuhn, rx, ry, 0.0, z, 0.0);
    CHECK(std::abs(gap - res) <= 1e-12);
  }
}

TEST_CASE("saddle residual dominates sampled comparators") {
  GameSpec kuhn = build_kuhn();
  const double tau = 0.1;
  DilatedRegularizer rx(kuhn.x(), RegKind::kEuclidean);
  DilatedRegularizer ry(kuhn.y(), RegKind::kEuclidean);
  std::mt19937 rng(11);
  JointStrategy z = random_joint(kuhn, &rng);
  double res = saddle_residual(kuhn, rx, ry, tau, z, 0.0);
  GradientPair g = kuhn.payoff_operator(z.x, z.y);
  double own = tau * (rx.value(z.x) + ry.value(z.y));
  for (int i = 0; i < kuhn.x().dim(); ++i) own += g.x[i] * z.x[i];
  for (int j = 0; j < kuhn.y().dim(); ++j) own += g.y[j] * z.y[j];
  for (int trial = 0; trial < 100000; ++trial) {
    JointStrategy hat = random_joint(kuhn, &rng);
    double linear = 0.0;
    for (int i = 0; i < kuhn.x().dim(); ++i) linear += g.x[i] * hat.x[i];
    for (int j = 0; j < kuhn.y().dim(); ++j) linear += g.y[j] * hat.y[j];
    double value = own - linear - tau * (rx.value(hat.x) + ry.value(hat.y));
    CHECK(value <= res + 1e-10);
  }
}

TEST_CASE("reference solution is a fixed point with tiny residual") {
  GameSpec mp = build_matrix_game({{1, -1}, {-1, 1}});
  JointStrategy ref =
      reference_solution(mp, RegKind::kEntropy, 1.0, 0.0, 1e-10);
  // symmetry: the regularized solution of matching pennies is uniform
  CHECK(ref.x[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(ref.y[0] == doctest::Approx(0.5).epsilon(1e-8));

  GameSpec kuhn = build_kuhn();
  for (RegKind kind : {RegKind::kEntropy, RegKind::kEuclidean}) {
    JointStrategy z = reference_solution(kuhn, kind, 0.1, 0.0, 1e-10);
    DilatedRegularizer rx(kuhn.x(), kind), ry(kuhn.y(), kind);
    CHECK(saddle_residual(kuhn, rx, ry, 0.1, z, 0.0) <= 1e-10);

    // one more optimistic step barely moves it
    DomdState state{z, z, 0, 1.0 / (8.0 * kuhn.dim()), 0.1};
    DomdStepResult next = domd_step(state, kuhn, rx, ry, 0.0);
    double move = 0.0;
    for (int i = 0; i < kuhn.x().dim(); ++i) {
      move = std::max(move, std::abs(next.state.z_hat.x[i] - z.x[i]));
    }
    CHECK(move <= 1e-9);
  }

  CHECK_THROWS_AS(reference_solution(kuhn, RegKind::kEntropy, 0.0, 0.0, 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      reference_solution(kuhn, RegKind::kEntropy, 0.1, 0.0, 1e-13, 100),
      ConvergenceError);
  try {
    reference_solution(kuhn, RegKind::kEntropy, 0.1, 0.0, 1e-13, 100);
  } catch (const ConvergenceError& e) {
    CHECK(e.achieved_residual > 0.0);
  }
}

TEST_CASE("perturbed-gap bound check") {
  GameSpec kuhn = build_kuhn();
  std::mt19937 rng(13);

  JointStrategy z = random_joint(kuhn, &rng);
  EfpeCheck at_zero = efpe_gap_bound_check(kuhn, z, 0.0);
  CHECK(at_zero.lhs == doctest::Approx(at_zero.rhs).epsilon(1e-14));
  CHECK(at_zero.holds);

  RegCfrSolver solver(kuhn, RegKind::kEuclidean, 0.01, 0.05, 4.0);
  for (int t = 0; t < 200; ++t) {
    solver.step();
    if (t % 20 == 0) {
      EfpeCheck c = efpe_gap_bound_check(kuhn, solver.half_iterate(), 0.05);
      CHECK(c.holds);
    }
  }

  GameSpec mp = build_matrix_game({{1, -1}, {-1, 1}});
  JointStrategy u{uniform_strategy(mp.x()), uniform_strategy(mp.y())};
  EfpeCheck c = efpe_gap_bound_check(mp, u, 0.1);
  CHECK(c.lhs == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(c.holds);
}

TEST_CASE("distance metrics") {
  GameSpec kuhn = build_kuhn();
  DilatedRegularizer rx(kuhn.x(), RegKind::kEuclidean);
  DilatedRegularizer ry(kuhn.y(), RegKind::kEuclidean);
  std::mt19937 rng(17);
  JointStrategy z = random_joint(kuhn, &rng);
  DistancePair same = distance_metrics(rx, ry, z, z);
  CHECK(same.l2 == doctest::Approx(0.0));
  CHECK(same.bregman == doctest::Approx(0.0));

  for (int trial = 0; trial < 200; ++trial) {
    JointStrategy a = random_joint(kuhn, &rng);
    JointStrategy b = random_joint(kuhn, &rng);
    DistancePair d = distance_metrics(rx, ry, a, b);
    CHECK(d.bregman >= 0.5 * d.l2 * d.l2 - 1e-9);
  }
}

TEST_CASE("regularizer bound constants") {
  GameSpec kuhn = build_kuhn();
  // P = 24, max alpha = 6, max actions = 2
  CHECK(regularizer_bound(kuhn, RegKind::kEntropy) ==
        doctest::Approx(24.0 * 6.0 * std::log(2.0)));
  CHECK(regularizer_bound(kuhn, RegKind::kEuclidean) ==
        doctest::Approx(24.0 * 6.0 / 2.0));
}

TEST_CASE("gap is bounded by the tau-scaled constants along a run") {
  GameSpec kuhn = build_kuhn();
  const double tau = 0.05;
  const RegKind kind = RegKind::kEntropy;
  JointStrategy ref = reference_solution(kuhn, kind, tau, 0.0, 1e-10);
  DilatedRegularizer rx(kuhn.x(), kind), ry(kuhn.y(), kind);
  DomdSolver solver(kuhn, kind, 1.0 / (8.0 * kuhn.dim()), tau, 0.0);
  double cb = regularizer_bound(kuhn, kind);
  double p = kuhn.dim();
  for (int t = 1; t <= 300; ++t) {
    solver.step();
    if (t % 10 != 0) continue;
    double gap = duality_gap(kuhn, solver.last_iterate(), 0.0);
    DistancePair d = distance_metrics(rx, ry, solver.last_iterate(), ref);
    CHECK(gap <= 2.0 * tau * cb + 2.0 * p * std::sqrt(d.bregman) + 1e-6);
  }
}
