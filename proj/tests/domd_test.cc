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
#include "seqform/domd.h"
#include "seqform/game.h"
#include "seqform/metrics.h"

using namespace seqform;

namespace {

Treeplex depth2() {
  return Treeplex({{kNoParent, 2, "root"}, {0, 2, "child"}});
}

// Test-local Bregman divergence of the dilated regularizer, built from
// the per-block definition rather than the library routine.
double breg_direct(RegKind kind, const Treeplex& tp,
                   const std::vector<double>& alpha, const SequenceStrategy& a,
                   const SequenceStrategy& b) {
  double total = 0.0;
  for (const InfoSet& is : tp.infosets()) {
    double sa = is.parent == kNoParent ? 1.0 : a[is.parent];
    double sb = is.parent == kNoParent ? 1.0 : b[is.parent];
    if (sa == 0.0) continue;
    double local = 0.0;
    for (int i = is.first; i < is.first + is.size; ++i) {
      double qa = a[i] / sa;
      double qb = sb == 0.0 ? 1.0 / is.size : b[i] / sb;
      if (kind == RegKind::kEuclidean) {
        local += 0.5 * (qa - qb) * (qa - qb);
      } else if (qa > 0.0) {
        local += qa * std::log(qa / qb);
      }
    }
    total += alpha[is.id] * sa * local;
  }
  return total;
}

double max_abs_diff(const SequenceStrategy& a, const SequenceStrategy& b) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("prox fixed point at zero gradient") {
  GameSpec kuhn = build_kuhn();
  std::vector<double> zero(kuhn.x().dim(), 0.0);
  for (RegKind kind : {RegKind::kEntropy, RegKind::kEuclidean}) {
    DilatedRegularizer reg(kuhn.x(), kind);
    SequenceStrategy hat = uniform_strategy(kuhn.x());
    SequenceStrategy out = dilated_prox(reg, hat, zero, 0.01, 0.0, 0.0);
    CHECK(max_abs_diff(out, hat) <= 1e-14);
  }
}

TEST_CASE("prox on one simplex is the multiplicative weights step") {
  Treeplex tp({{kNoParent, 3, "root"}});
  DilatedRegularizer reg(tp, RegKind::kEntropy);
  const double alpha = reg.alpha()[0];  // 2 by the recurrence
  SequenceStrategy hat;
  hat.values = {0.2, 0.5, 0.3};
  std::vector<double> g = {0.7, -0.1, 0.4};
  double eta = 0.25;
  SequenceStrategy out = dilated_prox(reg, hat, g, eta, 0.0, 0.0);
  double norm = 0.0;
  std::vector<double> expect(3);
  for (int i = 0; i < 3; ++i) {
    expect[i] = hat[i] * std::exp(-eta * g[i] / alpha);
    norm += expect[i];
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(out[i] == doctest::Approx(expect[i] / norm).epsilon(1e-12));
  }
}

TEST_CASE("prox minimizes the objective against a fine grid") {
  Treeplex tp = depth2();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (RegKind kind : {RegKind::kEntropy, RegKind::kEuclidean}) {
    DilatedRegularizer reg(tp, kind);
    for (double tau : {0.0, 0.3}) {
      std::vector<double> g(4);
      for (double& v : g) v = u(rng);
      SequenceStrategy hat;
      hat.values = {0.6, 0.4, 0.6 * 0.3, 0.6 * 0.7};
      const double eta = 0.5;

      std::vector<double> lin(4);
      std::vector<double> reg_grad = reg.grad(hat);
      for (int i = 0; i < 4; ++i) lin[i] = g[i] + tau * reg_grad[i];

      auto objective = [&](const SequenceStrategy& z) {
        double obj = breg_direct(kind, tp, reg.alpha(), z, hat) / eta;
        for (int i = 0; i < 4; ++i) obj += lin[i] * z[i];
        return obj;
      };

      SequenceStrategy out = dilated_prox(reg, hat, g, eta, tau, 0.0);
      double got = objective(out);

      double best = 1e300;
      const int n = 1000;
      for (int a = 0; a <= n; ++a) {
        double t = static_cast<double>(a) / n;
        for (int b = 0; b <= n; ++b) {
          double s = static_cast<double>(b) / n;
          SequenceStrategy z;
          z.values = {t, 1.0 - t, t * s, t * (1.0 - s)};
          best = std::min(best, objective(z));
        }
      }
      CHECK(got <= best + 1e-4);
    }
  }
}

TEST_CASE("zero payoff keeps iterates uniform") {
  GameSpec zero = build_matrix_game({{0.0, 0.0}, {0.0, 0.0}});
  DomdSolver solver(zero, RegKind::kEntropy, 0.05, 0.0, 0.0);
  SequenceStrategy u = uniform_strategy(zero.x());
  for (int t = 0; t < 10; ++t) {
    solver.step();
    CHECK(max_abs_diff(solver.last_iterate().x, u) <= 1e-15);
    CHECK(max_abs_diff(solver.current_iterate().y, u) <= 1e-15);
  }
}

TEST_CASE("tau = 0 reproduces a separately coded unregularized step") {
  GameSpec kuhn = build_kuhn();
  for (RegKind kind : {RegKind::kEntropy, RegKind::kEuclidean}) {
    DilatedRegularizer rx(kuhn.x(), kind), ry(kuhn.y(), kind);
    const double eta = 1.0 / (8.0 * kuhn.dim());

    DomdSolver solver(kuhn, kind, eta, 0.0, 0.0);

    // plain optimistic update, no regularization terms anywhere
    JointStrategy z_prev{uniform_strategy(kuhn.x()),
                         uniform_strategy(kuhn.y())};
    JointStrategy z_hat = z_prev;
    for (int t = 0; t < 25; ++t) {
      GradientPair g_prev = kuhn.payoff_operator(z_prev.x, z_prev.y);
      JointStrategy z_t;
      z_t.x = dilated_prox(rx, z_hat.x, g_prev.x, eta, 0.0, 0.0);
      z_t.y = dilated_prox(ry, z_hat.y, g_prev.y, eta, 0.0, 0.0);
      GradientPair g_t = kuhn.payoff_operator(z_t.x, z_t.y);
      JointStrategy next_hat;
      next_hat.x = dilated_prox(rx, z_hat.x, g_t.x, eta, 0.0, 0.0);
      next_hat.y = dilated_prox(ry, z_hat.y, g_t.y, eta, 0.0, 0.0);
      z_prev = z_t;
      z_hat = next_hat;

      solver.step();
      CHECK(solver.current_iterate().x.values == z_prev.x.values);
      CHECK(solver.current_iterate().y.values == z_prev.y.values);
      CHECK(solver.last_iterate().x.values == z_hat.x.values);
      CHECK(solver.last_iterate().y.values == z_hat.y.values);
    }
  }
}

TEST_CASE("iterates stay valid and entropy iterates stay interior") {
  GameSpec kuhn = build_kuhn();
  DomdSolver solver(kuhn, RegKind::kEntropy, 1.0 / (8.0 * kuhn.dim()), 0.05,
                    0.0);
  for (int t = 0; t < 200; ++t) {
    solver.step();
    CHECK(validate(kuhn.x(), solver.last_iterate().x, 0.0, 1e-9).ok());
    CHECK(validate(kuhn.y(), solver.last_iterate().y, 0.0, 1e-9).ok());
    for (double v : solver.last_iterate().x.values) CHECK(v > 0.0);
    for (double v : solver.last_iterate().y.values) CHECK(v > 0.0);
  }
}

TEST_CASE("contraction potential is monotone along a fixed-tau run") {
  GameSpec kuhn = build_kuhn();
  const double tau = 0.05;
  const double eta = 1.0 / (8.0 * kuhn.dim());
  for (RegKind kind : {RegKind::kEntropy, RegKind::kEuclidean}) {
    JointStrategy ref = reference_solution(kuhn, kind, tau, 0.0, 1e-9);
    DilatedRegularizer rx(kuhn.x(), kind), ry(kuhn.y(), kind);
    DomdSolver solver(kuhn, kind, eta, tau, 0.0);

    auto dist = [&](const JointStrategy& a, const JointStrategy& b) {
      return rx.bregman(a.x, b.x) + ry.bregman(a.y, b.y);
    };

    double potential = -1.0;
    for (int t = 0; t < 300; ++t) {
      solver.step();
      double next = dist(ref, solver.last_iterate()) +
                    dist(solver.last_iterate(), solver.current_iterate());
      if (potential >= 0.0) {
        CHECK(next <= (1.0 - eta * tau) * potential + 1e-9);
      }
      potential = next;
    }
  }
}

TEST_CASE("dogda on matching pennies finds the regularized solution") {
  GameSpec mp = build_matrix_game({{1, -1}, {-1, 1}});
  const double tau = 0.1;

  // grid + refinement oracle over the 2x2 game: scan behavioral (x1, y1)
  DilatedRegularizer rx(mp.x(), RegKind::kEuclidean);
  DilatedRegularizer ry(mp.y(), RegKind::kEuclidean);
  double best_res = 1e300;
  double best_x = -1.0, best_y = -1.0;
  for (int a = 0; a <= 200; ++a) {
    for (int b = 0; b <= 200; ++b) {
      JointStrategy z;
      z.x.values = {a / 200.0, 1.0 - a / 200.0};
      z.y.values = {b / 200.0, 1.0 - b / 200.0};
      double r = saddle_residual(mp, rx, ry, tau, z, 0.0);
      if (r < best_res) {
        best_res = r;
        best_x = a / 200.0;
        best_y = b / 200.0;
      }
    }
  }
  CHECK(best_x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(best_y == doctest::Approx(0.5).epsilon(1e-9));

  DomdSolver solver(mp, RegKind::kEuclidean, 1.0 / (8.0 * mp.dim()), tau, 0.0);
  for (int t = 0; t < 5000; ++t) solver.step();
  double res = saddle_residual(mp, rx, ry, tau, solver.last_iterate(), 0.0);
  CHECK(res <= 1e-8);
  CHECK(std::abs(solver.last_iterate().x[0] - best_x) <= 1e-6);
  CHECK(std::abs(solver.last_iterate().y[0] - best_y) <= 1e-6);
}

TEST_CASE("unsupported combinations are rejected") {
  GameSpec kuhn = build_kuhn();
  CHECK_THROWS_AS(DomdSolver(kuhn, RegKind::kEntropy, 0.01, 0.1, 0.05),
                  std::invalid_argument);
  DilatedRegularizer reg(kuhn.x(), RegKind::kEntropy);
  std::vector<double> g(kuhn.x().dim(), 0.0);
  SequenceStrategy hat = uniform_strategy(kuhn.x());
  CHECK_THROWS_AS(dilated_prox(reg, hat, g, 0.01, 0.0, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(dilated_prox(reg, hat, g, -1.0, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("serial and parallel steps are bit-identical") {
  GameSpec kuhn = build_kuhn();
  DomdSolver par(kuhn, RegKind::kEntropy, 0.005, 0.02, 0.0);
  DomdSolver ser(kuhn, RegKind::kEntropy, 0.005, 0.02, 0.0);
  ser.set_parallel(false);
  for (int t = 0; t < 50; ++t) {
    par.step();
    ser.step();
  }
  CHECK(par.last_iterate().x.values == ser.last_iterate().x.values);
  CHECK(par.last_iterate().y.values == ser.last_iterate().y.values);
}
