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

// Compares the OpenMP kernels against their serial references and checks
// that both produce identical trajectories.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seqform/cfr.h"
#include "seqform/domd.h"
#include "seqform/game.h"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  std::chrono::duration<double, std::milli> d = Clock::now() - start;
  return d.count() / reps;
}

void bench_game(const char* name, const seqform::GameSpec& game, int reps) {
  using namespace seqform;
  JointStrategy z{uniform_strategy(game.x()), uniform_strategy(game.y())};

  double t_serial = time_ms(
      [&] {
        GradientPair g = game.payoff_operator_serial(z.x, z.y);
        (void)g;
      },
      reps * 10);
  double t_par = time_ms(
      [&] {
        GradientPair g = game.payoff_operator(z.x, z.y);
        (void)g;
      },
      reps * 10);
  GradientPair gs = game.payoff_operator_serial(z.x, z.y);
  GradientPair gp = game.payoff_operator(z.x, z.y);
  bool same = gs.x == gp.x && gs.y == gp.y;
  std::printf("%-8s payoff operator   serial %8.4f ms  omp %8.4f ms  "
              "speedup %.2fx  identical %s\n",
              name, t_serial, t_par, t_serial / t_par, same ? "yes" : "NO");

  auto cfr_run = [&](bool parallel) {
    RegCfrSolver solver(game, RegKind::kEuclidean, 0.01, 0.01, 8.0);
    solver.set_parallel(parallel);
    for (int t = 0; t < reps; ++t) solver.step();
    return solver.half_iterate();
  };
  double c_serial = time_ms([&] { cfr_run(false); }, 1);
  double c_par = time_ms([&] { cfr_run(true); }, 1);
  bool c_same = cfr_run(false).x.values == cfr_run(true).x.values;
  std::printf("%-8s reg-cfr %4d steps serial %8.2f ms  omp %8.2f ms  "
              "speedup %.2fx  identical %s\n",
              name, reps, c_serial, c_par, c_serial / c_par,
              c_same ? "yes" : "NO");

  auto domd_run = [&](bool parallel) {
    DomdSolver solver(game, RegKind::kEntropy, 1.0 / (8.0 * game.dim()), 0.05,
                      0.0);
    solver.set_parallel(parallel);
    for (int t = 0; t < reps; ++t) solver.step();
    return solver.last_iterate();
  };
  double d_serial = time_ms([&] { domd_run(false); }, 1);
  double d_par = time_ms([&] { domd_run(true); }, 1);
  bool d_same = domd_run(false).x.values == domd_run(true).x.values;
  std::printf("%-8s domd    %4d steps serial %8.2f ms  omp %8.2f ms  "
              "speedup %.2fx  identical %s\n",
              name, reps, d_serial, d_par, d_serial / d_par,
              d_same ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  int reps = argc > 1 ? std::atoi(argv[1]) : 200;
#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif
  bench_game("kuhn", seqform::build_kuhn(), reps);
  bench_game("leduc", seqform::build_leduc(), reps);
  return 0;
}
