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
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seqform/domd.h"
#include "seqform/metrics.h"
#include "seqform/runner.h"

using namespace seqform;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("game selection by name and file") {
  CHECK(make_game("kuhn").x().dim() == 12);
  CHECK_THROWS_AS(make_game("no-such-game"), ConfigError);

  std::FILE* f = std::fopen("runner_matrix_test.json", "w");
  REQUIRE(f != nullptr);
  std::fputs(R"({"matrix": [[1, -1], [-1, 1]]})", f);
  std::fclose(f);
  GameSpec mp = make_game("runner_matrix_test.json");
  CHECK(mp.x().dim() == 2);
  CHECK(mp.y().dim() == 2);
  std::remove("runner_matrix_test.json");

  GameSpec kuhn = build_kuhn();
  save_game(kuhn, "runner_game_test.json");
  GameSpec loaded = make_game("runner_game_test.json");
  CHECK(loaded.x() == kuhn.x());
  std::remove("runner_game_test.json");
}

TEST_CASE("configuration validation") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.iters = 0;
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  cfg = RunConfig{};
  cfg.gamma = 0.6;  // two-action decisions cap gamma below 1/2
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  cfg = RunConfig{};
  cfg.algo = Algo::kRegDomwu;
  cfg.gamma = 0.1;
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  cfg = RunConfig{};
  cfg.algo = Algo::kCfr;
  cfg.gamma = 0.1;
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  cfg = RunConfig{};
  cfg.tau_mode = TauMode::kAdaptive;
  cfg.tau0 = 0.0;
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  cfg = RunConfig{};
  cfg.algo = Algo::kCfrPlus;
  cfg.tau_mode = TauMode::kAdaptive;
  cfg.tau0 = 0.1;
  CHECK_THROWS_AS(run_solve(cfg, kuhn), ConfigError);

  CHECK_THROWS_AS(algo_from_string("nope"), ConfigError);
  CHECK(algo_from_string("reg-cfr") == Algo::kRegCfr);
  CHECK(tau_mode_from_string("episodic") == TauMode::kEpisodic);
}

TEST_CASE("fixed run on a degenerate game emits one clean record") {
  std::FILE* f = std::fopen("runner_zero_test.json", "w");
  REQUIRE(f != nullptr);
  std::fputs(R"({"matrix": [[0, 0], [0, 0]]})", f);
  std::fclose(f);
  GameSpec zero = make_game("runner_zero_test.json");
  std::remove("runner_zero_test.json");

  RunConfig cfg;
  cfg.game = "zero";
  cfg.algo = Algo::kRegDomwu;
  cfg.tau0 = 0.0;
  cfg.iters = 1;
  Trace trace = run_fixed_tau(cfg, zero);
  REQUIRE(trace.records.size() == 1);
  CHECK(trace.records[0].iter == 1);
  CHECK(trace.records[0].duality_gap == doctest::Approx(0.0));
  CHECK(trace.records[0].wall_ns == 0);
  CHECK(trace.records[0].dist_ref_l2 == doctest::Approx(-1.0));
}

TEST_CASE("fixed run logging cadence and reference distances") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.algo = Algo::kRegDomwu;
  cfg.tau0 = 0.05;
  cfg.iters = 50;
  cfg.log_every = 20;
  cfg.ref_tol = 1e-9;
  Trace trace = run_fixed_tau(cfg, kuhn);
  REQUIRE(trace.records.size() == 3);
  CHECK(trace.records[0].iter == 20);
  CHECK(trace.records[1].iter == 40);
  CHECK(trace.records[2].iter == 50);
  for (const MetricsRecord& r : trace.records) {
    CHECK(r.tau == doctest::Approx(0.05));
    CHECK(r.dist_ref_l2 >= 0.0);
    CHECK(r.dist_ref_bregman >= 0.0);
    CHECK(r.saddle_residual >= -1e-9);
  }
  // contraction toward the reference shows up in the distances
  CHECK(trace.records[2].dist_ref_bregman <
        trace.records[0].dist_ref_bregman);
}

TEST_CASE("reg-cfr fixed run logs min-so-far bregman distance") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.algo = Algo::kRegCfr;
  cfg.tau0 = 0.05;
  cfg.iters = 120;
  cfg.log_every = 10;
  cfg.ref_tol = 1e-9;
  Trace trace = run_fixed_tau(cfg, kuhn);
  double prev = std::numeric_limits<double>::infinity();
  for (const MetricsRecord& r : trace.records) {
    CHECK(r.dist_ref_bregman <= prev + 1e-15);
    prev = r.dist_ref_bregman;
  }
}

TEST_CASE("adaptive shrinking matches a hand-rolled transliteration") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.algo = Algo::kRegDomwu;
  cfg.tau_mode = TauMode::kAdaptive;
  cfg.tau0 = 0.1;
  cfg.iters = 600;
  cfg.log_every = 1;
  Trace trace = run_adaptive_shrink(cfg, kuhn);
  REQUIRE(trace.records.size() == 600);

  // shadow loop, straight from the shrinking rule
  DilatedRegularizer rx(kuhn.x(), RegKind::kEntropy);
  DilatedRegularizer ry(kuhn.y(), RegKind::kEntropy);
  DomdSolver solver(kuhn, RegKind::kEntropy, 1.0 / (8.0 * kuhn.dim()), 0.1,
                    0.0);
  double tau = 0.1;
  double bar = saddle_residual(kuhn, rx, ry, tau, solver.last_iterate(), 0.0);
  for (int t = 1; t <= 600; ++t) {
    solver.step();
    double res =
        saddle_residual(kuhn, rx, ry, tau, solver.last_iterate(), 0.0);
    const MetricsRecord& r = trace.records[t - 1];
    CHECK(r.iter == t);
    CHECK(r.tau == doctest::Approx(tau).epsilon(1e-15));
    CHECK(r.saddle_residual == doctest::Approx(res).epsilon(1e-12));
    if (res <= bar / 4.0) {
      tau /= 2.0;
      solver.set_tau(tau);
      bar = saddle_residual(kuhn, rx, ry, tau, solver.last_iterate(), 0.0);
      solver.restart_from_center();
    }
  }

  // tau trace: nonincreasing, always tau0 / 2^k, and the record before a
  // halving shows the residual that pulled the trigger
  double prev_tau = cfg.tau0;
  for (size_t k = 0; k < trace.records.size(); ++k) {
    double t = trace.records[k].tau;
    CHECK(t <= prev_tau + 1e-18);
    double ratio = cfg.tau0 / t;
    CHECK(std::abs(ratio - std::round(ratio)) <= 1e-9);
    prev_tau = t;
  }
}

TEST_CASE("adaptive trigger fires immediately on a zero game") {
  GameSpec zero = build_matrix_game({{0.0, 0.0}, {0.0, 0.0}});
  RunConfig cfg;
  cfg.algo = Algo::kRegDomwu;
  cfg.tau_mode = TauMode::kAdaptive;
  cfg.tau0 = 1.0;
  cfg.iters = 12;
  cfg.log_every = 1;
  Trace trace = run_adaptive_shrink(cfg, zero);
  // uniform minimizes the regularizer, so the residual is 0 under any
  // tau and every check halves it
  for (int t = 0; t < 12; ++t) {
    CHECK(trace.records[t].tau ==
          doctest::Approx(1.0 / std::pow(2.0, t)).epsilon(1e-12));
    CHECK(trace.records[t].duality_gap == doctest::Approx(0.0));
  }
}

TEST_CASE("episodic schedule restarts from scratch with halved tau") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.algo = Algo::kRegDomwu;
  cfg.tau_mode = TauMode::kEpisodic;
  cfg.tau0 = 0.5;
  cfg.iters = 400;
  cfg.log_every = 1;
  cfg.episode_scale = 20.0;
  Trace trace = run_episodic(cfg, kuhn);

  // episode lengths grow as tau shrinks
  std::vector<int64_t> boundaries;
  for (size_t k = 1; k < trace.records.size(); ++k) {
    if (trace.records[k].tau != trace.records[k - 1].tau) {
      boundaries.push_back(trace.records[k].iter);
    }
  }
  REQUIRE(boundaries.size() >= 2);
  int64_t len0 = boundaries[0] - 1;
  int64_t len1 = boundaries[1] - boundaries[0];
  CHECK(len0 < len1);

  // the first step of each episode equals a fresh one-step run
  for (size_t k = 1; k < trace.records.size(); ++k) {
    if (trace.records[k].tau == trace.records[k - 1].tau) continue;
    double tau = trace.records[k].tau;
    DomdSolver fresh(kuhn, RegKind::kEntropy, 1.0 / (8.0 * kuhn.dim()), tau,
                     0.0);
    fresh.step();
    double gap = duality_gap(kuhn, fresh.last_iterate(), 0.0);
    CHECK(trace.records[k].duality_gap == doctest::Approx(gap).epsilon(1e-12));
  }
}

TEST_CASE("csv round trip is bit-exact and deterministic") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.algo = Algo::kRegCfr;
  cfg.tau0 = 0.01;
  cfg.gamma = 0.01;
  cfg.iters = 40;
  cfg.log_every = 7;
  cfg.seed = 42;

  Trace trace = run_solve(cfg, kuhn);
  emit_csv(trace, "runner_trace_a.csv");
  std::vector<MetricsRecord> parsed = parse_csv("runner_trace_a.csv");
  REQUIRE(parsed.size() == trace.records.size());
  for (size_t k = 0; k < parsed.size(); ++k) {
    CHECK(parsed[k].iter == trace.records[k].iter);
    CHECK(parsed[k].tau == trace.records[k].tau);
    CHECK(parsed[k].duality_gap == trace.records[k].duality_gap);
    CHECK(parsed[k].saddle_residual == trace.records[k].saddle_residual);
    CHECK(parsed[k].regret_bound == trace.records[k].regret_bound);
    CHECK(parsed[k].dist_ref_l2 == trace.records[k].dist_ref_l2);
    CHECK(parsed[k].dist_ref_bregman == trace.records[k].dist_ref_bregman);
    CHECK(parsed[k].wall_ns == trace.records[k].wall_ns);
  }

  Trace again = run_solve(cfg, kuhn);
  emit_csv(again, "runner_trace_b.csv");
  CHECK(slurp("runner_trace_a.csv") == slurp("runner_trace_b.csv"));
  std::remove("runner_trace_a.csv");
  std::remove("runner_trace_b.csv");

  Trace empty;
  empty.config = cfg;
  emit_csv(empty, "runner_trace_empty.csv");
  CHECK(slurp("runner_trace_empty.csv") ==
        "iter,tau,duality_gap,saddle_residual,regret_bound,dist_ref_l2,"
        "dist_ref_bregman,wall_ns\n");
  CHECK(parse_csv("runner_trace_empty.csv").empty());
  std::remove("runner_trace_empty.csv");
}

TEST_CASE("plot script embeds the csv path") {
  GameSpec kuhn = build_kuhn();
  RunConfig cfg;
  cfg.iters = 2;
  cfg.tau0 = 0.05;
  Trace trace = run_solve(cfg, kuhn);
  emit_plot_script(trace, "some/trace.csv", "runner_plot_test.py");
  std::string script = slurp("runner_plot_test.py");
  CHECK(script.find("some/trace.csv") != std::string::npos);
  CHECK(script.rfind("#!/usr/bin/env python3", 0) == 0);
  CHECK(script.find("loglog") != std::string::npos);
  std::remove("runner_plot_test.py");
}
