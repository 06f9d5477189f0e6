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

#ifndef SEQFORM_RUNNER_H_
#define SEQFORM_RUNNER_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqform/game.h"
#include "seqform/metrics.h"

namespace seqform {

enum class Algo { kRegDomwu, kRegDogda, kRegCfr, kCfr, kCfrPlus };
enum class TauMode { kFixed, kAdaptive, kEpisodic };

const char* to_string(Algo algo);
const char* to_string(TauMode mode);
Algo algo_from_string(const std::string& name);
TauMode tau_mode_from_string(const std::string& name);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string game = "kuhn";  // kuhn | leduc | path to a game/matrix file
  Algo algo = Algo::kRegDomwu;
  double tau0 = 0.05;
  double gamma = 0.0;
  double eta = 0.0;    // <= 0: auto, 1/(8P)
  double kappa = 0.0;  // <= 0: auto, sqrt(iters)
  int64_t iters = 1000;
  TauMode tau_mode = TauMode::kFixed;
  int64_t log_every = 1;
  uint64_t seed = 0;  // recorded for provenance; the solvers are deterministic
  std::string out;
  double ref_tol = 0.0;  // > 0 turns on distance-to-reference columns
  // Adaptive mode evaluates its residual trigger every iteration by
  // default; raising this thins the checks (shrinks may then fire late).
  int64_t check_every = 1;
  double episode_scale = 0.0;  // <= 0: auto, 8/eta
};

struct Trace {
  RunConfig config;
  std::vector<MetricsRecord> records;
};

// kuhn | leduc | path. A JSON file with a top-level "matrix" array builds
// a normal-form game; otherwise the sequence-form game format is assumed.
GameSpec make_game(const std::string& name_or_path);

Trace run_fixed_tau(const RunConfig& cfg, const GameSpec& game);
Trace run_adaptive_shrink(const RunConfig& cfg, const GameSpec& game);
Trace run_episodic(const RunConfig& cfg, const GameSpec& game);
Trace run_solve(const RunConfig& cfg, const GameSpec& game);

// CSV columns, in order:
// iter,tau,duality_gap,saddle_residual,regret_bound,dist_ref_l2,
// dist_ref_bregman,wall_ns. 17 significant digits, \n line endings.
void emit_csv(const Trace& trace, const std::string& path);
std::vector<MetricsRecord> parse_csv(const std::string& path);

// Self-contained matplotlib script plotting the trace curves from the
// CSV on log-log axes.
void emit_plot_script(const Trace& trace, const std::string& csv_path,
                      const std::string& script_path);

}  // namespace seqform

#endif  // SEQFORM_RUNNER_H_
