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

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqform/runner.h"

namespace {

struct SolveArgs {
  std::string game = "kuhn";
  std::string algo = "reg-domwu";
  double tau = 0.05;
  double gamma = 0.0;
  std::string eta = "auto";
  std::string kappa = "auto";
  std::int64_t iters = 1000;
  std::string tau_mode = "fixed";
  std::int64_t log_every = 1;
  std::uint64_t seed = 0;
  double ref_tol = 0.0;
  std::int64_t check_every = 1;
  double episode_scale = 0.0;
  std::string out;
  std::string plot;
};

double parse_auto(const std::string& text, const char* what) {
  if (text == "auto") return 0.0;
  try {
    size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw seqform::ConfigError(std::string(what) +
                               " must be a number or 'auto': " + text);
  }
}

seqform::RunConfig to_config(const SolveArgs& a) {
  seqform::RunConfig cfg;
  cfg.game = a.game;
  cfg.algo = seqform::algo_from_string(a.algo);
  cfg.tau0 = a.tau;
  cfg.gamma = a.gamma;
  cfg.eta = parse_auto(a.eta, "--eta");
  cfg.kappa = parse_auto(a.kappa, "--kappa");
  cfg.iters = a.iters;
  cfg.tau_mode = seqform::tau_mode_from_string(a.tau_mode);
  cfg.log_every = a.log_every;
  cfg.seed = a.seed;
  cfg.out = a.out;
  cfg.ref_tol = a.ref_tol;
  cfg.check_every = a.check_every;
  cfg.episode_scale = a.episode_scale;
  return cfg;
}

void add_solve_options(CLI::App* cmd, SolveArgs* a) {
  cmd->add_option("--game", a->game, "kuhn | leduc | path to a game file");
  cmd->add_option("--algo", a->algo,
                  "reg-domwu | reg-dogda | reg-cfr | cfr | cfr-plus");
  cmd->add_option("--tau", a->tau, "regularization weight (tau0)");
  cmd->add_option("--gamma", a->gamma, "behavioral probability floor");
  cmd->add_option("--eta", a->eta, "stepsize, or 'auto' for 1/(8P)");
  cmd->add_option("--kappa", a->kappa,
                  "adaptive-scale constant, or 'auto' for sqrt(iters)");
  cmd->add_option("--iters", a->iters, "iteration budget");
  cmd->add_option("--tau-mode", a->tau_mode, "fixed | adaptive | episodic");
  cmd->add_option("--log-every", a->log_every, "record metrics every n steps");
  cmd->add_option("--seed", a->seed, "recorded in the config snapshot");
  cmd->add_option("--ref-tol", a->ref_tol,
                  "when > 0, solve a reference equilibrium at this residual "
                  "and log distances to it");
  cmd->add_option("--check-every", a->check_every,
                  "adaptive mode: residual checks every n steps");
  cmd->add_option("--episode-scale", a->episode_scale,
                  "episodic mode: length constant (default 8/eta)");
  cmd->add_option("--out", a->out, "CSV output path");
  cmd->add_option("--plot", a->plot, "also write a plot script here");
}

int run_one(const seqform::RunConfig& cfg, const std::string& plot_path) {
  seqform::GameSpec game = seqform::make_game(cfg.game);
  auto start = std::chrono::steady_clock::now();
  seqform::Trace trace = seqform::run_solve(cfg, game);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  if (!cfg.out.empty()) {
    seqform::emit_csv(trace, cfg.out);
    if (!plot_path.empty()) {
      seqform::emit_plot_script(trace, cfg.out, plot_path);
    }
  }
  const seqform::MetricsRecord& last = trace.records.back();
  std::fprintf(stderr,
               "%s %s: %lld iters in %lld ms, final tau=%g gap=%.3e "
               "residual=%.3e\n",
               to_string(cfg.algo), cfg.game.c_str(),
               static_cast<long long>(cfg.iters),
               static_cast<long long>(elapsed), last.tau, last.duality_gap,
               last.saddle_residual);
  return 0;
}

seqform::RunConfig config_from_json(const nlohmann::json& j) {
  SolveArgs a;
  a.game = j.value("game", a.game);
  a.algo = j.value("algo", a.algo);
  a.tau = j.value("tau", a.tau);
  a.gamma = j.value("gamma", a.gamma);
  if (j.contains("eta")) {
    a.eta = j["eta"].is_string() ? j["eta"].get<std::string>()
                                 : std::to_string(j["eta"].get<double>());
  }
  if (j.contains("kappa")) {
    a.kappa = j["kappa"].is_string() ? j["kappa"].get<std::string>()
                                     : std::to_string(j["kappa"].get<double>());
  }
  a.iters = j.value("iters", a.iters);
  a.tau_mode = j.value("tau_mode", a.tau_mode);
  a.log_every = j.value("log_every", a.log_every);
  a.seed = j.value("seed", a.seed);
  a.ref_tol = j.value("ref_tol", a.ref_tol);
  a.check_every = j.value("check_every", a.check_every);
  a.episode_scale = j.value("episode_scale", a.episode_scale);
  a.out = j.value("out", a.out);
  return to_config(a);
}

// Independent runs fan out across workers; each writes its own trace.
int run_batch(const std::string& file, int jobs) {
  std::ifstream in(file);
  if (!in) throw seqform::ConfigError("cannot open batch file: " + file);
  nlohmann::json j;
  in >> j;
  std::vector<seqform::RunConfig> configs;
  for (const auto& entry : j) configs.push_back(config_from_json(entry));

  int rc = 0;
  for (size_t base = 0; base < configs.size();
       base += static_cast<size_t>(jobs)) {
    std::vector<std::future<int>> wave;
    for (size_t k = base;
         k < configs.size() && k < base + static_cast<size_t>(jobs); ++k) {
      wave.push_back(std::async(std::launch::async, [&configs, k] {
        return run_one(configs[k], "");
      }));
    }
    for (auto& f : wave) rc = std::max(rc, f.get());
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequence-form game solvers"};
  app.require_subcommand(1);

  SolveArgs args;
  CLI::App* solve = app.add_subcommand("solve", "run one solver");
  add_solve_options(solve, &args);

  std::string batch_file;
  int jobs = 2;
  CLI::App* batch = app.add_subcommand("batch", "run a batch of configs");
  batch->add_option("--file", batch_file, "JSON array of solve configs")
      ->required();
  batch->add_option("--jobs", jobs, "concurrent runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return run_one(to_config(args), args.plot);
    }
    return run_batch(batch_file, jobs);
  } catch (const seqform::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const seqform::ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
