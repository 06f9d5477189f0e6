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

#include "seqform/runner.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "seqform/cfr.h"
#include "seqform/domd.h"

namespace seqform {

const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::kRegDomwu: return "reg-domwu";
    case Algo::kRegDogda: return "reg-dogda";
    case Algo::kRegCfr: return "reg-cfr";
    case Algo::kCfr: return "cfr";
    case Algo::kCfrPlus: return "cfr-plus";
  }
  return "?";
}

const char* to_string(TauMode mode) {
  switch (mode) {
    case TauMode::kFixed: return "fixed";
    case TauMode::kAdaptive: return "adaptive";
    case TauMode::kEpisodic: return "episodic";
  }
  return "?";
}

Algo algo_from_string(const std::string& name) {
  for (Algo a : {Algo::kRegDomwu, Algo::kRegDogda, Algo::kRegCfr, Algo::kCfr,
                 Algo::kCfrPlus}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown algorithm: " + name);
}

TauMode tau_mode_from_string(const std::string& name) {
  for (TauMode m : {TauMode::kFixed, TauMode::kAdaptive, TauMode::kEpisodic}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown tau mode: " + name);
}

GameSpec make_game(const std::string& name_or_path) {
  if (name_or_path == "kuhn") return build_kuhn();
  if (name_or_path == "leduc") return build_leduc();
  std::ifstream probe(name_or_path);
  if (!probe) throw ConfigError("no such game or file: " + name_or_path);
  nlohmann::json j;
  try {
    probe >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + name_or_path + ": " + e.what());
  }
  if (j.contains("matrix")) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : j.at("matrix")) {
      rows.push_back(row.get<std::vector<double>>());
    }
    return build_matrix_game(rows);
  }
  return load_game(name_or_path);
}

namespace {

RegKind kind_for(Algo algo) {
  switch (algo) {
    case Algo::kRegDomwu: return RegKind::kEntropy;
    default: return RegKind::kEuclidean;
  }
}

// Uniform view over the solver families so the tau schedules can drive
// any of them.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual void step() = 0;
  virtual const JointStrategy& report() const = 0;
  virtual JointStrategy average() const = 0;
  virtual double regret_bound() const = 0;
  virtual std::array<double, 2> global_regret() const = 0;
  virtual void set_tau(double tau) = 0;
  virtual void warm_restart() = 0;
};

class DomdDriver : public Driver {
 public:
  DomdDriver(const GameSpec& game, RegKind kind, double eta, double tau,
             double gamma)
      : solver_(game, kind, eta, tau, gamma) {}
  void step() override { solver_.step(); }
  const JointStrategy& report() const override {
    return solver_.last_iterate();
  }
  JointStrategy average() const override { return solver_.average_strategy(); }
  double regret_bound() const override {
    auto r = solver_.global_regret();
    return r[0] + r[1];
  }
  std::array<double, 2> global_regret() const override {
    return solver_.global_regret();
  }
  void set_tau(double tau) override { solver_.set_tau(tau); }
  void warm_restart() override { solver_.restart_from_center(); }
  DomdSolver& solver() { return solver_; }

 private:
  DomdSolver solver_;
};

class CfrDriver : public Driver {
 public:
  CfrDriver(const GameSpec& game, double tau, double gamma, double kappa)
      : solver_(game, RegKind::kEuclidean, tau, gamma, kappa) {}
  void step() override { solver_.step(); }
  const JointStrategy& report() const override {
    return solver_.half_iterate();
  }
  JointStrategy average() const override { return solver_.average_strategy(); }
  double regret_bound() const override { return solver_.regret_upper_bound(); }
  std::array<double, 2> global_regret() const override {
    return solver_.global_regret();
  }
  void set_tau(double tau) override { solver_.set_tau(tau); }
  void warm_restart() override { solver_.warm_restart(); }

 private:
  RegCfrSolver solver_;
};

class RmDriver : public Driver {
 public:
  RmDriver(const GameSpec& game, double tau, bool plus)
      : solver_(game, RegKind::kEuclidean, tau, plus) {}
  void step() override { solver_.step(); }
  const JointStrategy& report() const override {
    return solver_.current_iterate();
  }
  JointStrategy average() const override { return solver_.average_strategy(); }
  double regret_bound() const override { return solver_.regret_upper_bound(); }
  std::array<double, 2> global_regret() const override {
    return solver_.global_regret();
  }
  void set_tau(double tau) override { solver_.set_tau(tau); }
  void warm_restart() override {}

 private:
  RegretMatchingSolver solver_;
};

struct Effective {
  double eta;
  double kappa;
  RegKind kind;
};

Effective validate_config(const RunConfig& cfg, const GameSpec& game) {
  if (cfg.iters < 1) throw ConfigError("iters must be at least 1");
  if (cfg.log_every < 1) throw ConfigError("log-every must be at least 1");
  if (cfg.check_every < 1) throw ConfigError("check-every must be at least 1");
  if (cfg.tau0 < 0.0) throw ConfigError("tau must be nonnegative");
  if (cfg.gamma < 0.0) throw ConfigError("gamma must be nonnegative");
  int c_omega = std::max(game.x().max_actions(), game.y().max_actions());
  if (cfg.gamma > 0.0 && cfg.gamma * c_omega >= 1.0) {
    throw ConfigError("gamma too large for this game's action counts");
  }

  Effective eff;
  eff.kind = kind_for(cfg.algo);
  eff.eta = cfg.eta > 0.0 ? cfg.eta : 1.0 / (8.0 * game.dim());
  eff.kappa = cfg.kappa > 0.0 ? cfg.kappa
                              : std::sqrt(static_cast<double>(cfg.iters));
  if (eff.kappa < 1.0) eff.kappa = 1.0;

  if (cfg.algo == Algo::kRegDomwu && cfg.gamma > 0.0) {
    throw ConfigError("reg-domwu runs on the unperturbed game only");
  }
  if ((cfg.algo == Algo::kCfr || cfg.algo == Algo::kCfrPlus) &&
      cfg.gamma > 0.0) {
    throw ConfigError("the regret-matching baselines run with gamma = 0");
  }
  if (cfg.tau_mode == TauMode::kAdaptive) {
    if (cfg.tau0 <= 0.0) {
      throw ConfigError("adaptive shrinking needs tau > 0");
    }
    if (cfg.algo == Algo::kCfr || cfg.algo == Algo::kCfrPlus) {
      throw ConfigError(
          "adaptive shrinking applies to reg-domwu, reg-dogda and reg-cfr");
    }
  }
  if (cfg.tau_mode == TauMode::kEpisodic && cfg.tau0 <= 0.0) {
    throw ConfigError("the episodic schedule needs tau > 0");
  }
  if (cfg.ref_tol > 0.0 && cfg.tau_mode == TauMode::kFixed && cfg.tau0 <= 0.0) {
    throw ConfigError("distance-to-reference needs tau > 0");
  }
  return eff;
}

std::unique_ptr<Driver> make_driver(const RunConfig& cfg, const GameSpec& game,
                                    const Effective& eff, double tau) {
  switch (cfg.algo) {
    case Algo::kRegDomwu:
    case Algo::kRegDogda:
      return std::make_unique<DomdDriver>(game, eff.kind, eff.eta, tau,
                                          cfg.gamma);
    case Algo::kRegCfr:
      return std::make_unique<CfrDriver>(game, tau, cfg.gamma, eff.kappa);
    case Algo::kCfr:
      return std::make_unique<RmDriver>(game, tau, false);
    case Algo::kCfrPlus:
      return std::make_unique<RmDriver>(game, tau, true);
  }
  throw ConfigError("unhandled algorithm");
}

constexpr double kNoReference = -1.0;

class RunContext {
 public:
  RunContext(const RunConfig& cfg, const GameSpec& game, const Effective& eff)
      : cfg_(cfg),
        game_(game),
        reg_x_(game.x(), eff.kind),
        reg_y_(game.y(), eff.kind) {}

  void set_reference(JointStrategy ref) { reference_ = std::move(ref); }
  bool has_reference() const { return reference_.has_value(); }
  const DilatedRegularizer& reg_x() const { return reg_x_; }
  const DilatedRegularizer& reg_y() const { return reg_y_; }

  // Tracks the best-iterate Bregman distance for reg-cfr so the logged
  // column reports min so far, which is what the guarantee is about.
  void observe_iterate(const JointStrategy& z) {
    if (!reference_ || cfg_.algo != Algo::kRegCfr) return;
    double d = distance_metrics(reg_x_, reg_y_, z, *reference_).bregman;
    min_bregman_ = std::min(min_bregman_, d);
  }

  MetricsRecord make_record(int64_t iter, double tau, const Driver& driver,
                            double residual) {
    const JointStrategy& z = driver.report();
    MetricsRecord rec;
    rec.iter = iter;
    rec.tau = tau;
    rec.duality_gap = duality_gap(game_, z, cfg_.gamma);
    rec.saddle_residual = residual;
    rec.regret_bound = driver.regret_bound();
    if (reference_) {
      DistancePair d = distance_metrics(reg_x_, reg_y_, z, *reference_);
      rec.dist_ref_l2 = d.l2;
      rec.dist_ref_bregman = cfg_.algo == Algo::kRegCfr
                                 ? std::min(min_bregman_, d.bregman)
                                 : d.bregman;
    } else {
      rec.dist_ref_l2 = kNoReference;
      rec.dist_ref_bregman = kNoReference;
    }
    rec.wall_ns = 0;  // kept deterministic; timing goes to stderr
    if (rec.duality_gap < -1e-9 || rec.saddle_residual < -1e-9) {
      throw std::logic_error("negative gap or residual: solver bug");
    }
    return rec;
  }

  // The folk-theorem inequality is an algebraic guarantee for constant
  // tau; a violation beyond rounding means broken bookkeeping.
  void check_folk(int64_t iter, double tau, const Driver& driver) {
    JointStrategy avg = driver.average();
    std::array<double, 2> r = driver.global_regret();
    double bound = (r[0] + r[1]) / static_cast<double>(iter);
    double lhs = tau > 0.0
                     ? saddle_residual(game_, reg_x_, reg_y_, tau, avg,
                                       cfg_.gamma)
                     : duality_gap(game_, avg, cfg_.gamma);
    if (lhs > bound + 1e-9) {
      std::ostringstream os;
      os << "folk-theorem violation at iter " << iter << ": " << lhs << " > "
         << bound;
      throw std::logic_error(os.str());
    }
  }

  double residual(double tau, const JointStrategy& z) const {
    return saddle_residual(game_, reg_x_, reg_y_, tau, z, cfg_.gamma);
  }

 private:
  const RunConfig& cfg_;
  const GameSpec& game_;
  DilatedRegularizer reg_x_, reg_y_;
  std::optional<JointStrategy> reference_;
  double min_bregman_ = std::numeric_limits<double>::infinity();
};

// Fills the distance columns of already-collected records from iterates
// stored at the log points (used when the reference is only known after
// the run, at the final tau).
void backfill_distances(const RunConfig& cfg, const RunContext& ctx,
                        const std::vector<JointStrategy>& iterates,
                        const JointStrategy& ref,
                        std::vector<MetricsRecord>* records) {
  double min_bregman = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < records->size(); ++k) {
    DistancePair d = distance_metrics(ctx.reg_x(), ctx.reg_y(), iterates[k],
                                      ref);
    (*records)[k].dist_ref_l2 = d.l2;
    min_bregman = std::min(min_bregman, d.bregman);
    (*records)[k].dist_ref_bregman =
        cfg.algo == Algo::kRegCfr ? min_bregman : d.bregman;
  }
}

}  // namespace

Trace run_fixed_tau(const RunConfig& cfg, const GameSpec& game) {
  Effective eff = validate_config(cfg, game);
  RunContext ctx(cfg, game, eff);
  if (cfg.ref_tol > 0.0) {
    ctx.set_reference(reference_solution(game, eff.kind, cfg.tau0, cfg.gamma,
                                         cfg.ref_tol));
  }
  std::unique_ptr<Driver> driver = make_driver(cfg, game, eff, cfg.tau0);

  Trace trace;
  trace.config = cfg;
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    driver->step();
    ctx.observe_iterate(driver->report());
    if (t % cfg.log_every == 0 || t == cfg.iters) {
      double res = ctx.residual(cfg.tau0, driver->report());
      trace.records.push_back(ctx.make_record(t, cfg.tau0, *driver, res));
      ctx.check_folk(t, cfg.tau0, *driver);
    }
  }
  return trace;
}

Trace run_adaptive_shrink(const RunConfig& cfg, const GameSpec& game) {
  Effective eff = validate_config(cfg, game);
  RunContext ctx(cfg, game, eff);
  std::unique_ptr<Driver> driver = make_driver(cfg, game, eff, cfg.tau0);

  double tau = cfg.tau0;
  double shrink_bar = ctx.residual(tau, driver->report());

  Trace trace;
  trace.config = cfg;
  std::vector<JointStrategy> logged_iterates;
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    driver->step();
    bool boundary = t % cfg.check_every == 0;
    bool log_point = t % cfg.log_every == 0 || t == cfg.iters;
    if (!boundary && !log_point) continue;
    double res = ctx.residual(tau, driver->report());
    if (log_point) {
      trace.records.push_back(ctx.make_record(t, tau, *driver, res));
      if (cfg.ref_tol > 0.0) logged_iterates.push_back(driver->report());
    }
    if (boundary && res <= shrink_bar / 4.0) {
      tau /= 2.0;
      driver->set_tau(tau);
      shrink_bar = ctx.residual(tau, driver->report());
      driver->warm_restart();
    }
  }

  if (cfg.ref_tol > 0.0) {
    JointStrategy ref =
        reference_solution(game, eff.kind, tau, cfg.gamma, cfg.ref_tol);
    backfill_distances(cfg, ctx, logged_iterates, ref, &trace.records);
  }
  return trace;
}

Trace run_episodic(const RunConfig& cfg, const GameSpec& game) {
  Effective eff = validate_config(cfg, game);
  RunContext ctx(cfg, game, eff);
  double scale = cfg.episode_scale > 0.0 ? cfg.episode_scale : 8.0 / eff.eta;

  Trace trace;
  trace.config = cfg;
  std::vector<JointStrategy> logged_iterates;
  double tau = cfg.tau0;
  int64_t done = 0;
  while (done < cfg.iters) {
    double raw_len = scale / tau * std::log(1.0 / tau);
    int64_t len = raw_len > 1.0 ? static_cast<int64_t>(std::ceil(raw_len)) : 1;
    // Each episode starts from scratch.
    std::unique_ptr<Driver> driver = make_driver(cfg, game, eff, tau);
    for (int64_t k = 0; k < len && done < cfg.iters; ++k) {
      driver->step();
      ++done;
      ctx.observe_iterate(driver->report());
      if (done % cfg.log_every == 0 || done == cfg.iters) {
        double res = ctx.residual(tau, driver->report());
        trace.records.push_back(ctx.make_record(done, tau, *driver, res));
        if (cfg.ref_tol > 0.0) logged_iterates.push_back(driver->report());
      }
    }
    tau /= 2.0;
  }

  if (cfg.ref_tol > 0.0) {
    JointStrategy ref =
        reference_solution(game, eff.kind, tau, cfg.gamma, cfg.ref_tol);
    backfill_distances(cfg, ctx, logged_iterates, ref, &trace.records);
  }
  return trace;
}

Trace run_solve(const RunConfig& cfg, const GameSpec& game) {
  switch (cfg.tau_mode) {
    case TauMode::kFixed: return run_fixed_tau(cfg, game);
    case TauMode::kAdaptive: return run_adaptive_shrink(cfg, game);
    case TauMode::kEpisodic: return run_episodic(cfg, game);
  }
  throw ConfigError("unhandled tau mode");
}

void emit_csv(const Trace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write CSV: " + path);
  std::fputs(
      "iter,tau,duality_gap,saddle_residual,regret_bound,dist_ref_l2,"
      "dist_ref_bregman,wall_ns\n",
      f);
  for (const MetricsRecord& r : trace.records) {
    std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld\n",
                 static_cast<long long>(r.iter), r.tau, r.duality_gap,
                 r.saddle_residual, r.regret_bound, r.dist_ref_l2,
                 r.dist_ref_bregman, static_cast<long long>(r.wall_ns));
  }
  if (std::fclose(f) != 0) {
    throw std::runtime_error("error closing CSV: " + path);
  }
}

std::vector<MetricsRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty CSV: " + path);
  }
  if (line !=
      "iter,tau,duality_gap,saddle_residual,regret_bound,dist_ref_l2,"
      "dist_ref_bregman,wall_ns") {
    throw std::runtime_error("unexpected CSV header in " + path);
  }
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    long long iter = 0, wall = 0;
    if (std::sscanf(line.c_str(), "%lld,%lg,%lg,%lg,%lg,%lg,%lg,%lld", &iter,
                    &r.tau, &r.duality_gap, &r.saddle_residual,
                    &r.regret_bound, &r.dist_ref_l2, &r.dist_ref_bregman,
                    &wall) != 8) {
      throw std::runtime_error("malformed CSV row in " + path + ": " + line);
    }
    r.iter = iter;
    r.wall_ns = wall;
    records.push_back(r);
  }
  return records;
}

void emit_plot_script(const Trace& trace, const std::string& csv_path,
                      const std::string& script_path) {
  std::ofstream out(script_path);
  if (!out) throw std::runtime_error("cannot write script: " + script_path);
  out << "#!/usr/bin/env python3\n"
      << "# Plots the convergence curves recorded by a `seqform solve` run.\n"
      << "import csv\n\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "CSV = \"" << csv_path << "\"\n"
      << "TITLE = \"" << to_string(trace.config.algo) << " on "
      << trace.config.game << " (" << to_string(trace.config.tau_mode)
      << " tau)\"\n\n"
      << "rows = list(csv.DictReader(open(CSV)))\n"
      << "it = [int(r[\"iter\"]) for r in rows]\n"
      << "fig, ax = plt.subplots(figsize=(7, 5))\n"
      << "for col in (\"duality_gap\", \"saddle_residual\", "
         "\"regret_bound\"):\n"
      << "    ys = [float(r[col]) for r in rows]\n"
      << "    pts = [(t, y) for t, y in zip(it, ys) if y > 0]\n"
      << "    if pts:\n"
      << "        ax.loglog(*zip(*pts), label=col.replace(\"_\", \" \"))\n"
      << "ax.set_xlabel(\"iteration\")\n"
      << "ax.set_title(TITLE)\n"
      << "ax.grid(True, which=\"both\", alpha=0.3)\n"
      << "ax.legend()\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(CSV + \".png\", dpi=150)\n"
      << "print(\"wrote\", CSV + \".png\")\n";
}

}  // namespace seqform
