// Copyright 2026 The sctm Authors
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

// sctm: simulate the traffic case studies, calibrate thresholds and estimate
// acceptable-design level sets. Exit codes: 0 ok, 2 bad config or flags,
// 3 numerical failure, 1 anything else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sctm/active_learning.hpp"
#include "sctm/config.hpp"
#include "sctm/errors.hpp"
#include "sctm/evaluation.hpp"
#include "sctm/harness.hpp"
#include "sctm/scenario.hpp"
#include "sctm/simulator.hpp"

namespace fs = std::filesystem;
using namespace sctm;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Common {
  std::string config;
  std::string variant;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out_dir = "out";
};

struct Context {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  fs::path out;
  RunManifest manifest;
};

Context open(const Common& c, const std::string& command) {
  Context ctx;
  ctx.config = load_config(c.config, c.variant);
  ctx.seed = c.seed ? *c.seed : ctx.config.seed;
  ctx.out = c.out_dir;
  fs::create_directories(ctx.out);
  ctx.manifest.command = command;
  ctx.manifest.config_hash = config_hash(ctx.config);
  ctx.manifest.seed = ctx.seed;
  ctx.manifest.variant = ctx.config.variant;
  ctx.manifest.workers = c.workers;
  ctx.manifest.parameters["config"] = c.config;
  return ctx;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_{path}, out_{path} {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row_strings(header);
    rows_ = 0;
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(v), first = false), ...);
    out_ << '\n';
    ++rows_;
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    ++rows_;
  }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::string name() const { return path_.filename().string(); }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I i) { return std::to_string(i); }

  fs::path path_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

std::vector<std::string> design_names(const ScenarioConfig& config, const std::vector<std::size_t>& idx) {
  std::vector<std::string> names;
  for (std::size_t i : idx) names.push_back(config.design[i].name);
  return names;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::vector<std::string> cells_of(const std::vector<double>& k) {
  std::vector<std::string> out;
  for (double x : k) out.push_back(format_double(x));
  return out;
}

struct Summary {
  double mean = 0.0, se = 0.0;
};

Summary summarize(const std::vector<double>& x) {
  RunningStats s;
  for (double v : x) s.add(v);
  return {s.mean(), s.count() > 1 ? std::sqrt(s.variance() / static_cast<double>(s.count())) : 0.0};
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string design;
  std::size_t reps = 1;
  std::string rule;
  bool trajectory = false;
};

void cmd_simulate(const Common& c, const SimulateArgs& a) {
  const auto t0 = Clock::now();
  Context ctx = open(c, "simulate");
  if (!a.rule.empty()) ctx.config.run.rule.kind = a.rule;
  const Scenario scenario(ctx.config);
  const auto k = a.design.empty() ? scenario.default_design() : resolve_design(scenario, parse_vector(a.design));
  if (a.reps == 0) throw ConfigError("--reps must be positive");

  std::vector<double> value(a.reps), drift(a.reps, 0.0);
  parallel_for(0, a.reps, c.workers, [&](std::size_t j) {
    if (scenario.synthetic()) {
      value[j] = scenario.sample(k, ctx.seed, j);
      return;
    }
    MassRecorder mass(scenario.network());
    StepObserver* obs[] = {&mass};
    value[j] = scenario.sample(k, ctx.seed, j, obs);
    drift[j] = mass.max_drift;
  });

  const Utility& u = ctx.config.evaluation.utility;
  Csv reps(ctx.out / "replicates.csv", {"replicate", "value", "utility", "mass_drift"});
  for (std::size_t j = 0; j < a.reps; ++j) reps.row(j, value[j], u(value[j]), drift[j]);
  ctx.manifest.add_file(reps.name(), reps.rows());

  std::vector<double> util(a.reps);
  for (std::size_t j = 0; j < a.reps; ++j) util[j] = u(value[j]);
  const Summary s = summarize(value), su = summarize(util);
  double max_drift = 0.0;
  for (double d : drift) max_drift = std::max(max_drift, d);
  auto header = design_names(ctx.config, all_indices(scenario.design_dim()));
  for (const char* h : {"rule", "measure", "reps", "mean", "se", "utility_mean", "utility_se", "max_mass_drift"})
    header.push_back(h);
  Csv sum(ctx.out / "summary.csv", header);
  auto cells = cells_of(k);
  for (const auto& x : {ctx.config.run.rule.kind, ctx.config.evaluation.measure.kind, std::to_string(a.reps),
                        format_double(s.mean), format_double(s.se), format_double(su.mean), format_double(su.se),
                        format_double(max_drift)})
    cells.push_back(x);
  sum.row_strings(cells);
  ctx.manifest.add_file(sum.name(), 1);

  if (a.trajectory && !scenario.synthetic()) {
    TrajectoryRecorder rec;
    StepObserver* obs[] = {&rec};
    (void)scenario.sample(k, ctx.seed, 0, obs);
    const auto& net = scenario.network();
    Csv tr(ctx.out / "trajectory.csv", {"t", "route", "rho", "q_in", "q_out", "q_net"});
    for (std::size_t s2 = 0; s2 < rec.t.size(); ++s2)
      for (std::size_t r = 0; r < net.route_count(); ++r)
        tr.row(rec.t[s2] + 1, "\"" + net.describe(r) + "\"", rec.rho[s2][r], rec.flows[s2].q_in[r],
               rec.flows[s2].q_out[r], rec.flows[s2].q_net[r]);
    ctx.manifest.add_file(tr.name(), tr.rows());
  }
  ctx.manifest.parameters["design"] = k;
  ctx.manifest.parameters["reps"] = a.reps;
  ctx.manifest.parameters["rule"] = ctx.config.run.rule.kind;
  ctx.manifest.timings["total"] = since(t0);
  ctx.manifest.write(ctx.out);
  std::printf("%s mean %.6g se %.3g over %zu replicates\n", ctx.config.evaluation.measure.kind.c_str(), s.mean, s.se,
              a.reps);
}

// ---- benchmark-compare --------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> designs;
  std::size_t reps = 500;
};

void cmd_benchmark_compare(const Common& c, const CompareArgs& a) {
  const auto t0 = Clock::now();
  Context ctx = open(c, "benchmark-compare");
  if (a.reps == 0) throw ConfigError("--reps must be positive");
  ScenarioConfig dpf_cfg = ctx.config, coop_cfg = ctx.config;
  dpf_cfg.run.rule = RuleConfig{};
  dpf_cfg.run.rule.kind = "dpf";
  coop_cfg.run.rule = RuleConfig{};
  coop_cfg.run.rule.kind = "cooperative";
  const Scenario dpf(dpf_cfg), coop(coop_cfg);

  std::vector<std::vector<double>> ks;
  if (a.designs.empty()) ks.push_back(dpf.default_design());
  for (const auto& d : a.designs) ks.push_back(resolve_design(dpf, parse_vector(d)));

  auto header = design_names(ctx.config, all_indices(dpf.design_dim()));
  for (const char* h : {"reps", "dpf_mean", "dpf_se", "cooperative_mean", "cooperative_se", "diff_mean", "diff_se"})
    header.push_back(h);
  Csv out(ctx.out / "benchmark_compare.csv", header);
  for (const auto& k : ks) {
    // Common random numbers: replicate j uses the same stream under both rules.
    std::vector<double> qd(a.reps), qc(a.reps), diff(a.reps);
    parallel_for(0, 2 * a.reps, c.workers, [&](std::size_t i) {
      const std::size_t j = i / 2;
      (i % 2 == 0 ? qd[j] : qc[j]) = (i % 2 == 0 ? dpf : coop).sample(k, ctx.seed, j);
    });
    for (std::size_t j = 0; j < a.reps; ++j) diff[j] = qc[j] - qd[j];
    const Summary sd = summarize(qd), sc = summarize(qc), sdiff = summarize(diff);
    auto cells = cells_of(k);
    for (double x : {sd.mean, sd.se, sc.mean, sc.se, sdiff.mean, sdiff.se}) cells.push_back(format_double(x));
    cells.insert(cells.begin() + static_cast<long>(k.size()), std::to_string(a.reps));
    out.row_strings(cells);
    std::printf("k = (%s): dpf %.4g +- %.2g, cooperative %.4g +- %.2g\n", [&] {
      std::string s;
      for (std::size_t i = 0; i < k.size(); ++i) s += (i ? ", " : "") + format_double(k[i]);
      return s;
    }().c_str(), sd.mean, sd.se, sc.mean, sc.se);
  }
  ctx.manifest.add_file(out.name(), out.rows());
  ctx.manifest.parameters["reps"] = a.reps;
  ctx.manifest.parameters["designs"] = ks;
  ctx.manifest.timings["total"] = since(t0);
  ctx.manifest.write(ctx.out);
}

// ---- calibrate -------------------------------------------------------------

void cmd_calibrate(const Common& c) {
  const auto t0 = Clock::now();
  Context ctx = open(c, "calibrate");
  const auto& eval = ctx.config.evaluation;
  if (eval.benchmark.empty()) throw ConfigError("calibrate: the evaluation block has no benchmark");
  Csv out(ctx.out / "thresholds.csv", {"level", "e", "sigma", "beta", "utility", "gamma"});
  for (const auto& t : calibrate_benchmark(eval)) {
    out.row(t.level, t.e, t.sigma, t.beta, std::string(to_string(eval.utility.kind)), t.gamma);
    std::printf("%s: e %g sigma %g beta %.10g gamma %.10g\n", t.level.c_str(), t.e, t.sigma, t.beta, t.gamma);
  }
  ctx.manifest.add_file(out.name(), out.rows());
  ctx.manifest.timings["total"] = since(t0);
  ctx.manifest.write(ctx.out);
}

// ---- estimate-levelset ------------------------------------------------------

struct LevelsetArgs {
  std::optional<std::size_t> grid;
  std::optional<std::size_t> iterations;
  bool error_every_iteration = false;
};

// Raster of the first two explored coordinates (one for 1-D boxes); further
// coordinates sit at the box centre.
std::size_t write_raster(const fs::path& path, const LevelSetEstimate& est, const std::vector<std::string>& names,
                         std::size_t grid) {
  const Box& box = est.box;
  const std::size_t dim = box.dim();
  const std::size_t axes = std::min<std::size_t>(dim, 2);
  std::vector<std::string> header(names.begin(), names.begin() + static_cast<long>(axes));
  for (const char* h : {"mean", "sd", "lower", "upper", "inner", "estimate", "outer"}) header.push_back(h);
  Csv out(path, header);
  const std::size_t rows = axes == 2 ? grid * grid : grid;
  std::vector<double> pts(rows * dim);
  for (std::size_t r = 0; r < rows; ++r) {
    double* k = pts.data() + r * dim;
    for (std::size_t d = 0; d < dim; ++d) k[d] = 0.5 * (box.lower[d] + box.upper[d]);
    const std::size_t ij[2] = {r % grid, r / grid};
    for (std::size_t a = 0; a < axes; ++a) {
      const double u = grid > 1 ? static_cast<double>(ij[a]) / static_cast<double>(grid - 1) : 0.5;
      k[a] = box.lower[a] + u * (box.upper[a] - box.lower[a]);
    }
  }
  std::vector<double> mean(rows), sd(rows), lo(rows), hi(rows);
  est.posterior->predict(pts.data(), rows, mean.data(), sd.data());
  est.band()(pts.data(), rows, lo.data(), hi.data());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto m = sandwich(lo[r], mean[r], hi[r], est.gamma);
    if (axes == 2)
      out.row(pts[r * dim], pts[r * dim + 1], mean[r], sd[r], lo[r], hi[r], m.inner, m.estimate, m.outer);
    else
      out.row(pts[r * dim], mean[r], sd[r], lo[r], hi[r], m.inner, m.estimate, m.outer);
  }
  return rows;
}

void cmd_estimate_levelset(const Common& c, const LevelsetArgs& a) {
  const auto t0 = Clock::now();
  Context ctx = open(c, "estimate-levelset");
  if (a.iterations) ctx.config.learning.iterations = *a.iterations;
  const Scenario scenario(ctx.config);
  const double gamma = resolve_gamma(ctx.config.evaluation);
  LoopConfig loop = make_loop_config(ctx.config, c.workers);
  loop.error_every_iteration = a.error_every_iteration;
  const Box box = learning_box(scenario);
  const auto names = design_names(ctx.config, scenario.vary_indices());
  const std::size_t grid = a.grid ? *a.grid : ctx.config.learning.grid;
  if (grid == 0) throw ConfigError("--grid must be positive");

  ctx.manifest.parameters["gamma"] = gamma;
  ctx.manifest.parameters["tau"] = loop.tau;
  ctx.manifest.parameters["c2_0"] = loop.c2_0;
  ctx.manifest.parameters["vary"] = names;
  ctx.manifest.parameters["grid"] = grid;
  ctx.manifest.timings["iterations"] = nlohmann::json::array();

  std::vector<std::string> dh{"iteration", "index"};
  dh.insert(dh.end(), names.begin(), names.end());
  for (const char* h : {"mu_hat", "tau_sq", "n", "discarded"}) dh.push_back(h);
  auto dataset = std::make_unique<Csv>(ctx.out / "dataset.csv", dh);
  auto iters = std::make_unique<Csv>(ctx.out / "iterations.csv",
                                     std::vector<std::string>{"iteration", "dataset_size", "proposed", "skipped",
                                                              "error_bound"});

  auto observer = [&](const IterationReport& r) {
    const auto& est = r.estimate;
    for (const auto& o : r.added) {
      std::vector<std::string> cells{std::to_string(o.iteration), std::to_string(o.index)};
      for (double x : o.k) cells.push_back(format_double(x));
      for (const auto& x : {format_double(o.estimate.mu_hat), format_double(o.estimate.tau_sq),
                            std::to_string(o.estimate.n), std::string(o.estimate.discarded ? "1" : "0")})
        cells.push_back(x);
      dataset->row_strings(cells);
    }
    iters->row(est.iteration, est.dataset_size, r.proposed, r.skipped,
               est.error_bound ? format_double(*est.error_bound) : std::string());
    const std::string raster = "grid_" + std::to_string(est.iteration) + ".csv";
    const std::size_t rows = write_raster(ctx.out / raster, est, names, grid);
    ctx.manifest.add_file(raster, rows, static_cast<long>(est.iteration));
    ctx.manifest.timings["iterations"].push_back(r.seconds);
    std::printf("iteration %zu: %zu points, e_hat %s\n", est.iteration, est.dataset_size,
                est.error_bound ? format_double(*est.error_bound).c_str() : "-");
    std::fflush(stdout);
  };

  auto finish = [&](const char* error) {
    ctx.manifest.add_file(dataset->name(), dataset->rows() - 1);
    ctx.manifest.add_file(iters->name(), iters->rows() - 1);
    dataset.reset();
    iters.reset();
    if (error) ctx.manifest.parameters["error"] = error;
    ctx.manifest.timings["total"] = since(t0);
    ctx.manifest.write(ctx.out);
  };

  ActiveLearningResult result;
  try {
    result = run_active_learning(loop, box, make_evaluator(scenario, derive_seed(ctx.seed, 1)), gamma, ctx.seed,
                                 observer);
  } catch (const std::exception& e) {
    finish(e.what());  // keep what was written so far
    throw;
  }

  const auto& k = result.fit.kernel;
  std::vector<std::string> hh{"kernel", "sigma_c", "length", "log_likelihood", "fallback", "failed_starts"};
  for (const auto& n : names) hh.push_back("input_scale_" + n);
  Csv hyper(ctx.out / "hyperparameters.csv", hh);
  std::vector<std::string> cells{std::string(to_string(k.kind)), format_double(k.sigma_c), format_double(k.length),
                                 format_double(result.fit.log_likelihood), result.fit.fallback ? "1" : "0",
                                 std::to_string(result.fit.failed_starts)};
  for (double s : k.input_scale) cells.push_back(format_double(s));
  hyper.row_strings(cells);
  ctx.manifest.add_file(hyper.name(), 1);
  finish(nullptr);
}

// ---- export-grid -----------------------------------------------------------

struct GridArgs {
  std::size_t grid = 11;
  std::size_t reps = 50;
  std::string lower, upper;
};

void cmd_export_grid(const Common& c, const GridArgs& a) {
  const auto t0 = Clock::now();
  Context ctx = open(c, "export-grid");
  const Scenario scenario(ctx.config);
  Box box = learning_box(scenario);
  if (!a.lower.empty()) box.lower = parse_vector(a.lower);
  if (!a.upper.empty()) box.upper = parse_vector(a.upper);
  if (box.lower.size() != box.dim() || box.upper.size() != box.dim())
    throw ConfigError("--lower/--upper need one entry per explored coordinate");
  if (box.dim() > 2) throw ConfigError("export-grid: at most two explored coordinates");
  if (a.grid < 2 || a.reps == 0) throw ConfigError("--grid must be >= 2 and --reps positive");

  const std::size_t dim = box.dim();
  const std::size_t cells = dim == 2 ? a.grid * a.grid : a.grid;
  std::vector<std::vector<double>> ks(cells);
  for (std::size_t r = 0; r < cells; ++r) {
    const std::size_t ij[2] = {r % a.grid, r / a.grid};
    std::vector<double> sub(dim);
    for (std::size_t d = 0; d < dim; ++d)
      sub[d] = box.lower[d] + static_cast<double>(ij[d]) / static_cast<double>(a.grid - 1) * (box.upper[d] - box.lower[d]);
    ks[r] = resolve_design(scenario, sub);
  }
  std::vector<double> q(cells * a.reps);
  parallel_for(0, q.size(), c.workers,
               [&](std::size_t i) { q[i] = scenario.sample(ks[i / a.reps], ctx.seed, i % a.reps); });

  const Utility& u = ctx.config.evaluation.utility;
  auto header = design_names(ctx.config, scenario.vary_indices());
  for (const char* h : {"reps", "mean", "se", "utility_mean", "utility_se"}) header.push_back(h);
  Csv out(ctx.out / "grid.csv", header);
  const auto vary = scenario.vary_indices();
  for (std::size_t r = 0; r < cells; ++r) {
    std::vector<double> x(q.begin() + static_cast<long>(r * a.reps), q.begin() + static_cast<long>((r + 1) * a.reps));
    std::vector<double> ux(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) ux[j] = u(x[j]);
    const Summary s = summarize(x), su = summarize(ux);
    std::vector<std::string> row;
    for (std::size_t i : vary) row.push_back(format_double(ks[r][i]));
    for (const auto& v : {std::to_string(a.reps), format_double(s.mean), format_double(s.se), format_double(su.mean),
                          format_double(su.se)})
      row.push_back(v);
    out.row_strings(row);
  }
  ctx.manifest.add_file(out.name(), out.rows());
  ctx.manifest.parameters["grid"] = a.grid;
  ctx.manifest.parameters["reps"] = a.reps;
  ctx.manifest.parameters["lower"] = box.lower;
  ctx.manifest.parameters["upper"] = box.upper;
  ctx.manifest.timings["total"] = since(t0);
  ctx.manifest.write(ctx.out);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--variant", c.variant, "Named variant of the scenario");
  sub->add_option("--seed", c.seed, "Master seed (default: the config's)");
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  sub->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic cell transmission model toolkit"};
  app.set_version_flag("--version", std::string(SCTM_VERSION));
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  CompareArgs cmp;
  LevelsetArgs lvl;
  GridArgs grd;

  auto* s = app.add_subcommand("simulate", "Replicates of the performance measure at one design point");
  add_common(s, common);
  s->add_option("--design", sim.design, "Design vector k, comma separated (full or explored coordinates)");
  s->add_option("--reps", sim.reps, "Replicates")->capture_default_str();
  s->add_option("--rule", sim.rule, "Override the interaction rule")
      ->check(CLI::IsMember({"dpf", "cpf", "priority", "cooperative"}));
  s->add_flag("--trajectory", sim.trajectory, "Also write densities and flows of replicate 0");

  auto* b = app.add_subcommand("benchmark-compare", "Mean measure under DPF and the cooperative benchmark");
  add_common(b, common);
  b->add_option("--design", cmp.designs, "Design vector; repeat for several rows")->take_all()->allow_extra_args(false);
  b->add_option("--reps", cmp.reps, "Replicates per rule and design")->capture_default_str();

  auto* cal = app.add_subcommand("calibrate", "Thresholds of the benchmark levels");
  add_common(cal, common);

  auto* e = app.add_subcommand("estimate-levelset", "Active-learning estimate of the acceptable designs");
  add_common(e, common);
  e->add_option("--grid", lvl.grid, "Raster resolution per axis (default: the config's)");
  e->add_option("--iterations", lvl.iterations, "Override the number of loop iterations");
  e->add_flag("--error-every-iteration", lvl.error_every_iteration, "Compute the error bound after every iteration");

  auto* g = app.add_subcommand("export-grid", "Monte Carlo means on a regular grid of the explored coordinates");
  add_common(g, common);
  g->add_option("--grid", grd.grid, "Points per axis")->capture_default_str();
  g->add_option("--reps", grd.reps, "Replicates per grid point")->capture_default_str();
  g->add_option("--lower", grd.lower, "Lower corner, comma separated (default: the design bounds)");
  g->add_option("--upper", grd.upper, "Upper corner, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*s) cmd_simulate(common, sim);
    else if (*b) cmd_benchmark_compare(common, cmp);
    else if (*cal) cmd_calibrate(common);
    else if (*e) cmd_estimate_levelset(common, lvl);
    else if (*g) cmd_export_grid(common, grd);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
