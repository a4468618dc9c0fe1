// Command-line front end: simulate, solve-invariant, estimate-density,
// estimate, mc-study, report.

#include "mvsde/error.hpp"
#include "mvsde/harness.hpp"
#include "mvsde/invariant.hpp"
#include "mvsde/io.hpp"
#include "mvsde/kde.hpp"
#include "mvsde/pipeline.hpp"
#include "mvsde/simulator.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace mvsde;

namespace {

struct Globals
{
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir = ".";
};

Config
load(const Globals& g)
{
  Config cfg = g.config.empty() ? Config{} : load_config(g.config);
  if (g.seed) {
    cfg.sim.seed = *g.seed;
    cfg.experiment.base_seed = *g.seed;
  }
  return cfg;
}

const DriftSpec&
require_spec(const Config& cfg)
{
  if (!cfg.spec)
    throw std::invalid_argument("this command needs a config with a 'spec' section (--config)");
  return *cfg.spec;
}

fs::path
out_path(const Globals& g, const std::string& name)
{
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::ofstream
open_out(const fs::path& p)
{
  std::ofstream f(p);
  if (!f)
    throw std::runtime_error("cannot write " + p.string());
  return f;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "McKean-Vlasov particle simulation and semiparametric drift estimation" };
  app.require_subcommand(1);
  // Lets global options follow the subcommand name.
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the particle system and write the final positions");
  std::optional<std::size_t> sim_n;
  std::optional<double> sim_t, sim_dt;
  std::optional<std::uint64_t> sim_stream;
  std::string sim_out = "positions.txt";
  bool sim_project = false;
  sim->add_option("--n", sim_n, "Number of particles");
  sim->add_option("--T", sim_t, "Time horizon");
  sim->add_option("--dt", sim_dt, "Euler step");
  sim->add_option("--stream", sim_stream, "Replication stream id");
  sim->add_option("--out", sim_out, "Output file (relative to --out-dir)");
  sim->add_flag("--project", sim_project, "Write mean-centered positions");

  // solve-invariant
  auto* inv = app.add_subcommand("solve-invariant", "Solve for the invariant density on a grid");
  std::optional<double> inv_l, inv_tol, inv_damping;
  std::optional<std::size_t> inv_n;
  std::optional<int> inv_iter;
  std::string inv_out = "pi.txt";
  inv->add_option("--half-width", inv_l, "Grid half-width L");
  inv->add_option("--n-points", inv_n, "Grid size (odd)");
  inv->add_option("--tol", inv_tol, "Sup-norm residual tolerance");
  inv->add_option("--max-iter", inv_iter, "Iteration cap");
  inv->add_option("--damping", inv_damping, "Damping in (0, 1]");
  inv->add_option("--out", inv_out, "Density file; .csv selects the two-column layout");

  // estimate-density
  auto* ed = app.add_subcommand("estimate-density", "Kernel estimates of pi, pi' and l");
  std::string ed_samples;
  std::optional<int> ed_m;
  std::optional<double> ed_h0, ed_h1, ed_delta;
  std::optional<std::string> ed_mode;
  ed->add_option("--samples", ed_samples, "Samples file")->required()->check(CLI::ExistingFile);
  ed->add_option("--m", ed_m, "Kernel order");
  ed->add_option("--h0", ed_h0, "Bandwidth for pi");
  ed->add_option("--h1", ed_h1, "Bandwidth for pi'");
  ed->add_option("--delta-mode", ed_mode, "oracle, plugin or fixed")
    ->check(CLI::IsMember({ "oracle", "plugin", "fixed" }));
  ed->add_option("--delta", ed_delta, "Threshold for fixed mode");

  // estimate
  auto* est = app.add_subcommand("estimate", "Run steps (i)-(iv) on a sample");
  std::string est_samples;
  est->add_option("--samples", est_samples, "Samples file")->required()->check(CLI::ExistingFile);

  // mc-study
  auto* mc = app.add_subcommand("mc-study", "Monte Carlo study over the experiment grid");

  // report
  auto* rep = app.add_subcommand("report", "Summarize a metrics CSV");
  std::string rep_metrics;
  rep->add_option("--metrics", rep_metrics, "metrics.csv from mc-study")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (g.threads > 0)
    omp_set_num_threads(g.threads);

  try {
    Config cfg = load(g);

    if (*sim) {
      const auto& spec = require_spec(cfg);
      auto sc = cfg.sim;
      if (sim_n)
        sc.n_particles = *sim_n;
      if (sim_t)
        sc.horizon = *sim_t;
      if (sim_dt)
        sc.dt = *sim_dt;
      if (sim_stream)
        sc.stream = *sim_stream;
      const auto ens = simulate(sc, spec);
      const auto values = sim_project ? project(ens.positions) : ens.positions;
      auto out = open_out(out_path(g, sim_out));
      write_samples(out,
                    values,
                    { { "N", std::to_string(sc.n_particles) },
                      { "T", format_number(ens.time) },
                      { "dt", format_number(sc.dt) },
                      { "n_steps", std::to_string(ens.n_steps) },
                      { "seed", std::to_string(ens.seed) },
                      { "stream", std::to_string(ens.stream) },
                      { "projected", sim_project ? "1" : "0" } });
      return 0;
    }

    if (*inv) {
      const auto& spec = require_spec(cfg);
      auto o = cfg.invariant;
      if (inv_l)
        o.half_width = *inv_l;
      if (inv_n)
        o.n_points = *inv_n;
      if (inv_tol)
        o.tol = *inv_tol;
      if (inv_iter)
        o.max_iter = *inv_iter;
      if (inv_damping)
        o.damping = *inv_damping;
      const auto sol = solve_invariant(spec, o);
      save_grid(out_path(g, inv_out), sol.density);
      const auto m = moments(sol.density, 8);
      std::cout << "iterations " << sol.iterations << "\nresidual " << format_number(sol.residual) << "\nlog_Z "
                << format_number(sol.log_normalizer) << '\n';
      for (int k = 2; k <= 8; k += 2)
        std::cout << "m" << k << ' ' << format_number(m[static_cast<std::size_t>(k)]) << '\n';
      return 0;
    }

    if (*ed) {
      auto e = cfg.estimator;
      if (ed_m)
        e.m = *ed_m;
      if (ed_h0)
        e.h0 = *ed_h0;
      if (ed_h1)
        e.h1 = *ed_h1;
      if (ed_mode)
        e.delta_mode = delta_mode_from_string(*ed_mode);
      if (ed_delta)
        e.delta = *ed_delta;
      validate(e);
      const auto samples = load_samples(ed_samples);
      const double n_eff = e.n_eff.value_or(static_cast<double>(samples.size()));
      const auto bw = default_bandwidths(n_eff, e.m);
      const double h0 = e.h0.value_or(bw.h0);
      const double h1 = e.h1.value_or(bw.h1);
      const auto kernel = make_kernel(e.m);
      const auto pi_hat = density_estimate(samples, kernel, h0, e.grid);
      const auto d_hat = density_derivative_estimate(samples, kernel, h1, e.grid);

      double delta = 0.0;
      if (e.delta_mode == DeltaMode::fixed) {
        delta = *e.delta;
      } else {
        const AlphaCoefficients* alpha = nullptr;
        double Z = 1.0, beta_sup = 0.0;
        std::optional<OracleContext> oracle;
        if (e.delta_mode == DeltaMode::oracle) {
          const auto& spec = require_spec(cfg);
          oracle = make_oracle(spec, solve_invariant(spec, cfg.invariant));
          alpha = &oracle->alpha;
          Z = oracle->normalizer;
          beta_sup = oracle->beta_sup;
        } else {
          alpha = &e.plugin->alpha;
          Z = e.plugin->normalizer;
          beta_sup = e.plugin->beta_sup;
        }
        const double U = e.U.value_or(default_contrast_range(*alpha, e.m, n_eff));
        delta = default_delta(*alpha, Z, beta_sup, U);
      }
      const auto l_hat = log_derivative_estimate(pi_hat, d_hat, delta);
      save_grid(out_path(g, "pi_hat.csv"), pi_hat);
      save_grid(out_path(g, "pi_prime_hat.csv"), d_hat);
      save_grid(out_path(g, "l_hat.csv"), l_hat);
      std::cout << "h0 " << format_number(h0) << "\nh1 " << format_number(h1) << "\ndelta " << format_number(delta)
                << '\n';
      return 0;
    }

    if (*est) {
      const auto& spec = require_spec(cfg);
      const auto samples = load_samples(est_samples);
      std::optional<OracleContext> oracle;
      if (cfg.estimator.delta_mode == DeltaMode::oracle) {
        auto o = cfg.invariant;
        o.half_width = cfg.estimator.grid.half_width;
        o.n_points = cfg.estimator.grid.n_points;
        oracle = make_oracle(spec, solve_invariant(spec, o));
      }
      const auto res = run_pipeline(samples, cfg.estimator, spec.shape(), oracle ? &*oracle : nullptr);
      write_estimation_result(g.out_dir, res);
      return 0;
    }

    if (*mc) {
      require_spec(cfg);
      const auto rows = run_experiment(cfg.experiment);
      {
        auto out = open_out(out_path(g, "metrics.csv"));
        write_metrics_csv(out, rows);
      }
      {
        auto out = open_out(out_path(g, "timings.csv"));
        write_timings_csv(out, rows);
      }
      std::size_t failed = 0;
      for (const auto& r : rows)
        failed += r.status != "ok";
      std::cout << rows.size() << " rows, " << failed << " failed\n";
      return 0;
    }

    if (*rep) {
      std::ifstream in(rep_metrics);
      const auto rows = read_metrics_csv(in);
      const auto report = rate_report(rows);
      auto out = open_out(out_path(g, "report.txt"));
      write_report(out, report);
      write_report(std::cout, report);
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
