#include "kal/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "kal/config.hpp"
#include "kal/decomposition.hpp"
#include "kal/errors.hpp"
#include "kal/experiments.hpp"
#include "kal/report_io.hpp"

namespace kal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + cell + "' in " + what);
    }
  }
  if (v.empty()) throw ConfigError(what + " is empty");
  return v;
}

struct Loaded {
  json raw;
  ProblemSpec spec;
  std::string digest;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.raw = read_json_file(path);
  l.spec = load_problem(l.raw);
  l.digest = config_digest(l.raw);
  return l;
}

void warn_violations(const ProblemSpec& spec, std::ostream& err) {
  for (const auto& v : validate_hypotheses(spec)) err << "warning: " << v.message << '\n';
}

// Owns the run directory and the manifest written at the end.
class Run {
 public:
  Run(const std::string& dir, const Loaded& cfg, std::string command)
      : dir_(dir) {
    fs::create_directories(dir_);
    m_.config_digest = cfg.digest;
    m_.started_at = utc_timestamp();
    m_.command = std::move(command);
    write_json(path("config.json"), cfg.raw);
    m_.outputs.push_back("config.json");
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string add(const std::string& name) {
    m_.outputs.push_back(name);
    return path(name);
  }
  void seed(std::uint64_t s) { m_.seed = s; }
  void finish() {
    m_.finished_at = utc_timestamp();
    m_.outputs.push_back("manifest.json");
    write_json(path("manifest.json"), m_.to_json());
  }

 private:
  fs::path dir_;
  RunManifest m_;
};

StepperConfig stepper(double dt, int max_iter) {
  StepperConfig c;
  c.dt = dt;
  c.newton_max_iter = max_iter;
  return c;
}

int cmd_check(const std::string& config, std::ostream& out) {
  const Loaded cfg = load(config);
  const auto violations = validate_hypotheses(cfg.spec);
  for (const auto& v : violations) out << "violation " << v.message << '\n';
  for (const auto& c : validate_lyapunov_params(cfg.spec).checks)
    if (!c.satisfied)
      out << "warning: " << c.equation << " " << c.description << " not met (value "
          << format_double(c.value) << ")\n";
  if (!violations.empty()) return 3;
  out << "ok: " << config << " satisfies all hypotheses\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"kal: Kirchhoff wave equation with memory solver"};
  app.require_subcommand(1);

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  std::string config, outdir;
  double T = 0, dt = 1e-3;
  int max_iter = 50;
  std::size_t stride = 1;

  auto* check = app.add_subcommand("check", "validate the structural hypotheses");
  check->add_option("config", config, "JSON config")->required();

  // CLI11 writes a default into its variable when the option is declared, so
  // the run subcommands keep separate storage and copy it out after parsing
  struct RunOpts {
    double T = 0, dt = 1e-3;
    int max_iter = 50;
    std::size_t stride = 1;
  };
  std::map<const CLI::App*, RunOpts> run_opts;
  auto common = [&](CLI::App* sub, double T_default, std::size_t stride_default) {
    RunOpts& o = run_opts[sub];
    o.T = T_default;
    o.stride = stride_default;
    sub->add_option("config", config, "JSON config")->required();
    sub->add_option("--T", o.T, "final time")->capture_default_str();
    sub->add_option("--dt", o.dt, "time step")->capture_default_str();
    sub->add_option("--out", outdir, "output directory")->required();
    sub->add_option("--newton-max-iter", o.max_iter, "Kirchhoff fixed-point sweeps, 0 = frozen")
        ->capture_default_str();
    sub->add_option("--stride", o.stride, "write every n-th step")->capture_default_str();
  };

  auto* sim = app.add_subcommand("simulate", "single trajectory with energy diagnostics");
  common(sim, 20.0, 1);

  auto* decompose = app.add_subcommand("decompose", "w = w1 + w2 splitting diagnostics");
  common(decompose, 20.0, 10);

  std::size_t ensemble = 10;
  std::string radii = "1,10";
  std::uint64_t seed = 1;
  double threshold = 0;
  auto* absorb = app.add_subcommand("absorb", "absorbing-ball probe over a random ensemble");
  common(absorb, 40.0, 100);
  absorb->add_option("--ensemble", ensemble, "trajectories per radius")->capture_default_str();
  absorb->add_option("--radii", radii, "comma-separated radii")->capture_default_str();
  absorb->add_option("--seed", seed, "ensemble seed")->capture_default_str();
  absorb->add_option("--threshold", threshold,
                     "ball radius R on ||.||_H^2; 0 = 1.1 x max long-time sup");

  std::string ic2, ic2_v;
  double c_delta = 0, c2_delta = 1;
  auto* pair = app.add_subcommand("pair", "two trajectories and the difference functionals");
  common(pair, 10.0, 1);
  pair->add_option("--ic2", ic2, "u0 mode amplitudes of the second trajectory")->required();
  pair->add_option("--ic2-v", ic2_v, "u1 mode amplitudes of the second trajectory");
  pair->add_option("--c-delta", c_delta, "constant C~_delta")->capture_default_str();
  pair->add_option("--c2-delta", c2_delta, "constant C~_2,delta")->capture_default_str();

  std::string dts = "4e-3,2e-3,1e-3";
  double dt_ref = 1e-5, T_conv = 1.0;
  std::size_t modes = 8;
  auto* converge = app.add_subcommand("converge", "IMEX error against an RK4 reference");
  converge->add_option("config", config, "JSON config")->required();
  converge->add_option("--dts", dts, "comma-separated decreasing steps")
      ->capture_default_str();
  converge->add_option("--dt-ref", dt_ref, "reference step")->capture_default_str();
  converge->add_option("--T", T_conv, "final time")->capture_default_str();
  converge->add_option("--modes", modes, "mode count, 0 = keep config")->capture_default_str();
  converge->add_option("--out", outdir, "output directory")->required();

  std::string csv, x_col = "t", svg_out, title;
  std::vector<std::string> cols;
  bool log_y = false;
  auto* plot = app.add_subcommand("plot", "SVG line plot of CSV columns");
  plot->add_option("csv", csv, "input CSV")->required();
  plot->add_option("--col", cols, "column to plot (repeatable)")->required();
  plot->add_option("--x", x_col, "abscissa column")->capture_default_str();
  plot->add_option("--out", svg_out, "output SVG")->required();
  plot->add_option("--title", title, "plot title");
  plot->add_flag("--log", log_y, "log-scale y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check(config, out);

    if (plot->parsed()) {
      const CsvTable t = read_csv(csv);
      std::vector<PlotSeries> series;
      const auto x = t.column(x_col);
      for (const auto& c : cols) series.push_back({c, x, t.column(c)});
      emit_svg(series, {title.empty() ? csv : title, x_col, cols.size() == 1 ? cols[0] : "",
                        log_y},
               svg_out);
      out << "wrote " << svg_out << '\n';
      return 0;
    }

    for (const auto& [sub, o] : run_opts)
      if (sub->parsed()) {
        T = o.T;
        dt = o.dt;
        max_iter = o.max_iter;
        stride = o.stride;
      }
    const Loaded cfg = load(config);
    warn_violations(cfg.spec, err);
    Run run(outdir, cfg, command);
    const StepperConfig sc = stepper(dt, max_iter);

    if (sim->parsed()) {
      EnergyRecorder rec(cfg.spec, dt, stride);
      const Trajectory traj = simulate(cfg.spec, sc, T, {rec.observer()});
      write_energy_csv(run.add("energy.csv"), rec.reports());
      const auto& last = rec.reports().back();
      write_json(run.add("summary.json"),
                 {{"T", T},
                  {"dt", dt},
                  {"n_steps", traj.n_steps},
                  {"final_normH", last.normH},
                  {"final_I1", last.I1},
                  {"max_diss_residual", rec.max_residual()},
                  {"max_I1_increase", rec.max_I1_increase()},
                  {"max_abs_I1", rec.max_abs_I1()}});
    } else if (decompose->parsed()) {
      const DecompositionRun d =
          run_decomposition(cfg.spec, sc, T, initial_state(cfg.spec), stride);
      write_decomposition_csv(run.add("decomposition.csv"), d.series);
      std::vector<double> t, w1, w2;
      for (const auto& p : d.series) {
        t.push_back(p.t);
        w1.push_back(p.H1_w1);
        w2.push_back(p.H1_w2);
      }
      json fit;
      try {
        const DecayFit f = fit_exponential_decay(t, w1);
        fit = {{"rate", f.rate}, {"floor", f.floor}, {"r2", f.r2}, {"n_fit", f.n_fit}};
      } catch (const NumericalError& e) {
        fit = {{"error", e.what()}};
      }
      const W2BoundReport b = check_w2_bound(t, w2);
      write_json(run.add("summary.json"),
                 {{"T", T},
                  {"dt", dt},
                  {"max_relative_defect", d.max_relative_defect},
                  {"min_hist_margin", d.min_hist_margin},
                  {"H1_w1_0", w1.front()},
                  {"w1_fit", fit},
                  {"w2", {{"sup_full", b.sup_full},
                          {"sup_after_burnin", b.sup_after_burnin},
                          {"final_value", b.final_value},
                          {"bounded", b.bounded}}}});
    } else if (absorb->parsed()) {
      EnsembleSpec ens;
      ens.n_traj = ensemble;
      ens.radius_set = parse_list(radii, "--radii");
      ens.seed = seed;
      ens.T_final = T;
      run.seed(seed);
      const auto series = run_probe_series(cfg.spec, sc, ens);
      double R = threshold;
      std::string rule = "given";
      if (R <= 0) {
        const ProbeReport pre = evaluate_probe(series, INFINITY);
        R = 1.1 * pre.max_long_time_sup;
        rule = "1.1 * max long-time sup";
      }
      const ProbeReport rep = evaluate_probe(series, R);
      json j = probe_to_json(rep);
      j["threshold_rule"] = rule;
      write_json(run.add("probe.json"), j);
      std::ofstream s(run.add("probe_series.csv"), std::ios::binary);
      s << kProbeSeriesHeader << '\n';
      for (const auto& p : series)
        for (std::size_t i = 0; i < p.t.size(); i += stride)
          s << p.id << ',' << format_double(p.radius) << ',' << format_double(p.t[i]) << ','
            << format_double(p.normH[i]) << '\n';
      out << "R = " << format_double(R) << ", absorbed = " << (rep.absorbed ? "yes" : "no")
          << '\n';
    } else if (pair->parsed()) {
      const SystemState ic1 = initial_state(cfg.spec);
      ProblemSpec second = cfg.spec;
      const std::size_t K = cfg.spec.grid->n_modes();
      auto field = [&](const std::string& list, const std::string& what) {
        auto a = parse_list(list, what);
        if (a.size() > K) throw ConfigError(what + " has more entries than modes");
        a.resize(K, 0.0);
        return SpectralField(std::move(a));
      };
      second.u0 = field(ic2, "--ic2");
      second.u1 = ic2_v.empty() ? SpectralField(K) : field(ic2_v, "--ic2-v");
      const PairStudy ps = run_pair_study(cfg.spec, sc, ic1, initial_state(second), T,
                                          {c_delta, c2_delta}, stride);
      write_pair_csv(run.add("pair.csv"), ps.report.series);
      json j = pair_summary_to_json(ps.report.summary);
      j["Atilde1_0"] = ps.Atilde1_0;
      j["Atilde1_T"] = ps.Atilde1_T;
      write_json(run.add("pair_summary.json"), j);
      out << "lhs = " << format_double(ps.report.summary.lhs)
          << ", rhs = " << format_double(ps.report.summary.rhs)
          << (ps.report.summary.holds ? ", holds\n" : ", does not hold\n");
    } else if (converge->parsed()) {
      const ProblemSpec spec = modes ? with_modes(cfg.spec, modes) : cfg.spec;
      const auto rows = run_convergence_study(spec, parse_list(dts, "--dts"), T_conv, dt_ref);
      write_convergence_csv(run.add("convergence.csv"), rows);
      for (const auto& r : rows)
        out << "dt " << format_double(r.dt) << " error " << format_double(r.error)
            << (r.ratio ? " ratio " + format_double(*r.ratio) : std::string()) << '\n';
    }
    run.finish();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const HypothesisError& e) {
    err << "hypothesis violated: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"kal"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kal
