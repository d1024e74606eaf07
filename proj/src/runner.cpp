#include "refract/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "refract/battery.hpp"

namespace refract {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ",";
    row += cells[i];
  }
  row += "\n";
  return row;
}

struct SummaryBuilder {
  std::ostringstream text;
  bool pass = true;

  void line(const std::string& s) { text << s << "\n"; }
  void check(const std::string& name, bool ok, const std::string& detail) {
    pass = pass && ok;
    text << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  }
};

RunOutcome finish(const RunConfig& cfg, const std::string& out_dir, SummaryBuilder& sb) {
  sb.line(sb.pass ? "RESULT pass" : "RESULT fail");
  write_file(fs::path(out_dir) / "summary.txt", sb.text.str());
  write_file(fs::path(out_dir) / "config_echo.json", cfg.echo + "\n");
  return RunOutcome{sb.pass, sb.text.str()};
}

RunOutcome run_solve(const RunConfig& cfg, const std::string& out_dir) {
  EnergyProblem problem{cfg.media, cfg.surface, cfg.domain, cfg.density, cfg.targets, cfg.tau};
  ChartGrid grid = make_grid(problem, cfg.solve.grid);
  normalize_masses(problem, grid);

  SolveOptions opts;
  opts.tol = cfg.solve.tol;
  opts.max_iters = cfg.solve.max_iters;
  opts.step_rel = cfg.solve.step_rel;
  opts.grid = cfg.solve.grid;
  opts.threads = cfg.threads;

  SolveResult result = cfg.solve.through_point
                           ? solve(problem, *cfg.solve.through_point, opts)
                           : solve_from_b(problem, cfg.solve.b_init, opts);

  std::string env_csv = "i,z1,z2,z3,g,b,G,err\n";
  for (std::size_t i = 0; i < problem.targets.size(); ++i) {
    const TargetPoint& t = problem.targets[i];
    env_csv += join_row({std::to_string(i), format_g17(t.z[0]), format_g17(t.z[1]),
                         format_g17(t.z[2]), format_g17(t.g), format_g17(result.envelope.ovals[i].b),
                         format_g17(result.report.traced[i]), format_g17(result.report.errors[i])});
  }
  write_file(fs::path(out_dir) / "envelope.csv", env_csv);

  std::string rho_csv = "x1,x2,rho,i_star\n";
  for (const Vec& x : grid.centers) {
    EnvelopeValue ev = envelope_eval(result.envelope, x);
    rho_csv += join_row({format_g17(x[0]), format_g17(x[1]), format_g17(ev.rho),
                         std::to_string(ev.i_star)});
  }
  write_file(fs::path(out_dir) / "rho_grid.csv", rho_csv);

  std::string hist_csv = "iteration,sup_error\n";
  for (std::size_t k = 0; k < result.sup_history.size(); ++k)
    hist_csv += join_row({std::to_string(k), format_g17(result.sup_history[k])});
  write_file(fs::path(out_dir) / "iterations.csv", hist_csv);

  SummaryBuilder sb;
  sb.line("command solve");
  sb.line("targets " + std::to_string(problem.targets.size()));
  sb.line("grid " + std::to_string(cfg.solve.grid));
  sb.line("iterations " + std::to_string(result.report.iterations));
  sb.line("total_energy " + format_g17(grid.total));
  double tol_abs = cfg.solve.tol * grid.total;
  sb.check("sup_error", result.report.sup_error <= tol_abs,
           format_g17(result.report.sup_error) + " <= " + format_g17(tol_abs));
  sb.check("energy_conservation",
           std::abs(result.report.total_traced - grid.total) <= 1e-9 * grid.total,
           format_g17(result.report.total_traced) + " vs " + format_g17(grid.total));
  return finish(cfg, out_dir, sb);
}

RunOutcome run_verify(const RunConfig& cfg, const std::string& out_dir) {
  BatterySpec spec;
  spec.jets = cfg.verify.jets;
  spec.kappas = cfg.verify.kappas;
  spec.x_max = cfg.verify.x_max;
  spec.seed = cfg.seed;

  std::vector<BatteryRow> rows = run_formula_battery(spec);
  rows.push_back(run_origin_battery(cfg.verify.origin_samples, cfg.seed + 1));
  for (BatteryRow& r : run_oval_battery(cfg.verify.oval_samples, cfg.seed + 2)) rows.push_back(r);

  std::string csv = "formula,max_abs_err,max_rel_err,tolerance,samples,pass\n";
  SummaryBuilder sb;
  sb.line("command verify");
  for (const BatteryRow& r : rows) {
    csv += join_row({r.name, format_g17(r.max_abs), format_g17(r.max_rel), format_g17(r.tol),
                     std::to_string(r.count), r.pass ? "1" : "0"});
    sb.check(r.name, r.pass,
             "max_abs " + format_g17(r.max_abs) + " max_rel " + format_g17(r.max_rel) + " tol " +
                 format_g17(r.tol));
  }
  write_file(fs::path(out_dir) / "verify.csv", csv);
  return finish(cfg, out_dir, sb);
}

RunOutcome run_mtw(const RunConfig& cfg, const std::string& out_dir) {
  MTWSamplingSpec spec;
  spec.v_min = cfg.mtw.v_min;
  spec.v_max = cfg.mtw.v_max;
  spec.p_max = cfg.mtw.p_max;
  spec.n_v = cfg.mtw.n_v;
  spec.n_pmag = cfg.mtw.n_pmag;
  spec.n_pdir = cfg.mtw.n_pdir;
  spec.n_xi = cfg.mtw.n_xi;
  spec.seed = cfg.seed;

  MTWReport rep = certify_A3(cfg.media, cfg.surface, spec);

  std::string csv = "v,p_mag,value\n";
  for (const MTWSample& s : rep.samples)
    csv += join_row({format_g17(s.v), format_g17(s.p_mag), format_g17(s.value)});
  write_file(fs::path(out_dir) / "mtw_samples.csv", csv);

  SummaryBuilder sb;
  sb.line("command mtw-certify");
  sb.line("kappa " + format_g17(cfg.media.kappa()));
  sb.line("samples " + std::to_string(rep.samples.size()));
  sb.line("min_value " + format_g17(rep.min_value));
  sb.line("max_value " + format_g17(rep.max_value));
  sb.line("c0 " + format_g17(rep.c0));
  std::string verdict = rep.verdict == MTWVerdict::negative_definite
                            ? "negative_definite"
                            : rep.verdict == MTWVerdict::positive_definite_regime
                                  ? "positive_definite_regime"
                                  : "indefinite";
  sb.line("verdict " + verdict);
  bool sign_ok = (cfg.media.kappa() < 1.0) ? rep.verdict == MTWVerdict::negative_definite
                                           : rep.verdict == MTWVerdict::positive_definite_regime;
  sb.check("a3_sign", sign_ok, "verdict " + verdict + " c0 " + format_g17(rep.c0));

  if (cfg.mtw.dual_route_samples > 0) {
    BatteryRow dual = run_mtw_dual_route(cfg.media, cfg.surface, cfg.mtw.dual_route_samples,
                                         cfg.seed + 3);
    sb.check(dual.name, dual.pass,
             "max_rel " + format_g17(dual.max_rel) + " tol " + format_g17(dual.tol));
  }
  return finish(cfg, out_dir, sb);
}

RunOutcome run_trace(const RunConfig& cfg, const std::string& out_dir) {
  // analytic radial fixture selected by the config
  AnalyticRho rho = AnalyticRho::radial_quadratic(cfg.trace.rho.c0, cfg.trace.rho.c1,
                                                  cfg.trace.rho.center);
  if (cfg.trace.rho.kind == "constant") {
    rho = AnalyticRho::constant(cfg.n, cfg.trace.rho.c0);
  } else if (cfg.trace.rho.kind == "oval") {
    if (cfg.targets.empty()) throw ConfigError("trace: oval fixture needs targets");
    const TargetPoint& t =
        cfg.targets[static_cast<std::size_t>(cfg.trace.rho.oval_target) % cfg.targets.size()];
    double pn = norm(t.z);
    double kappa = cfg.media.kappa();
    double b = pn + cfg.trace.rho.oval_b_frac * (pn / kappa - pn);
    rho = AnalyticRho::oval_exact(make_oval(t.z, b, cfg.media, cfg.tau));
  }

  std::string csv = "x1,x2,rho,t,y1,y2,y3,z1,z2,z3,det_M,det_Dz,residual,rel_residual\n";
  SummaryBuilder sb;
  sb.line("command trace");
  int rays = 0;
  double worst_rel = 0.0;
  int m = cfg.trace.grid;
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      Vec x{cfg.domain.center[0] + cfg.domain.radius * (2.0 * (i + 0.5) / m - 1.0),
            cfg.domain.center[1] + cfg.domain.radius * (2.0 * (k + 0.5) / m - 1.0)};
      if (!cfg.domain.contains(x)) continue;
      RadialJet jet = rho.jet_at(x);
      JacobianBundle bd;
      try {
        bd = assemble_bundle(jet, cfg.surface, cfg.media);
      } catch (const std::runtime_error&) {
        continue;  // outside H1-H3 for this fixture
      }
      double residual = 0.0, rel = 0.0;
      if (std::abs(bd.det_dz) > 1e-9) {
        double g_val = bd.st.psi_vertical /
                       (norm(bd.st.grad_psi) * bd.st.x_dir[2] * std::abs(bd.det_dz));
        MaResidual res = ma_residual(jet, cfg.surface, cfg.media, 1.0, g_val);
        residual = res.raw;
        rel = res.relative;
        worst_rel = std::max(worst_rel, std::abs(rel));
      }
      csv += join_row({format_g17(x[0]), format_g17(x[1]), format_g17(jet.rho),
                       format_g17(bd.st.t), format_g17(bd.st.y_dir[0]), format_g17(bd.st.y_dir[1]),
                       format_g17(bd.st.y_dir[2]), format_g17(bd.st.z[0]), format_g17(bd.st.z[1]),
                       format_g17(bd.st.z[2]), format_g17(bd.mm.det_closed), format_g17(bd.det_dz),
                       format_g17(residual), format_g17(rel)});
      ++rays;
    }
  write_file(fs::path(out_dir) / "trace.csv", csv);
  sb.line("rays " + std::to_string(rays));
  if (cfg.trace.rho.kind == "oval") {
    sb.check("rays_traced", rays > 0, std::to_string(rays) + " rays");
  } else {
    sb.check("residual_consistency", rays > 0 && worst_rel <= 1e-6,
             "max |rel residual| " + format_g17(worst_rel));
  }
  return finish(cfg, out_dir, sb);
}

RunOutcome run_rconv(const RunConfig& cfg, const std::string& out_dir) {
  RConvexitySpec spec;
  spec.vertices = cfg.rconv.vertices;
  spec.pairs = cfg.rconv.pairs;
  spec.sweep_steps = cfg.rconv.sweep_steps;
  spec.seed = cfg.seed;

  Vec c1 = cfg.rconv.patch_center;
  double r = cfg.rconv.patch_radius;
  std::optional<Vec> c2 = cfg.rconv.second_patch_center;
  auto patch = [c1, c2, r](const Vec& z) {
    if (norm(z - c1) <= r) return true;
    return c2 && norm(z - *c2) <= r;
  };

  RConvexityReport rep = r_convexity_probe(cfg.surface, cfg.media, cfg.domain, patch, spec);

  std::string csv = "vertex,pair,hit_runs,connected\n";
  for (const ConeSweep& s : rep.sweeps)
    csv += join_row({std::to_string(s.vertex), std::to_string(s.pair), std::to_string(s.hit_runs),
                     s.connected ? "1" : "0"});
  write_file(fs::path(out_dir) / "rconvexity.csv", csv);

  SummaryBuilder sb;
  sb.line("command r-convexity");
  sb.line("sweeps " + std::to_string(rep.sweeps.size()));
  sb.line("degenerate_skipped " + std::to_string(rep.degenerate_skipped));
  sb.check("connected", rep.all_connected,
           rep.all_connected ? "every cone meets the patch in one arc" : "disconnection witnessed");
  return finish(cfg, out_dir, sb);
}

}  // namespace

RunOutcome run(const RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  switch (cfg.command) {
    case Command::solve: return run_solve(cfg, out_dir);
    case Command::verify: return run_verify(cfg, out_dir);
    case Command::mtw_certify: return run_mtw(cfg, out_dir);
    case Command::trace: return run_trace(cfg, out_dir);
    case Command::r_convexity: return run_rconv(cfg, out_dir);
  }
  throw ConfigError("run: unknown command");
}

}  // namespace refract
