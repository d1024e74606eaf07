#include "refract/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "refract/rng.hpp"

namespace refract {

double SourceDensity::operator()(const Vec& x) const {
  if (kind == Kind::constant) return value;
  double r = norm(x - center);
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * r + coeffs[k];
  return acc;
}

ChartGrid make_grid(const EnergyProblem& problem, int cells_per_side) {
  if (cells_per_side < 8) throw ConfigError("grid: cells_per_side >= 8 required");
  const SourceDomain& dom = problem.domain;
  int n = dom.center.size();
  if (n != 2) throw ConfigError("grid: chart quadrature implemented for n = 2");
  double cell = 2.0 * dom.radius / cells_per_side;
  ChartGrid grid;
  grid.cell_size = cell;
  double area = cell * cell;
  for (int i = 0; i < cells_per_side; ++i)
    for (int j = 0; j < cells_per_side; ++j) {
      Vec x{dom.center[0] - dom.radius + (i + 0.5) * cell,
            dom.center[1] - dom.radius + (j + 0.5) * cell};
      if (!dom.contains(x)) continue;
      double xn1 = std::sqrt(1.0 - dot(x, x));
      double w = problem.density(x) / xn1 * area;
      grid.centers.push_back(x);
      grid.weights.push_back(w);
      grid.total += w;
    }
  if (grid.centers.empty()) throw ConfigError("grid: no cells inside the source domain");
  return grid;
}

void normalize_masses(EnergyProblem& problem, const ChartGrid& grid) {
  double gsum = 0.0;
  for (const TargetPoint& t : problem.targets) gsum += t.g;
  if (gsum <= 0.0) throw ConfigError("targets: total mass must be positive");
  double scale = grid.total / gsum;
  for (TargetPoint& t : problem.targets) t.g *= scale;
}

void validate_problem(const EnergyProblem& problem) {
  double kappa = problem.media.kappa();
  if (kappa >= 1.0) throw ConfigError("problem: envelope construction requires kappa < 1");
  if (problem.targets.empty()) throw ConfigError("problem: no targets");
  if (!(problem.tau > 0.0 && problem.tau < 1.0 - kappa))
    throw ConfigError("problem: tau must lie in (0, 1-kappa) (visibility margin)");

  // boundary + center samples of the source disk
  std::vector<Vec> xs;
  xs.push_back(problem.domain.center);
  for (int k = 0; k < 64; ++k) {
    double th = 2.0 * M_PI * k / 64;
    xs.push_back(problem.domain.center +
                 problem.domain.radius * Vec{std::cos(th), std::sin(th)});
  }

  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.targets.size(); ++i) {
    const TargetPoint& tp = problem.targets[i];
    if (tp.g < 0.0) throw ConfigError("problem: negative target mass");
    if (std::abs(problem.surface.psi(tp.z)) > 1e-9)
      throw ConfigError("problem: target " + std::to_string(i) + " not on Sigma (|psi| > 1e-9)");
    if (problem.surface.psi_vertical(tp.z) <= 0.0)
      throw ConfigError("problem: H2 fails at target " + std::to_string(i));
    Vec u = normalized(tp.z);
    for (const Vec& x : xs) {
      Vec x_dir = lift(x);
      if (dot(x_dir, u) < kappa + problem.tau)
        throw ConfigError("problem: visibility margin X.Z/|Z| >= kappa+tau fails at target " +
                          std::to_string(i));
      min_sep = std::min(min_sep, norm(x_dir - tp.z));
    }
  }
  if (min_sep <= 0.0) throw ConfigError("problem: H4 fails (source and target sets touch)");
}

EnvelopeValue envelope_eval(const RefractorEnvelope& env, const Vec& x) {
  if (env.ovals.empty()) throw DomainError("envelope: no ovals");
  Vec x_dir = lift(x);
  EnvelopeValue ev;
  for (std::size_t i = 0; i < env.ovals.size(); ++i) {
    double h = oval_radial(x_dir, env.ovals[i]);  // throws CapError if inadmissible
    if (ev.i_star < 0 || h > ev.rho) {
      ev.rho = h;
      ev.i_star = static_cast<int>(i);
    }
  }
  return ev;
}

namespace {

/// Per-target constants of h(X, P, b) with X . P cached per grid cell:
/// h = (A - sqrt(A^2 - c2 (c1 - b^2))) / c2 with A = ik2 XP - b.
struct FastEnvelope {
  double ik2 = 0.0;
  std::vector<double> c1;                 // ik2 |P|^2 per target
  std::vector<std::vector<double>> xp;    // [target][cell] = X . P
  std::vector<double> b;

  double eval_cell(std::size_t cell, int i) const {
    double a = ik2 * xp[static_cast<std::size_t>(i)][cell] - b[static_cast<std::size_t>(i)];
    double disc = a * a - (ik2 - 1.0) * (c1[static_cast<std::size_t>(i)] -
                                         b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)]);
    if (disc < 0.0) throw CapError("envelope: negative discriminant on grid");
    return (a - std::sqrt(disc)) / (ik2 - 1.0);
  }
};

FastEnvelope bind_envelope(const RefractorEnvelope& env, const ChartGrid& grid) {
  FastEnvelope fe;
  double kappa = env.ovals.front().kappa;
  fe.ik2 = 1.0 / (kappa * kappa);
  std::size_t nt = env.ovals.size();
  fe.c1.resize(nt);
  fe.b.resize(nt);
  fe.xp.assign(nt, std::vector<double>(grid.centers.size()));
  for (std::size_t i = 0; i < nt; ++i) {
    fe.c1[i] = fe.ik2 * dot(env.ovals[i].p, env.ovals[i].p);
    fe.b[i] = env.ovals[i].b;
  }
  for (std::size_t c = 0; c < grid.centers.size(); ++c) {
    Vec x_dir = lift(grid.centers[c]);
    for (std::size_t i = 0; i < nt; ++i) fe.xp[i][c] = dot(x_dir, env.ovals[i].p);
  }
  return fe;
}

std::vector<int> assign_cells(const FastEnvelope& fe, std::size_t n_cells, int n_targets,
                              int threads) {
  std::vector<int> owner(n_cells, 0);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      double best = fe.eval_cell(c, 0);
      int arg = 0;
      for (int i = 1; i < n_targets; ++i) {
        double h = fe.eval_cell(c, i);
        if (h > best) {
          best = h;
          arg = i;
        }
      }
      owner[c] = arg;
    }
  };
  if (threads <= 1) {
    work(0, n_cells);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (n_cells + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
    for (int k = 0; k < threads; ++k) {
      std::size_t lo = static_cast<std::size_t>(k) * chunk;
      std::size_t hi = std::min(n_cells, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return owner;
}

EnergyReport report_from_owner(const EnergyProblem& problem, const ChartGrid& grid,
                               const std::vector<int>& owner) {
  EnergyReport rep;
  std::size_t nt = problem.targets.size();
  rep.traced.assign(nt, 0.0);
  for (std::size_t c = 0; c < grid.centers.size(); ++c)
    rep.traced[static_cast<std::size_t>(owner[c])] += grid.weights[c];
  rep.errors.resize(nt);
  rep.total_source = grid.total;
  for (std::size_t i = 0; i < nt; ++i) {
    rep.errors[i] = rep.traced[i] - problem.targets[i].g;
    rep.sup_error = std::max(rep.sup_error, std::abs(rep.errors[i]));
    rep.total_traced += rep.traced[i];
  }
  return rep;
}

}  // namespace

EnergyReport trace_energy(const EnergyProblem& problem, const RefractorEnvelope& env,
                          const ChartGrid& grid, const TraceOptions& opts) {
  FastEnvelope fe = bind_envelope(env, grid);
  int nt = static_cast<int>(problem.targets.size());
  std::vector<int> owner = assign_cells(fe, grid.centers.size(), nt, opts.threads);
  EnergyReport rep = report_from_owner(problem, grid, owner);

  if (opts.require_coverage) {
    for (std::size_t i = 0; i < problem.targets.size(); ++i)
      if (problem.targets[i].g > 0.0 && rep.traced[i] == 0.0)
        throw ConvergenceError("trace_energy: quadrature underflow, target " + std::to_string(i) +
                               " receives zero cells");
  }

  if (opts.spot_check_stride > 0) {
    for (std::size_t c = 0; c < grid.centers.size();
         c += static_cast<std::size_t>(opts.spot_check_stride)) {
      const OvalSpec& oval = env.ovals[static_cast<std::size_t>(owner[c])];
      RadialJet jet = oval_jet(grid.centers[c], oval);
      Vec y = refracted_direction(jet, problem.media).y_dir;
      RayHit hit = intersect_ray(problem.surface, jet.rho * lift(jet.x), y);
      double dev = norm(hit.z - oval.p) / norm(oval.p);
      rep.max_focus_deviation = std::max(rep.max_focus_deviation, dev);
    }
  }
  return rep;
}

namespace {

/// Worst refracting-cap margin of O(Z, b) over the source disk (the minimum
/// of X . Z over the disk sits on its boundary).
double worst_cap_margin(const Vec& z, double b, double kappa, double tau, const SourceDomain& dom) {
  OvalSpec oval{z, b, kappa, tau};
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 128; ++k) {
    double th = 2.0 * M_PI * k / 128;
    Vec x = dom.center + dom.radius * Vec{std::cos(th), std::sin(th)};
    worst = std::min(worst, oval_cap_margin(lift(x), oval));
  }
  return worst;
}

/// Smallest b whose refracting cap covers the source disk with a small
/// margin; the margin is nondecreasing in b on (|Z|, |Z|/kappa).
double cap_coverage_b_min(const Vec& z, double kappa, double tau, const SourceDomain& dom) {
  double pn = norm(z);
  double lo = pn * (1.0 + 1e-9);
  double hi = pn / kappa * (1.0 - 1e-9);
  double safety = 1e-6 * pn;
  if (worst_cap_margin(z, hi, kappa, tau, dom) < safety)
    throw ConfigError("solve: no admissible b covers the source domain for a target");
  if (worst_cap_margin(z, lo, kappa, tau, dom) >= safety) return lo;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (worst_cap_margin(z, mid, kappa, tau, dom) >= safety) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

SolveResult solve_impl(const EnergyProblem& problem, std::vector<double> b, const SolveOptions& opts) {
  validate_problem(problem);
  double kappa = problem.media.kappa();
  std::size_t nt = problem.targets.size();

  ChartGrid grid = make_grid(problem, opts.grid);
  double sum_g = 0.0;
  for (const TargetPoint& t : problem.targets) sum_g += t.g;
  if (std::abs(sum_g - grid.total) > 1e-6 * grid.total)
    throw ConfigError("solve: sum g_i must equal the quadrature total to 1e-6 relative "
                      "(use normalize_masses)");

  RefractorEnvelope env;
  std::vector<double> b_lo(nt), b_hi(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    double pn = norm(problem.targets[i].z);
    b_lo[i] = cap_coverage_b_min(problem.targets[i].z, kappa, problem.tau, problem.domain);
    b_hi[i] = pn / kappa * (1.0 - 1e-9);
    if (!(b[i] >= b_lo[i] && b[i] < b_hi[i]))
      throw ConfigError("solve: initial b for target " + std::to_string(i) +
                        " outside the admissible band (cap must cover the source domain)");
    env.ovals.push_back(make_oval(problem.targets[i].z, b[i], problem.media, problem.tau));
  }

  FastEnvelope fe = bind_envelope(env, grid);
  std::vector<double> step(nt), prev_dir(nt, 0.0);
  for (std::size_t i = 0; i < nt; ++i) step[i] = opts.step_rel * (b_hi[i] - b_lo[i]);

  SolveResult result;
  double tol_abs = opts.tol * grid.total;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    std::vector<int> owner = assign_cells(fe, grid.centers.size(), static_cast<int>(nt), opts.threads);
    EnergyReport rep = report_from_owner(problem, grid, owner);
    // cells are reassigned, never dropped: the traced total must match the
    // quadrature total at every iterate
    if (std::abs(rep.total_traced - grid.total) > 1e-9 * grid.total)
      throw ConvergenceError("solve: traced energy total drifted from the quadrature total");
    result.sup_history.push_back(rep.sup_error);
    if (rep.sup_error <= tol_abs) {
      result.report = rep;
      result.report.iterations = it;
      for (std::size_t i = 0; i < nt; ++i) env.ovals[i].b = fe.b[i];
      result.envelope = env;
      return result;
    }
    // over-fed targets grow b (which retracts their oval's claim); b_1 pinned.
    // Geometric shrink on sign flips with a small floor so the walk keeps
    // resolving the coupled equilibrium instead of freezing.
    for (std::size_t i = 1; i < nt; ++i) {
      double e = rep.errors[i];
      if (std::abs(e) <= 0.05 * tol_abs) continue;
      double dir = (e > 0.0) ? 1.0 : -1.0;
      double cap = opts.step_rel * (b_hi[i] - b_lo[i]);
      if (prev_dir[i] != 0.0 && dir != prev_dir[i]) {
        step[i] = std::max(step[i] * 0.5, 1e-4 * cap);
      } else {
        step[i] = std::min(step[i] * 1.3, cap);
      }
      prev_dir[i] = dir;
      fe.b[i] = std::clamp(fe.b[i] + dir * step[i], b_lo[i], b_hi[i]);
    }
  }
  double last = result.sup_history.empty() ? -1.0 : result.sup_history.back();
  throw ConvergenceError("solve: not converged after " + std::to_string(opts.max_iters) +
                         " iterations (sup error " + std::to_string(last) + ")");
}

}  // namespace

SolveResult solve(const EnergyProblem& problem, const Vec& through_point, const SolveOptions& opts) {
  double kappa = problem.media.kappa();
  std::vector<double> b;
  for (const TargetPoint& t : problem.targets)
    b.push_back(norm(through_point) + norm(through_point - t.z) / kappa);
  return solve_impl(problem, std::move(b), opts);
}

SolveResult solve_from_b(const EnergyProblem& problem, const std::vector<double>& b_init,
                         const SolveOptions& opts) {
  return solve_impl(problem, b_init, opts);
}

double legendre_b(const std::function<double(const Vec&)>& rho, double kappa, const Vec& z,
                  const ChartGrid& grid) {
  if (grid.centers.empty()) throw DomainError("legendre_b: empty grid");
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& x : grid.centers) {
    double r = rho(x);
    best = std::max(best, r + norm(r * lift(x) - z) / kappa);
  }
  return best;
}

SupportReport support_globality_check(const std::function<double(const Vec&)>& rho,
                                      const OvalSpec& oval, const ChartGrid& grid, double tol) {
  SupportReport rep;
  for (const Vec& x : grid.centers) {
    double h = oval_radial(lift(x), oval);
    double gap = h - rho(x);
    if (gap > tol) {
      ++rep.violations;
      rep.worst = std::max(rep.worst, gap);
    }
  }
  return rep;
}

SupportReport support_globality_check(const RefractorEnvelope& env, const Vec& x0,
                                      const ChartGrid& grid, double tol) {
  EnvelopeValue at0 = envelope_eval(env, x0);
  auto rho = [&env](const Vec& x) { return envelope_eval(env, x).rho; };
  return support_globality_check(rho, env.ovals[static_cast<std::size_t>(at0.i_star)], grid, tol);
}

RConvexityReport r_convexity_probe(const ReceiverSurface& surface, const MediaPair& media,
                                   const SourceDomain& domain,
                                   const std::function<bool(const Vec&)>& patch,
                                   const RConvexitySpec& spec) {
  if (spec.sweep_steps < 2) throw ConfigError("r_convexity: sweep_steps >= 2 required");
  Rng rng(spec.seed);
  RConvexityReport rep;

  for (int iv = 0; iv < spec.vertices; ++iv) {
    // vertex in the source cone C_U = {t X, X in U, t > 0}
    Vec x = domain.center + rng.in_ball(domain.center.size(), domain.radius);
    Vec x_dir = lift(x);
    double radius = rng.uniform(spec.vertex_radius_lo, spec.vertex_radius_hi);
    Vec vertex = radius * x_dir;

    for (int ip = 0; ip < spec.pairs; ++ip) {
      // unit normals with a positive component along X so every swept normal
      // refracts (kappa < 1 has no internal-reflection constraint)
      Vec nu1 = normalized(x_dir + 0.85 * rng.unit_vector(x_dir.size()));
      Vec nu2 = normalized(x_dir + 0.85 * rng.unit_vector(x_dir.size()));

      ConeSweep sweep;
      sweep.vertex = iv;
      sweep.pair = ip;
      std::vector<bool> hits;
      hits.reserve(static_cast<std::size_t>(spec.sweep_steps));
      for (int k = 0; k < spec.sweep_steps; ++k) {
        double s = static_cast<double>(k) / (spec.sweep_steps - 1);
        Vec combo = (1.0 - s) * nu1 + s * nu2;
        if (norm(combo) < 1e-10) {
          ++rep.degenerate_skipped;
          hits.push_back(false);
          continue;
        }
        Vec nu = normalized(combo);
        bool in_patch = false;
        if (dot(x_dir, nu) > 0.0) {
          try {
            Vec y = snell(x_dir, nu, media);
            RayHit hit = intersect_ray(surface, vertex, y);
            in_patch = patch(hit.z);
          } catch (const std::runtime_error&) {
            in_patch = false;
          }
        }
        hits.push_back(in_patch);
      }
      int runs = 0;
      bool prev = false;
      for (bool h : hits) {
        if (h && !prev) ++runs;
        prev = h;
      }
      sweep.hit_runs = runs;
      sweep.connected = runs <= 1;
      rep.all_connected = rep.all_connected && sweep.connected;
      rep.sweeps.push_back(sweep);
    }
  }
  return rep;
}

}  // namespace refract
