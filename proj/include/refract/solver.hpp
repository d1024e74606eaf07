#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "refract/receiver.hpp"
#include "refract/refraction.hpp"

namespace refract {

struct SourceDensity {
  enum class Kind { constant, radial_poly };
  Kind kind = Kind::constant;
  double value = 1.0;
  std::vector<double> coeffs;  // radial polynomial in |x - center|
  Vec center;

  double operator()(const Vec& x) const;
};

/// Chart disk |x - center| <= radius.
struct SourceDomain {
  Vec center;
  double radius = 0.3;
  bool contains(const Vec& x) const { return norm(x - center) <= radius; }
};

struct TargetPoint {
  Vec z;
  double g = 0.0;
};

struct EnergyProblem {
  MediaPair media;
  ReceiverSurface surface;
  SourceDomain domain;
  SourceDensity density;
  std::vector<TargetPoint> targets;
  double tau = 0.05;
};

/// Uniform chart grid over the domain's bounding square; cells whose center
/// falls inside the domain carry weight f(x) / x_{n+1} * cell_area
/// (d sigma = dx / x_{n+1}).
struct ChartGrid {
  std::vector<Vec> centers;
  std::vector<double> weights;
  double cell_size = 0.0;
  double total = 0.0;
};

ChartGrid make_grid(const EnergyProblem& problem, int cells_per_side);

/// Scales target masses so their sum matches the grid quadrature total.
void normalize_masses(EnergyProblem& problem, const ChartGrid& grid);

/// Validates the problem data: targets on Sigma, H2 at the targets, the
/// visibility margin X . Z/|Z| >= kappa + tau over the source domain
/// (boundary + center samples), H4 separation, positive masses.
/// Throws ConfigError naming the violated hypothesis.
void validate_problem(const EnergyProblem& problem);

/// Envelope of lower Cartesian ovals: rho(x) = max_i h(X, Z_i, b_i), the
/// radial surface supported from below by every member oval. The argmax
/// oval is the one whose piece the surface locally coincides with; ties go
/// to the lowest index.
struct RefractorEnvelope {
  std::vector<OvalSpec> ovals;
};

struct EnvelopeValue {
  double rho = 0.0;
  int i_star = -1;
};

EnvelopeValue envelope_eval(const RefractorEnvelope& env, const Vec& x);

struct TraceOptions {
  int threads = 1;
  int spot_check_stride = 0;  // 0 disables the Snell focusing spot-check
  bool require_coverage = false;
};

struct EnergyReport {
  std::vector<double> traced;   // G_i
  std::vector<double> errors;   // G_i - g_i
  double sup_error = 0.0;
  double total_traced = 0.0;
  double total_source = 0.0;
  int iterations = 0;
  double max_focus_deviation = 0.0;  // from the spot-check, relative to |Z|
};

EnergyReport trace_energy(const EnergyProblem& problem, const RefractorEnvelope& env,
                          const ChartGrid& grid, const TraceOptions& opts = {});

struct SolveOptions {
  double tol = 1e-3;      // on sup_i |G_i - g_i| / sum g
  int max_iters = 2000;
  double step_rel = 0.02; // initial step as a fraction of the b-range
  int grid = 256;
  int threads = 1;
};

struct SolveResult {
  RefractorEnvelope envelope;
  EnergyReport report;
  std::vector<double> sup_history;
};

/// Damped coordinate adjustment of the oval constants with per-target
/// geometric step control; b_1 stays pinned to the initialization (solutions
/// form a one-parameter family). Throws ConvergenceError when the budget is
/// exhausted.
SolveResult solve(const EnergyProblem& problem, const Vec& through_point, const SolveOptions& opts);
SolveResult solve_from_b(const EnergyProblem& problem, const std::vector<double>& b_init,
                         const SolveOptions& opts);

/// Legendre-type transform max_x (rho(x) + (1/kappa)|rho(x) X - Z|) over the
/// grid sample of the domain.
double legendre_b(const std::function<double(const Vec&)>& rho, double kappa, const Vec& z,
                  const ChartGrid& grid);

struct SupportReport {
  int violations = 0;
  double worst = 0.0;  // max of h - rho over violating cells
};

/// Checks rho(x) >= h(X, oval) - tol over the grid (global support from
/// below). Diagnostic only; never throws.
SupportReport support_globality_check(const std::function<double(const Vec&)>& rho,
                                      const OvalSpec& oval, const ChartGrid& grid,
                                      double tol = 1e-9);
SupportReport support_globality_check(const RefractorEnvelope& env, const Vec& x0,
                                      const ChartGrid& grid, double tol = 1e-9);

struct RConvexitySpec {
  int vertices = 4;
  int pairs = 8;
  int sweep_steps = 1024;
  double vertex_radius_lo = 0.2;  // |xi| range along sampled source rays
  double vertex_radius_hi = 0.8;
  std::uint64_t seed = 1;
};

struct ConeSweep {
  int vertex = 0;
  int pair = 0;
  int hit_runs = 0;  // maximal contiguous in-patch runs along the sweep
  bool connected = true;
};

struct RConvexityReport {
  std::vector<ConeSweep> sweeps;
  bool all_connected = true;
  int degenerate_skipped = 0;
};

/// Sweeps refraction cones C_{xi, nu1, nu2} from sampled vertices in the
/// source cone and reports whether each cone meets the target patch in a
/// single connected arc of the sweep parameter.
RConvexityReport r_convexity_probe(const ReceiverSurface& surface, const MediaPair& media,
                                   const SourceDomain& domain,
                                   const std::function<bool(const Vec&)>& patch,
                                   const RConvexitySpec& spec);

}  // namespace refract
