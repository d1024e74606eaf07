#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "refract/mtw.hpp"
#include "refract/oracle.hpp"
#include "refract/solver.hpp"

namespace refract {

enum class Command { solve, verify, mtw_certify, trace, r_convexity };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct SolveBlock {
  double tol = 1e-3;
  int max_iters = 2000;
  double step_rel = 0.02;
  int grid = 256;
  std::optional<Vec> through_point;
  std::vector<double> b_init;
};

struct VerifyBlock {
  int jets = 1000;
  std::vector<double> kappas{0.5, 0.7, 0.9};
  double x_max = 0.3;
  int origin_samples = 1000;
  int oval_samples = 1000;
};

struct MtwBlock {
  double v_min = 0.5;
  double v_max = 2.0;
  double p_max = 0.5;
  int n_v = 10;
  int n_pmag = 10;
  int n_pdir = 10;
  int n_xi = 10;
  int dual_route_samples = 50;
};

struct TraceRhoBlock {
  std::string kind = "radial_quadratic";  // constant | radial_quadratic | oval
  double c0 = 1.0;
  double c1 = 0.1;
  Vec center{0.0, 0.0};
  int oval_target = 0;      // for kind = oval: which target's focus
  double oval_b_frac = 0.5; // position of b inside (|P|, |P|/kappa)
};

struct TraceBlock {
  int grid = 8;
  TraceRhoBlock rho;
};

struct RConvexityBlock {
  Vec patch_center;
  double patch_radius = 0.5;
  std::optional<Vec> second_patch_center;  // optional second (disconnection control)
  int vertices = 4;
  int pairs = 8;
  int sweep_steps = 1024;
};

struct RunConfig {
  Command command = Command::solve;
  int n = 2;
  std::uint64_t seed = 1;
  int threads = 1;
  MediaPair media;
  ReceiverSurface surface;
  SourceDomain domain;
  SourceDensity density;
  std::vector<TargetPoint> targets;
  double tau = 0.05;
  SolveBlock solve;
  VerifyBlock verify;
  MtwBlock mtw;
  TraceBlock trace;
  RConvexityBlock rconv;
  std::string echo;  // canonical serialization of the validated config
};

/// Parses and validates a JSON config file; throws ConfigError with a
/// field-level message on any violation (including the H1-H4 and visibility
/// checks that can be performed before computation).
RunConfig load_config(const std::string& path, Command command);
RunConfig parse_config_text(const std::string& text, Command command);

}  // namespace refract
