#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refract/mtw.hpp"
#include "refract/oracle.hpp"

namespace refract {

struct BatteryRow {
  std::string name;
  double max_abs = 0.0;
  double max_rel = 0.0;
  double tol = 0.0;
  bool pass = true;
  int count = 0;

  void record(double abs_err, double rel_err = 0.0) {
    max_abs = std::max(max_abs, abs_err);
    max_rel = std::max(max_rel, rel_err);
    ++count;
    pass = pass && std::max(abs_err, rel_err) <= tol;
  }
};

struct BatterySpec {
  int jets = 1000;
  std::vector<double> kappas{0.5, 0.7, 0.9};
  double x_max = 0.3;
  std::uint64_t seed = 1;
};

/// The closed-form vs oracle sweep over random valid jets: derivative
/// formulas against finite differences through the re-traced pipeline,
/// determinant and inverse closed forms against independent dense
/// references, definition vs simplified assembly routes, and the scalar
/// identity audits.
std::vector<BatteryRow> run_formula_battery(const BatterySpec& spec);

/// General-route residual vs the explicit x = 0 specialization.
BatteryRow run_origin_battery(int samples, std::uint64_t seed);

/// Oval focusing sweep: Snell-traced radial graphs against the exact focus
/// direction, plus the single-oval |Dz| degeneracy.
std::vector<BatteryRow> run_oval_battery(int samples, std::uint64_t seed);

/// Dual-route MTW agreement on a sampled subset.
BatteryRow run_mtw_dual_route(const MediaPair& media, const ReceiverSurface& surface, int samples,
                              std::uint64_t seed);

}  // namespace refract
