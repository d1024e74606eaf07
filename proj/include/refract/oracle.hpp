#pragma once

#include <functional>

#include "refract/jacobian.hpp"
#include "refract/receiver.hpp"
#include "refract/refraction.hpp"

namespace refract {

/// Finite-difference scheme selection. Oracles in this header call only
/// value-level operations (lift, refracted_direction, intersect_ray,
/// envelope evaluation); they never touch the closed-form derivatives they
/// are used to check.
struct FDSpec {
  double step = 1e-5;
  int order = 2;           // 2 or 4
  bool richardson = false; // combine step and step/2 for one extra order pair
};

void validate_fd(const FDSpec& spec);

double fd_derivative(const std::function<double(double)>& f, const FDSpec& spec);
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, const FDSpec& spec);
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, const FDSpec& spec);
/// Central second-derivative matrix of a scalar field.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, const FDSpec& spec);
/// Second directional derivative d^2/ds^2 f(x + s d) at s = 0.
double fd_second_directional(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& d,
                             const FDSpec& spec);

/// Test-fixture radial functions with exact (or high-order FD) jets.
class AnalyticRho {
 public:
  enum class Kind { constant, radial_quadratic, quadratic, oval_exact, oval_perturbed };

  double rho(const Vec& x) const { return rho_(x); }
  Vec grad(const Vec& x) const { return grad_(x); }
  Mat hess(const Vec& x) const { return hess_(x); }
  RadialJet jet_at(const Vec& x) const { return RadialJet{x, rho_(x), grad_(x), hess_(x)}; }
  Kind kind() const { return kind_; }

  static AnalyticRho constant(int n, double c);
  static AnalyticRho radial_quadratic(double c0, double c1, const Vec& center);
  /// General quadratic rho(x) = rho0 + g.(x-x0) + 0.5 (x-x0)^T H (x-x0);
  /// realizes an arbitrary second-order jet at x0 for the random-jet oracles.
  static AnalyticRho quadratic(const Vec& x0, double rho0, const Vec& g, const Mat& h);
  static AnalyticRho oval_exact(const OvalSpec& oval);
  /// Oval radial plus eps |x|^2 (the positive-definiteness probe fixture).
  static AnalyticRho oval_perturbed(const OvalSpec& oval, double eps);

 private:
  Kind kind_ = Kind::constant;
  std::function<double(const Vec&)> rho_;
  std::function<Vec(const Vec&)> grad_;
  std::function<Mat(const Vec&)> hess_;
};

/// Independent dense references (Gauss-Jordan with full pivoting), written
/// separately from the LU kernel in linalg.cpp.
double ref_det(const Mat& a);
Mat ref_inverse(const Mat& a);

/// Scalar invariants evaluated before/after conjugating the whole scene by
/// a chart rotation r (n x n orthogonal); the receiver co-rotates through
/// the ambient block rotation diag(r, 1) when corotate_receiver is set.
struct RotationReport {
  double det_dz_rel = 0.0;
  double residual_rel = 0.0;
  double max_rel = 0.0;
};

RotationReport rotation_harness(const RadialJet& jet, const ReceiverSurface& surface,
                                const MediaPair& media, const Mat& r, bool corotate_receiver);

/// Chart rotation for n = 2.
Mat rotation2(double angle);

}  // namespace refract
