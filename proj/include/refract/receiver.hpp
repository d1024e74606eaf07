#pragma once

#include <functional>
#include <memory>

#include "refract/linalg.hpp"

namespace refract {

enum class SurfaceKind { plane, tilted_plane, graph_quadratic, graph_custom };

/// Target hypersurface Sigma given implicitly by psi(Z) = 0, with first and
/// second derivative evaluators. All built-in kinds are vertical graphs
/// psi(Z) = z_{n+1} - phi(z); arbitrary implicit surfaces (e.g. rotated
/// graphs) can be constructed through make_implicit_surface.
///
/// Evaluators are immutable after construction; every operation here is
/// reentrant.
class ReceiverSurface {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VecFn = std::function<Vec(const Vec&)>;
  using MatFn = std::function<Mat(const Vec&)>;

  ReceiverSurface() = default;
  ReceiverSurface(SurfaceKind kind, ScalarFn psi, VecFn grad_psi, MatFn hess_psi)
      : kind_(kind), psi_(std::move(psi)), grad_(std::move(grad_psi)), hess_(std::move(hess_psi)) {}

  SurfaceKind kind() const { return kind_; }
  double psi(const Vec& z) const { return psi_(z); }
  Vec grad_psi(const Vec& z) const { return grad_(z); }
  Mat hess_psi(const Vec& z) const { return hess_(z); }
  /// d psi / d z_{n+1}; must be positive wherever queried (hypothesis H2).
  double psi_vertical(const Vec& z) const { return grad_(z)[z.size() - 1]; }

 private:
  SurfaceKind kind_ = SurfaceKind::plane;
  ScalarFn psi_;
  VecFn grad_;
  MatFn hess_;
};

/// Horizontal plane z_{n+1} = c.
ReceiverSurface make_plane(int n, double c);
/// Tilted plane z_{n+1} = m . z + c.
ReceiverSurface make_tilted_plane(const Vec& m, double c);
/// Concave quadratic graph z_{n+1} = c - 0.5 z^T K z, K symmetric (psd for
/// the concave family used by the regularity tests; any symmetric K is
/// accepted so convex counterexamples can be built too).
ReceiverSurface make_quadratic_graph(double c, const Mat& k);
/// Custom graph z_{n+1} = phi(z) from user evaluators.
ReceiverSurface make_custom_graph(ReceiverSurface::ScalarFn phi, ReceiverSurface::VecFn grad_phi,
                                  ReceiverSurface::MatFn hess_phi);
/// Arbitrary implicit surface.
ReceiverSurface make_implicit_surface(ReceiverSurface::ScalarFn psi, ReceiverSurface::VecFn grad_psi,
                                      ReceiverSurface::MatFn hess_psi);
/// Surface conjugated by an ambient rotation: psi'(Z) = psi(R^T Z).
ReceiverSurface make_rotated(const ReceiverSurface& s, const Mat& r);

struct IntersectOptions {
  double t_min = 0.0;
  double t_max_scale = 1e3;  // t_max = scale * max(1, |origin|)
  double psi_tol = 1e-13;
  int max_newton = 80;
};

struct RayHit {
  double t = 0.0;
  Vec z;
};

/// Smallest t > 0 with psi(origin + t Y) = 0, by bracketing on a geometric
/// grid followed by safeguarded Newton. Throws NoIntersectionError when no
/// sign change is found in (0, t_max], VisibilityError when grad_psi . Y <= 0
/// at the root (H3).
RayHit intersect_ray(const ReceiverSurface& s, const Vec& origin, const Vec& y,
                     const IntersectOptions& opts = {});

/// |grad psi| / psi^{n+1} at Z; the surface-measure weight. Throws
/// DomainError when H2 fails.
double measure_weight(const ReceiverSurface& s, const Vec& z);

/// Deterministic orthonormal basis of the hyperplane orthogonal to y
/// (n columns for |y| in R^{n+1}); reduces to e_1..e_n when y = e_{n+1}.
std::vector<Vec> orthonormal_frame(const Vec& y);

/// Hessian of the rotated graph: in coordinates with the last axis along Y,
/// Sigma is locally the graph hat_x_{n+1} = phihat; returns the matrix of
/// second derivatives of phihat in the given frame, divided by
/// sqrt(1 + |D phihat|^2), i.e. the second fundamental form with respect to
/// the normal of positive Y-component.
Mat second_fundamental_form(const ReceiverSurface& s, const Vec& z, const Vec& y,
                            const std::vector<Vec>& frame);

/// Quadratic form w -> Hess(phihat)(w, w) of the rotated graph, evaluated on
/// the projection of w onto the plane orthogonal to y. Equal to
/// -Hess(psi)(v, v) / (grad psi . Y) with v the tangent lift of w; the ratio
/// does not depend on the choice of defining function psi.
double rotated_graph_hessian_form(const ReceiverSurface& s, const Vec& z, const Vec& y, const Vec& w);

}  // namespace refract
