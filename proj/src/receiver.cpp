#include "refract/receiver.hpp"

#include <algorithm>
#include <cmath>

namespace refract {

namespace {

ReceiverSurface make_graph(SurfaceKind kind, ReceiverSurface::ScalarFn phi,
                           ReceiverSurface::VecFn grad_phi, ReceiverSurface::MatFn hess_phi) {
  auto psi = [phi](const Vec& z) {
    int n = z.size() - 1;
    return z[n] - phi(z.head(n));
  };
  auto grad = [grad_phi](const Vec& z) {
    int n = z.size() - 1;
    Vec g = grad_phi(z.head(n));
    Vec out(n + 1);
    for (int i = 0; i < n; ++i) out[i] = -g[i];
    out[n] = 1.0;
    return out;
  };
  // top-left block -Hess(phi), last row and column zero
  auto hess = [hess_phi](const Vec& z) {
    int n = z.size() - 1;
    Mat h = hess_phi(z.head(n));
    Mat out(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = -h(i, j);
    return out;
  };
  return ReceiverSurface(kind, std::move(psi), std::move(grad), std::move(hess));
}

}  // namespace

ReceiverSurface make_plane(int n, double c) {
  auto phi = [c](const Vec&) { return c; };
  auto grad = [n](const Vec&) { return Vec(n); };
  auto hess = [n](const Vec&) { return Mat(n, n); };
  return make_graph(SurfaceKind::plane, phi, grad, hess);
}

ReceiverSurface make_tilted_plane(const Vec& m, double c) {
  auto phi = [m, c](const Vec& z) { return dot(m, z) + c; };
  auto grad = [m](const Vec&) { return m; };
  int n = m.size();
  auto hess = [n](const Vec&) { return Mat(n, n); };
  return make_graph(SurfaceKind::tilted_plane, phi, grad, hess);
}

ReceiverSurface make_quadratic_graph(double c, const Mat& k) {
  auto phi = [c, k](const Vec& z) { return c - 0.5 * dot(z, k * z); };
  auto grad = [k](const Vec& z) { return -(k * z); };
  auto hess = [k](const Vec&) { return -1.0 * k; };
  return make_graph(SurfaceKind::graph_quadratic, phi, grad, hess);
}

ReceiverSurface make_custom_graph(ReceiverSurface::ScalarFn phi, ReceiverSurface::VecFn grad_phi,
                                  ReceiverSurface::MatFn hess_phi) {
  return make_graph(SurfaceKind::graph_custom, std::move(phi), std::move(grad_phi), std::move(hess_phi));
}

ReceiverSurface make_implicit_surface(ReceiverSurface::ScalarFn psi, ReceiverSurface::VecFn grad_psi,
                                      ReceiverSurface::MatFn hess_psi) {
  return ReceiverSurface(SurfaceKind::graph_custom, std::move(psi), std::move(grad_psi),
                         std::move(hess_psi));
}

ReceiverSurface make_rotated(const ReceiverSurface& s, const Mat& r) {
  Mat rt = r.transposed();
  auto psi = [s, rt](const Vec& z) { return s.psi(rt * z); };
  auto grad = [s, r, rt](const Vec& z) { return r * s.grad_psi(rt * z); };
  auto hess = [s, r, rt](const Vec& z) { return r * s.hess_psi(rt * z) * rt; };
  return ReceiverSurface(SurfaceKind::graph_custom, std::move(psi), std::move(grad), std::move(hess));
}

RayHit intersect_ray(const ReceiverSurface& s, const Vec& origin, const Vec& y,
                     const IntersectOptions& opts) {
  double scale = std::max(1.0, norm(origin));
  double t_max = opts.t_max_scale * scale;

  auto f = [&](double t) { return s.psi(origin + t * y); };

  // Bracket the first sign change on a geometric grid.
  double t_lo = std::max(opts.t_min, 0.0);
  double f_lo = f(t_lo);
  double t_hi = 0.0;
  bool bracketed = false;
  double step = 1e-4 * scale;
  double t_prev = t_lo, f_prev = f_lo;
  while (t_prev < t_max) {
    double t_next = std::min(t_prev + step, t_max);
    double f_next = f(t_next);
    if (f_next == 0.0) {
      Vec z = origin + t_next * y;
      if (dot(s.grad_psi(z), y) <= 0.0) throw VisibilityError("intersect_ray: grad psi . Y <= 0 at root");
      return {t_next, z};
    }
    if ((f_prev < 0.0) != (f_next < 0.0)) {
      t_lo = t_prev;
      f_lo = f_prev;
      t_hi = t_next;
      bracketed = true;
      break;
    }
    t_prev = t_next;
    f_prev = f_next;
    step *= 1.6;
    if (t_prev >= t_max) break;
  }
  if (!bracketed) throw NoIntersectionError("intersect_ray: no sign change of psi in (0, t_max]");

  // Safeguarded Newton within the bracket, polished to machine precision so
  // that finite differences of traced quantities are not limited by the
  // root tolerance.
  double t = 0.5 * (t_lo + t_hi);
  for (int it = 0; it < opts.max_newton; ++it) {
    Vec z = origin + t * y;
    double ft = s.psi(z);
    if (ft == 0.0) break;
    double dft = dot(s.grad_psi(z), y);
    if ((ft < 0.0) == (f_lo < 0.0)) {
      t_lo = t;
    } else {
      t_hi = t;
    }
    double t_newton = (dft != 0.0) ? t - ft / dft : t;
    if (t_newton <= std::min(t_lo, t_hi) || t_newton >= std::max(t_lo, t_hi)) {
      t_newton = 0.5 * (t_lo + t_hi);
    }
    if (std::abs(t_newton - t) <= 1e-16 * std::max(1.0, std::abs(t))) {
      t = t_newton;
      break;
    }
    t = t_newton;
    if (std::abs(t_hi - t_lo) < 1e-16 * scale) break;
  }
  if (std::abs(s.psi(origin + t * y)) > opts.psi_tol * scale * std::max(1.0, norm(s.grad_psi(origin + t * y))))
    throw NoIntersectionError("intersect_ray: Newton failed to meet the psi tolerance");

  Vec z = origin + t * y;
  if (dot(s.grad_psi(z), y) <= 0.0) throw VisibilityError("intersect_ray: grad psi . Y <= 0 at root");
  return {t, z};
}

double measure_weight(const ReceiverSurface& s, const Vec& z) {
  Vec g = s.grad_psi(z);
  double vertical = g[z.size() - 1];
  if (vertical <= 0.0) throw DomainError("measure_weight: psi^{n+1} <= 0 (H2)");
  return norm(g) / vertical;
}

std::vector<Vec> orthonormal_frame(const Vec& y) {
  int dim = y.size();
  // Skip the axis most aligned with y, then Gram-Schmidt the rest in order.
  int skip = 0;
  for (int k = 1; k < dim; ++k)
    if (std::abs(y[k]) > std::abs(y[skip])) skip = k;
  std::vector<Vec> frame;
  for (int k = 0; k < dim; ++k) {
    if (k == skip) continue;
    Vec u = basis_vector(dim, k) - dot(basis_vector(dim, k), y) * y;
    for (const Vec& f : frame) u -= dot(u, f) * f;
    double nu = norm(u);
    if (nu < 1e-12) throw DomainError("orthonormal_frame: degenerate direction");
    frame.push_back((1.0 / nu) * u);
  }
  return frame;
}

Mat second_fundamental_form(const ReceiverSurface& s, const Vec& z, const Vec& y,
                            const std::vector<Vec>& frame) {
  int n = static_cast<int>(frame.size());
  for (int i = 0; i < n; ++i) {
    if (std::abs(dot(frame[static_cast<std::size_t>(i)], y)) > 1e-10)
      throw DomainError("second_fundamental_form: frame not orthogonal to Y");
    for (int j = 0; j < n; ++j) {
      double expect = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot(frame[static_cast<std::size_t>(i)], frame[static_cast<std::size_t>(j)]) - expect) > 1e-10)
        throw DomainError("second_fundamental_form: frame not orthonormal");
    }
  }
  Vec g = s.grad_psi(z);
  double gy = dot(g, y);
  if (gy <= 0.0) throw VisibilityError("second_fundamental_form: Y tangent to Sigma or wrong side");

  // Graph over the frame plane: phihat_i = -(grad psi . u_i)/(grad psi . Y),
  // phihat_ij = -Hess(psi)(v_i, v_j)/(grad psi . Y) with v_i = u_i + phihat_i Y.
  Mat h = s.hess_psi(z);
  Vec slope(n);
  std::vector<Vec> tangents;
  for (int i = 0; i < n; ++i) {
    slope[i] = -dot(g, frame[static_cast<std::size_t>(i)]) / gy;
    tangents.push_back(frame[static_cast<std::size_t>(i)] + slope[i] * y);
  }
  Mat phihat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      phihat(i, j) = -dot(tangents[static_cast<std::size_t>(i)], h * tangents[static_cast<std::size_t>(j)]) / gy;
  return (1.0 / std::sqrt(1.0 + dot(slope, slope))) * phihat;
}

double rotated_graph_hessian_form(const ReceiverSurface& s, const Vec& z, const Vec& y, const Vec& w) {
  Vec g = s.grad_psi(z);
  double gy = dot(g, y);
  if (gy <= 0.0) throw VisibilityError("rotated_graph_hessian_form: grad psi . Y <= 0");
  Vec v = w - (dot(g, w) / gy) * y;  // tangent lift of the projection of w
  return -dot(v, s.hess_psi(z) * v) / gy;
}

}  // namespace refract
