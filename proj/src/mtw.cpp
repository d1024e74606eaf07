#include "refract/mtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "refract/rng.hpp"

namespace refract {

namespace {

double q_of(double v, const Vec& p, double kappa) {
  double q2 = v * v + (1.0 - kappa * kappa) * dot(p, p);
  if (q2 <= 0.0) throw DomainError("mtw: q^2 <= 0 (kappa > 1 bound violated)");
  return std::sqrt(q2);
}

}  // namespace

Vec mtw_direction(double v, const Vec& p, double kappa) {
  int n = p.size();
  double q = q_of(v, p, kappa);
  double b = (kappa * kappa - 1.0) / (kappa * v + q);
  Vec y(n + 1);
  for (int i = 0; i < n; ++i) y[i] = b * p[i];
  y[n] = kappa - b * v;
  return y;
}

MTWPoint make_mtw_point(double v, const Vec& p, const MediaPair& media,
                        const ReceiverSurface& surface) {
  if (v <= 0.0) throw DomainError("mtw: v <= 0");
  int n = p.size();
  MTWPoint pt;
  pt.v = v;
  pt.p = p;
  pt.kappa = media.kappa();
  pt.y_dir = mtw_direction(v, p, pt.kappa);
  if (pt.y_dir[n] <= 0.0) throw VisibilityError("mtw: y_{n+1} <= 0 (H1)");

  Vec origin = Vec(n).appended(v);  // v e_{n+1}
  RayHit hit = intersect_ray(surface, origin, pt.y_dir);
  pt.t = hit.t;
  pt.z = hit.z;
  pt.grad_psi = surface.grad_psi(pt.z);
  pt.hess_psi = surface.hess_psi(pt.z);
  pt.psi_vertical = pt.grad_psi[n];
  pt.dpsi_y = dot(pt.grad_psi, pt.y_dir);
  if (pt.psi_vertical <= 0.0) throw VisibilityError("mtw: psi^{n+1} <= 0 (H2)");
  if (pt.dpsi_y <= 0.0) throw VisibilityError("mtw: grad psi . Y <= 0 (H3)");
  return pt;
}

Mat q_hessian(double v, const Vec& p, double kappa) {
  int n = p.size();
  double q = q_of(v, p, kappa);
  double c = 1.0 - kappa * kappa;
  return (c / q) * Mat::identity(n) - (c * c / (q * q * q)) * outer(p, p);
}

std::pair<Mat, Mat> I_II_matrices(const MTWPoint& pt) {
  int n = pt.p.size();
  double kappa = pt.kappa;
  double v = pt.v;
  double q = q_of(v, pt.p, kappa);
  double b = (kappa * kappa - 1.0) / (kappa * v + q);
  Mat pp = outer(pt.p, pt.p);
  Mat i_mat = (1.0 / (b * pt.t)) * (v * Mat::identity(n) - ((kappa * kappa - 1.0) / v) * pp);
  Mat ii_mat = ((kappa - b * v) / b) * Mat::identity(n) - (2.0 / v) * pp;
  return {i_mat, ii_mat};
}

double H_form(const MTWPoint& pt, const Vec& xi, const Vec& eta) {
  if (std::abs(dot(xi, eta)) > 1e-12) throw DomainError("H_form: xi and eta must be orthogonal");
  int n = pt.p.size();
  double kappa = pt.kappa;
  double k2m1 = kappa * kappa - 1.0;
  double v = pt.v;
  double q = q_of(v, pt.p, kappa);
  double xi2 = dot(xi, xi);
  double pxi = dot(pt.p, xi);
  double peta = dot(pt.p, eta);

  // curvature term on the plane orthogonal to Y
  Vec x_dir = Vec(n).appended(1.0);  // X is e_{n+1} at the x = 0 chart
  Vec x0 = x_dir - dot(x_dir, pt.y_dir) * pt.y_dir;
  Vec eta_amb = eta.appended(0.0);
  Vec eta0 = eta_amb - dot(eta_amb, pt.y_dir) * pt.y_dir;
  Vec w = (kappa * peta / q) * x0 - eta0;
  Vec tangent = w - (dot(pt.grad_psi, w) / pt.dpsi_y) * pt.y_dir;
  double phihat_ww = -dot(tangent, pt.hess_psi * tangent) / pt.dpsi_y;

  double first = (v * xi2 / (1.0 - kappa * kappa) + pxi * pxi / v) *
                 ((1.0 - kappa * kappa) * (1.0 - kappa * kappa) / (kappa * v + q)) * phihat_ww;

  double q_etaeta = dot(eta, q_hessian(v, pt.p, kappa) * eta);
  double second = ((kappa * pt.psi_vertical / (pt.t * pt.dpsi_y)) * (v * xi2 / k2m1 - pxi * pxi / v) +
                   kappa * xi2 / k2m1) *
                  q_etaeta;
  return first + second;
}

namespace {

double traced_t(double v, const Vec& p, const MediaPair& media, const ReceiverSurface& surface) {
  int n = p.size();
  Vec y = mtw_direction(v, p, media.kappa());
  if (y[n] <= 0.0) throw VisibilityError("mtw trace: y_{n+1} <= 0");
  return intersect_ray(surface, Vec(n).appended(v), y).t;
}

}  // namespace

double H_form_expanded(const MTWPoint& pt, const Vec& xi, const Vec& eta, const MediaPair& media,
                       const ReceiverSurface& surface, const FDSpec& spec) {
  if (std::abs(dot(xi, eta)) > 1e-12)
    throw DomainError("H_form_expanded: xi and eta must be orthogonal");
  double kappa = pt.kappa;
  double k2m1 = kappa * kappa - 1.0;
  double v = pt.v;
  double q = q_of(v, pt.p, kappa);
  double xi2 = dot(xi, xi);
  double pxi = dot(pt.p, xi);

  auto inv_t = [&](const Vec& pp) { return 1.0 / traced_t(v, pp, media, surface); };
  double invt0 = inv_t(pt.p);
  double invt_eta = fd_derivative(
      [&](double s) { return inv_t(pt.p + s * eta); }, spec);
  double invt_etaeta = fd_second_directional(inv_t, pt.p, eta, spec);

  double q_eta = (1.0 - kappa * kappa) * dot(pt.p, eta) / q;
  double q_etaeta = dot(eta, q_hessian(v, pt.p, kappa) * eta);

  double factor1 = v * xi2 / k2m1 - pxi * pxi / v;
  return factor1 * ((kappa * v + q) * invt_etaeta + 2.0 * q_eta * invt_eta + q_etaeta * invt0) +
         (kappa * xi2 / k2m1) * q_etaeta;
}

double second_derivatives_of_I_II(const MTWPoint& pt, const Vec& xi, const Vec& eta,
                                  const MediaPair& media, const ReceiverSurface& surface,
                                  const FDSpec& spec) {
  if (std::abs(dot(xi, eta)) > 1e-12)
    throw DomainError("second_derivatives_of_I_II: xi and eta must be orthogonal");
  double v = pt.v;
  auto phi = [&](const Vec& pp) {
    MTWPoint local;
    local.v = v;
    local.p = pp;
    local.kappa = pt.kappa;
    local.t = traced_t(v, pp, media, surface);
    auto [i_mat, ii_mat] = I_II_matrices(local);
    return dot(xi, (i_mat + ii_mat) * xi);
  };
  return fd_second_directional(phi, pt.p, eta, spec);
}

MTWReport certify_A3(const MediaPair& media, const ReceiverSurface& surface,
                     const MTWSamplingSpec& spec) {
  if (spec.n_v < 1 || spec.n_pmag < 1 || spec.n_pdir < 1 || spec.n_xi < 1)
    throw ConfigError("certify_A3: empty sampling spec");
  double kappa = media.kappa();
  Rng rng(spec.seed);

  MTWReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.max_value = -std::numeric_limits<double>::infinity();
  rep.samples.reserve(static_cast<std::size_t>(spec.n_v) * static_cast<std::size_t>(spec.n_pmag) *
                      static_cast<std::size_t>(spec.n_pdir) * static_cast<std::size_t>(spec.n_xi));

  for (int iv = 0; iv < spec.n_v; ++iv) {
    double v = spec.v_min + (iv + rng.uniform()) / spec.n_v * (spec.v_max - spec.v_min);
    double p_cap = spec.p_max;
    if (kappa > 1.0)
      p_cap = std::min(spec.p_max, std::sqrt(0.9) * v / std::sqrt(kappa * kappa - 1.0));
    for (int im = 0; im < spec.n_pmag; ++im) {
      double pmag = (im + rng.uniform()) / spec.n_pmag * p_cap;
      for (int id = 0; id < spec.n_pdir; ++id) {
        double th = 2.0 * M_PI * (id + rng.uniform()) / spec.n_pdir;
        Vec p{pmag * std::cos(th), pmag * std::sin(th)};
        MTWPoint pt = make_mtw_point(v, p, media, surface);
        for (int ix = 0; ix < spec.n_xi; ++ix) {
          double txi = M_PI * (ix + rng.uniform()) / spec.n_xi;
          Vec xi{std::cos(txi), std::sin(txi)};
          double sgn = (rng.uniform() < 0.5) ? -1.0 : 1.0;
          Vec eta{-sgn * xi[1], sgn * xi[0]};
          double value = H_form(pt, xi, eta);
          MTWSample sample{v, pmag, value};
          rep.samples.push_back(sample);
          if (value < rep.min_value) {
            rep.min_value = value;
            if (kappa > 1.0) rep.witness = sample;
          }
          if (value > rep.max_value) {
            rep.max_value = value;
            if (kappa < 1.0) rep.witness = sample;
          }
        }
      }
    }
  }

  if (kappa < 1.0 && rep.max_value < 0.0) {
    rep.verdict = MTWVerdict::negative_definite;
    rep.c0 = 0.9 * (-rep.max_value);
  } else if (kappa > 1.0 && rep.min_value > 0.0) {
    rep.verdict = MTWVerdict::positive_definite_regime;
    rep.c0 = 0.9 * rep.min_value;
  } else {
    rep.verdict = MTWVerdict::indefinite;
    rep.c0 = 0.0;
  }
  return rep;
}

}  // namespace refract
