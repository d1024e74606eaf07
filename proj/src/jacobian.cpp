#include "refract/jacobian.hpp"

#include <cmath>

namespace refract {

TraceState trace_jet(const RadialJet& jet, const ReceiverSurface& surface, const MediaPair& media,
                     const IntersectOptions& opts) {
  validate_jet(jet, media);
  RefractionResult rr = refracted_direction(jet, media);
  int n = jet.x.size();

  TraceState st;
  st.x_dir = lift(jet.x);
  st.y_dir = rr.y_dir;
  st.cf = rr.coeffs;
  if (st.y_dir[n] <= 0.0) throw VisibilityError("trace_jet: y_{n+1} <= 0 (H1)");

  Vec origin = jet.rho * st.x_dir;
  RayHit hit = intersect_ray(surface, origin, st.y_dir, opts);
  st.t = hit.t;
  st.z = hit.z;
  st.grad_psi = surface.grad_psi(st.z);
  st.hess_psi = surface.hess_psi(st.z);
  st.psi_vertical = st.grad_psi[n];
  st.dpsi_y = dot(st.grad_psi, st.y_dir);
  if (st.psi_vertical <= 0.0) throw VisibilityError("trace_jet: psi^{n+1} <= 0 at Z (H2)");
  if (st.dpsi_y <= 0.0) throw VisibilityError("trace_jet: grad psi . Y <= 0 at Z (H3)");
  return st;
}

MuMatrices build_mu(const RadialJet& jet, const TraceState& st) {
  int n = jet.x.size();
  double rho = jet.rho;
  double xn1 = st.x_dir[n];
  double yn1 = st.y_dir[n];
  Vec y = st.y_dir.head(n);
  Vec gpsi_hat = st.grad_psi.head(n);
  double dpsi_x = dot(st.grad_psi, st.x_dir);
  double xy = dot(st.x_dir, st.y_dir);

  MuMatrices m;
  Mat id = Mat::identity(n);

  m.mu1 = rho * id + outer(jet.x, jet.grad) -
          (1.0 / st.dpsi_y) *
              (rho * outer(y, gpsi_hat) - (rho * st.psi_vertical / xn1) * outer(y, jet.x) +
               dpsi_x * outer(y, jet.grad));

  m.mu2 = id - (1.0 / st.dpsi_y) * outer(y, gpsi_hat - (st.psi_vertical / yn1) * y);

  // mu2^{-1} mu1 in closed form. The x-term carries the ratio y_{n+1}/x_{n+1}
  // (= sigma for refraction-generated Y), under which the whole bracket
  // collapses to -kappa grad rho; the spelled-out form below holds for any
  // unit Y with positive last component.
  m.mu0 = rho * id + outer(jet.x, jet.grad) +
          outer(y, (rho * yn1 / xn1) * jet.x - rho * y - xy * jet.grad);

  m.mu2_inv = id + outer(y, (yn1 / st.psi_vertical) * gpsi_hat - y);

  m.det_mu2 = st.psi_vertical / (yn1 * st.dpsi_y);
  return m;
}

Mat build_Dy(const RadialJet& jet, const MediaPair& media) {
  ScalarCoeffs c = scalar_coeffs(jet, media);
  int n = jet.x.size();
  double s = dot(jet.x, jet.grad);
  Vec u = jet.grad - (jet.rho + s) * jet.x;

  Mat m = c.b * (Mat::identity(n) - outer(jet.x, jet.x)) + c.beta * outer(u, jet.grad - s * jet.x);
  return c.sigma * Mat::identity(n) + outer(c.alpha * u - (2.0 * c.b) * jet.x, jet.grad) +
         m * jet.hess;
}

Vec grad_stretch(const RadialJet& jet, const Mat& dy, const TraceState& st) {
  int n = jet.x.size();
  double rho = jet.rho;
  double xn1 = st.x_dir[n];
  double yn1 = st.y_dir[n];
  Vec y = st.y_dir.head(n);
  Vec gpsi_hat = st.grad_psi.head(n);
  double dpsi_x = dot(st.grad_psi, st.x_dir);

  Vec w = gpsi_hat - (st.psi_vertical / yn1) * y;
  return (-1.0 / st.dpsi_y) * (rho * gpsi_hat - (rho * st.psi_vertical / xn1) * jet.x +
                               dpsi_x * jet.grad + st.t * (dy.transposed() * w));
}

MMatrices build_M(const RadialJet& jet, const MediaPair& media) {
  ScalarCoeffs c = scalar_coeffs(jet, media);
  int n = jet.x.size();
  double s = dot(jet.x, jet.grad);
  double x2 = dot(jet.x, jet.x);
  double xn1sq = 1.0 - x2;

  Vec xi = c.beta * (jet.grad - (jet.rho + s) * jet.x);
  Vec eta = jet.grad - s * jet.x;

  MMatrices mm;
  mm.m = c.b * (Mat::identity(n) - outer(jet.x, jet.x)) + outer(xi, eta);

  double w = dot(jet.grad, jet.grad) - s * (jet.rho + s);
  double margin = 1.0 + (c.b / c.q) * w;
  mm.invert_margin = std::abs(margin);
  mm.det_closed = margin * std::pow(c.b, n) * xn1sq;
  if (mm.invert_margin < 1e-10)
    throw SingularMatrixError("build_M: rank-one margin |1 + (b/q)W| below 1e-10");

  mm.m_inv = (1.0 / c.b) * (Mat::identity(n) + (1.0 / xn1sq) * outer(jet.x, jet.x) -
                            c.Q * outer(jet.grad - (jet.rho / xn1sq) * jet.x, jet.grad));
  return mm;
}

ABMatrices build_AB(const RadialJet& jet, const TraceState& st, const MMatrices& mm,
                    const MediaPair& media) {
  const ScalarCoeffs& c = st.cf;
  double kappa = media.kappa();
  int n = jet.x.size();
  double rho = jet.rho;
  double s = dot(jet.x, jet.grad);
  double xn1sq = 1.0 - dot(jet.x, jet.x);
  Mat id = Mat::identity(n);
  Vec y = st.y_dir.head(n);

  ABMatrices ab;

  // mu0 with the Y-closed-form substituted: rho Id + (x - kappa y) (x) grad
  Mat mu0 = rho * id + outer(jet.x - kappa * y, jet.grad);
  ab.a_def = c.b * (mm.m_inv * mu0);

  Mat inner = c.sigma * id +
              outer(c.alpha * (jet.grad - (rho + s) * jet.x) - (2.0 * c.b) * jet.x, jet.grad);
  ab.b_def = c.b * (mm.m_inv * inner);

  // A = rho (Id + x(x)x / x_{n+1}^2) + (A_x x + A_g grad) (x) grad, whose
  // x (x) grad coefficient A_x vanishes at x = 0 by the Q identity
  double w1 = rho + s - kappa * dot(jet.grad, y);
  double a_x = (1.0 - kappa * dot(jet.x, y) + c.Q * rho * w1) / xn1sq - kappa * kappa +
               kappa * c.b * (rho + s);
  double a_g = -kappa * c.b - c.Q * w1;
  ab.a_simpl = rho * (id + (1.0 / xn1sq) * outer(jet.x, jet.x)) +
               outer(a_x * jet.x + a_g * jet.grad, jet.grad);

  ab.b_simpl = c.sigma * (id + (1.0 / xn1sq) * outer(jet.x, jet.x)) +
               ((c.Q * rho * c.F - c.alpha * rho - 2.0 * c.b) / xn1sq) * outer(jet.x, jet.grad) +
               (c.alpha - c.Q * c.F) * outer(jet.grad, jet.grad);
  return ab;
}

std::pair<Mat, Mat> AB_at_origin(const RadialJet& jet, const MediaPair& media) {
  ScalarCoeffs c = scalar_coeffs(jet, media);
  double kappa = media.kappa();
  int n = jet.x.size();
  double k2m1 = kappa * kappa - 1.0;
  Mat a0 = jet.rho * Mat::identity(n) - (k2m1 / jet.rho) * outer(jet.grad, jet.grad);
  Mat b0 = (kappa - c.b * jet.rho) * Mat::identity(n) -
           (2.0 * c.b / jet.rho) * outer(jet.grad, jet.grad);
  return {a0, b0};
}

JacobianBundle assemble_bundle(const RadialJet& jet, const ReceiverSurface& surface,
                               const MediaPair& media, const IntersectOptions& opts) {
  JacobianBundle bd;
  bd.st = trace_jet(jet, surface, media, opts);
  bd.mu = build_mu(jet, bd.st);
  bd.dy = build_Dy(jet, media);
  bd.grad_t = grad_stretch(jet, bd.dy, bd.st);
  bd.mm = build_M(jet, media);
  bd.ab = build_AB(jet, bd.st, bd.mm, media);

  int n = jet.x.size();
  Vec y = bd.st.y_dir.head(n);
  bd.dz = bd.mu.mu1 + bd.st.t * (bd.mu.mu2 * bd.dy);
  bd.dz_alt = bd.mu.mu2 * (bd.mu.mu0 + bd.st.t * bd.dy);
  bd.dz_direct =
      jet.rho * Mat::identity(n) + outer(jet.x, jet.grad) + outer(y, bd.grad_t) + bd.st.t * bd.dy;
  bd.det_dz = det(bd.dz);
  bd.det_dz_factored = bd.mu.det_mu2 * det(bd.mu.mu0 + bd.st.t * bd.dy);
  return bd;
}

namespace {

MaResidual residual_from_parts(const Mat& m, const Mat& arg, const TraceState& st, int n,
                               double f_val, double g_val) {
  MaResidual r;
  r.lhs = det(m) * det(arg);
  double gnorm = norm(st.grad_psi);
  r.rhs = (f_val / g_val) * (st.y_dir[n] / st.x_dir[n]) * (st.dpsi_y / gnorm) /
          std::pow(st.t, n);
  r.raw = r.lhs - r.rhs;
  r.relative = r.raw / r.rhs;
  return r;
}

}  // namespace

MaResidual ma_residual(const RadialJet& jet, const ReceiverSurface& surface, const MediaPair& media,
                       double f_val, double g_val) {
  if (f_val <= 0.0 || g_val <= 0.0) throw DomainError("ma_residual: f, g must be positive");
  TraceState st = trace_jet(jet, surface, media);
  MMatrices mm = build_M(jet, media);
  ABMatrices ab = build_AB(jet, st, mm, media);
  const ScalarCoeffs& c = st.cf;
  Mat arg = jet.hess + (1.0 / (c.b * st.t)) * ab.a_simpl + (1.0 / c.b) * ab.b_simpl;
  return residual_from_parts(mm.m, arg, st, jet.x.size(), f_val, g_val);
}

MaResidual ma_residual_at_origin(const RadialJet& jet, const ReceiverSurface& surface,
                                 const MediaPair& media, double f_val, double g_val) {
  if (norm(jet.x) > 1e-14) throw DomainError("ma_residual_at_origin: x != 0");
  if (f_val <= 0.0 || g_val <= 0.0) throw DomainError("ma_residual: f, g must be positive");
  TraceState st = trace_jet(jet, surface, media);
  MMatrices mm = build_M(jet, media);
  auto [a0, b0] = AB_at_origin(jet, media);
  const ScalarCoeffs& c = st.cf;
  Mat arg = jet.hess + (1.0 / (c.b * st.t)) * a0 + (1.0 / c.b) * b0;
  return residual_from_parts(mm.m, arg, st, jet.x.size(), f_val, g_val);
}

}  // namespace refract
