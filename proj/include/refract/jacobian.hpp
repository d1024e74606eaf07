#pragma once

#include "refract/receiver.hpp"
#include "refract/refraction.hpp"

namespace refract {

/// Receiver data at the traced point, shared by several assembly steps.
struct TraceState {
  Vec x_dir;      // X, length n+1
  Vec y_dir;      // Y, length n+1
  Vec z;          // Z = rho X + t Y
  double t = 0.0; // stretch
  Vec grad_psi;   // at Z
  Mat hess_psi;   // at Z
  double psi_vertical = 0.0;  // psi^{n+1}
  double dpsi_y = 0.0;        // grad psi . Y
  ScalarCoeffs cf;
};

/// Refract at the jet and intersect the receiver; validates H1-H3 at the
/// traced point.
TraceState trace_jet(const RadialJet& jet, const ReceiverSurface& surface, const MediaPair& media,
                     const IntersectOptions& opts = {});

struct MuMatrices {
  Mat mu0, mu1, mu2;
  Mat mu2_inv;
  double det_mu2 = 0.0;          // closed form psi^{n+1} / (y_{n+1} (grad psi . Y))
};

/// mu_1, mu_2 and the Hessian-free mu_0 = mu_2^{-1} mu_1.
MuMatrices build_mu(const RadialJet& jet, const TraceState& st);

/// Dy = sigma Id + [alpha(grad - (rho+s)x) - 2bx] (x) grad + M D^2 rho.
Mat build_Dy(const RadialJet& jet, const MediaPair& media);

/// nabla t from the implicit identity psi(X rho + t Y) = 0.
Vec grad_stretch(const RadialJet& jet, const Mat& dy, const TraceState& st);

struct MMatrices {
  Mat m;
  Mat m_inv;
  double det_closed = 0.0;  // (1 + (b/q) W) b^n (1 - |x|^2)
  double invert_margin = 0.0;  // |1 + (b/q) W|
};

/// M = b(Id - x(x)x) + beta [grad - (rho+s)x] (x) [grad - s x], with the
/// rank-one closed forms for det M and M^{-1}. Throws SingularMatrixError
/// when the invertibility margin drops below 1e-10.
MMatrices build_M(const RadialJet& jet, const MediaPair& media);

struct ABMatrices {
  Mat a_def, b_def;    // definition route: b M^{-1} mu0 and b M^{-1}{...}
  Mat a_simpl, b_simpl;  // simplified closed forms
};

ABMatrices build_AB(const RadialJet& jet, const TraceState& st, const MMatrices& mm,
                    const MediaPair& media);

/// A and B at x = 0: A = rho Id - ((kappa^2-1)/rho) grad (x) grad,
/// B = (kappa - b rho) Id - (2b/rho) grad (x) grad.
std::pair<Mat, Mat> AB_at_origin(const RadialJet& jet, const MediaPair& media);

struct JacobianBundle {
  TraceState st;
  MuMatrices mu;
  Mat dy;
  Vec grad_t;
  MMatrices mm;
  ABMatrices ab;
  Mat dz;            // mu1 + t mu2 Dy
  Mat dz_alt;        // mu2 (mu0 + t Dy)
  Mat dz_direct;     // rho Id + x (x) grad + y (x) grad_t + t Dy
  double det_dz = 0.0;
  double det_dz_factored = 0.0;  // via det mu2 closed form and the M-factored determinant
};

JacobianBundle assemble_bundle(const RadialJet& jet, const ReceiverSurface& surface,
                               const MediaPair& media, const IntersectOptions& opts = {});

struct MaResidual {
  double lhs = 0.0;       // det M det(D^2 rho + A/(bt) + B/b)
  double rhs = 0.0;       // (f/g) (y_{n+1}/x_{n+1}) ((grad psi . Y)/|grad psi|) t^{-n}
  double raw = 0.0;       // lhs - rhs
  double relative = 0.0;  // raw / rhs
};

/// Pointwise Monge-Ampere residual of the prescribed-Jacobian equation.
MaResidual ma_residual(const RadialJet& jet, const ReceiverSurface& surface, const MediaPair& media,
                       double f_val, double g_val);

/// Same residual assembled from the explicit x = 0 matrices; only valid at
/// x = 0 (throws DomainError otherwise).
MaResidual ma_residual_at_origin(const RadialJet& jet, const ReceiverSurface& surface,
                                 const MediaPair& media, double f_val, double g_val);

}  // namespace refract
