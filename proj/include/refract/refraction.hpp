#pragma once

#include "refract/linalg.hpp"

namespace refract {

/// Refractive indices of the source and target media. kappa = n1/n2; the
/// kappa < 1 regime is the one with supporting ovaloids from below.
struct MediaPair {
  double n1 = 1.0;
  double n2 = 1.5;
  double kappa() const { return n1 / n2; }
};

/// Validates n1, n2 > 0 and |kappa - 1| >= 1e-3 (every downstream formula
/// divides by kappa^2 - 1 or kappa*rho + q).
MediaPair make_media(double n1, double n2);

/// Second-order data of the radial function at a chart point.
struct RadialJet {
  Vec x;       // chart point, |x| < 1
  double rho = 1.0;
  Vec grad;    // nabla rho
  Mat hess;    // D^2 rho, symmetric
};

/// Checks the RadialJet invariants; for kappa > 1 additionally the bound
/// |nabla rho|^2 <= rho^2/(kappa^2-1) that keeps q real.
void validate_jet(const RadialJet& jet, const MediaPair& media);

/// The notation-list scalars at a point.
struct ScalarCoeffs {
  double a = 0.0;      // rho^2 + |nabla rho|^2 - (nabla rho . x)^2
  double q = 0.0;      // sqrt(a - kappa^2 (a - rho^2))
  double b = 0.0;      // (kappa rho - q)/a = (kappa^2-1)/(kappa rho + q)
  double alpha = 0.0;
  double beta = 0.0;
  double Q = 0.0;
  double sigma = 0.0;  // kappa - b (rho + x . nabla rho)
  double gamma = 0.0;
  double F = 0.0;
};

ScalarCoeffs scalar_coeffs(const RadialJet& jet, const MediaPair& media);

/// Residuals of the internal identities b(kappa rho + q) = kappa^2 - 1,
/// Q rho (kappa q + rho - (kappa^2-1) x.grad) = kappa^2 - 1 and
/// gamma = Q (q - kappa x.grad), for double-entry testing and the verify
/// command.
struct CoeffIdentityResiduals {
  double b_identity = 0.0;
  double q_identity = 0.0;  // Q via the alternate closed form
  double gamma_identity = 0.0;
};
CoeffIdentityResiduals coeff_identity_residuals(const ScalarCoeffs& c, const RadialJet& jet,
                                                const MediaPair& media);

/// Outward unit normal toward the target medium at rho(x) X:
/// nu = -[(grad rho, 0) - X (rho + grad rho . x)] / sqrt(a).
Vec refractor_normal(const RadialJet& jet);

/// Vector Snell law: returns unit Y with X - (n2/n1) Y parallel to nu.
/// Requires X . nu > 0; for kappa > 1 throws TotalInternalReflectionError
/// when the discriminant 1 - kappa^2 (1 - (X.nu)^2) is negative.
Vec snell(const Vec& x_dir, const Vec& nu, const MediaPair& media);

struct RefractionResult {
  Vec y_dir;  // unit refracted direction, length n+1
  ScalarCoeffs coeffs;
};

/// Closed-form refracted direction Y = kappa X + b((grad rho,0) - X(rho + x.grad rho))
/// together with the scalar coefficient field.
RefractionResult refracted_direction(const RadialJet& jet, const MediaPair& media);

/// nabla b = alpha grad rho + beta D^2 rho (grad rho - (x . grad rho) x).
Vec grad_b(const RadialJet& jet, const MediaPair& media);

/// Cartesian oval O(P,b): |M| + (1/kappa)|M - P| = b, refracting lower part.
struct OvalSpec {
  Vec p;          // target focus, length n+1
  double b = 0.0; // optical path constant, |P| < b < |P|/kappa
  double kappa = 0.5;
  double tau = 0.05;  // visibility margin in (0, 1-kappa)
};

OvalSpec make_oval(const Vec& p, double b, const MediaPair& media, double tau);

/// Left-hand side minus right-hand side of the refracting-cap inequality
/// X.P >= kappa^2 (b + sqrt((1/kappa^2-1)(|P|^2/kappa^2 - b^2)));
/// admissible when >= 0 (evaluated with 1e-12 slack toward rejection).
double oval_cap_margin(const Vec& x_dir, const OvalSpec& oval);
bool oval_admissible(const Vec& x_dir, const OvalSpec& oval);

/// Radial function h(X, P, b) of the lower oval. Throws CapError outside the
/// refracting cap or when the discriminant is negative.
double oval_radial(const Vec& x_dir, const OvalSpec& oval);

/// Chart jet of the single-oval radial graph rho(x) = h(X(x), P, b), with
/// derivatives taken by central finite differences of h (4th order); the
/// closed forms under test never feed this.
RadialJet oval_jet(const Vec& x_chart, const OvalSpec& oval, double rel_step = 1e-6);

/// Traces the ray refracted by the oval's radial graph at X and returns the
/// angular deviation (radians) from the exact focus direction (P - rX)/|P - rX|.
double oval_refraction_check(const Vec& x_dir, const OvalSpec& oval, const MediaPair& media);

}  // namespace refract
