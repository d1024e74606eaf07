#include "refract/refraction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace refract {

MediaPair make_media(double n1, double n2) {
  if (n1 <= 0.0 || n2 <= 0.0) throw ConfigError("media: refractive indices must be positive");
  MediaPair m{n1, n2};
  if (std::abs(m.kappa() - 1.0) < 1e-3) throw ConfigError("media: |kappa - 1| >= 1e-3 required");
  return m;
}

void validate_jet(const RadialJet& jet, const MediaPair& media) {
  if (dot(jet.x, jet.x) >= 1.0) throw DomainError("jet: |x| >= 1");
  if (jet.rho <= 0.0) throw DomainError("jet: rho <= 0");
  if (jet.grad.size() != jet.x.size()) throw DomainError("jet: gradient size mismatch");
  if (!jet.hess.is_symmetric(1e-12)) throw DomainError("jet: Hessian not symmetric");
  double kappa = media.kappa();
  if (kappa > 1.0) {
    double bound = jet.rho * jet.rho / (kappa * kappa - 1.0);
    if (dot(jet.grad, jet.grad) > bound)
      throw DomainError("jet: |grad rho|^2 > rho^2/(kappa^2-1) for kappa > 1");
  }
}

ScalarCoeffs scalar_coeffs(const RadialJet& jet, const MediaPair& media) {
  double kappa = media.kappa();
  double k2 = kappa * kappa;
  double rho = jet.rho;
  double s = dot(jet.x, jet.grad);
  double g2 = dot(jet.grad, jet.grad);

  ScalarCoeffs c;
  c.a = rho * rho + g2 - s * s;
  double q2 = c.a - k2 * (c.a - rho * rho);
  if (q2 <= 0.0) throw DomainError("scalar_coeffs: q^2 <= 0");
  c.q = std::sqrt(q2);
  c.b = (k2 - 1.0) / (kappa * rho + c.q);
  c.alpha = -(c.b * c.b) / (k2 - 1.0) * ((kappa * c.q + rho + (k2 - 1.0) * s) / c.q);
  c.beta = c.b * c.b / c.q;
  double w = g2 - s * (rho + s);
  c.Q = c.b / (c.q + c.b * w);
  c.sigma = kappa - c.b * (rho + s);
  c.gamma = c.b - c.Q * (c.sigma * s + c.b * g2);
  c.F = c.sigma + c.alpha * g2 - (c.alpha * (rho + s) + 2.0 * c.b) * s;
  return c;
}

CoeffIdentityResiduals coeff_identity_residuals(const ScalarCoeffs& c, const RadialJet& jet,
                                                const MediaPair& media) {
  double kappa = media.kappa();
  double k2m1 = kappa * kappa - 1.0;
  double s = dot(jet.x, jet.grad);
  CoeffIdentityResiduals r;
  r.b_identity = std::abs(c.b * (kappa * jet.rho + c.q) - k2m1) / std::abs(k2m1);
  r.q_identity = std::abs(c.Q * jet.rho * (kappa * c.q + jet.rho - k2m1 * s) - k2m1) / std::abs(k2m1);
  r.gamma_identity = std::abs(c.gamma - c.Q * (c.q - kappa * s)) / std::max(1.0, std::abs(c.gamma));
  return r;
}

Vec refractor_normal(const RadialJet& jet) {
  double s = dot(jet.x, jet.grad);
  double a = jet.rho * jet.rho + dot(jet.grad, jet.grad) - s * s;
  if (a <= 0.0) throw DomainError("refractor_normal: degenerate jet (a <= 0)");
  Vec x_dir = lift(jet.x);
  Vec g_amb = jet.grad.appended(0.0);
  return (-1.0 / std::sqrt(a)) * (g_amb - (jet.rho + s) * x_dir);
}

Vec snell(const Vec& x_dir, const Vec& nu, const MediaPair& media) {
  double c = dot(x_dir, nu);
  if (c <= 0.0) throw DomainError("snell: X . nu <= 0");
  double kappa = media.kappa();
  double disc = 1.0 - kappa * kappa * (1.0 - c * c);
  if (disc < 0.0) throw TotalInternalReflectionError("snell: total internal reflection");
  return kappa * x_dir - (kappa * c - std::sqrt(disc)) * nu;
}

RefractionResult refracted_direction(const RadialJet& jet, const MediaPair& media) {
  RefractionResult out;
  out.coeffs = scalar_coeffs(jet, media);
  double kappa = media.kappa();
  double s = dot(jet.x, jet.grad);
  Vec x_dir = lift(jet.x);
  Vec g_amb = jet.grad.appended(0.0);
  out.y_dir = kappa * x_dir + out.coeffs.b * (g_amb - (jet.rho + s) * x_dir);
  return out;
}

Vec grad_b(const RadialJet& jet, const MediaPair& media) {
  ScalarCoeffs c = scalar_coeffs(jet, media);
  double s = dot(jet.x, jet.grad);
  return c.alpha * jet.grad + c.beta * (jet.hess * (jet.grad - s * jet.x));
}

OvalSpec make_oval(const Vec& p, double b, const MediaPair& media, double tau) {
  double kappa = media.kappa();
  if (kappa >= 1.0) throw ConfigError("oval: refracting lower ovals require kappa < 1");
  double pn = norm(p);
  if (!(pn < b && b < pn / kappa)) throw ConfigError("oval: need |P| < b < |P|/kappa");
  if (!(tau > 0.0 && tau < 1.0 - kappa)) throw ConfigError("oval: tau must lie in (0, 1-kappa)");
  return OvalSpec{p, b, kappa, tau};
}

double oval_cap_margin(const Vec& x_dir, const OvalSpec& oval) {
  double ik2 = 1.0 / (oval.kappa * oval.kappa);
  double inner = (ik2 - 1.0) * (ik2 * dot(oval.p, oval.p) - oval.b * oval.b);
  if (inner < 0.0) return -1.0;
  return dot(x_dir, oval.p) - oval.kappa * oval.kappa * (oval.b + std::sqrt(inner));
}

bool oval_admissible(const Vec& x_dir, const OvalSpec& oval) {
  double slack = 1e-12 * std::max(1.0, norm(oval.p));
  return oval_cap_margin(x_dir, oval) > slack;
}

double oval_radial(const Vec& x_dir, const OvalSpec& oval) {
  if (!oval_admissible(x_dir, oval)) throw CapError("oval_radial: X outside refracting cap");
  double ik2 = 1.0 / (oval.kappa * oval.kappa);
  double a = ik2 * dot(x_dir, oval.p) - oval.b;
  double disc = a * a - (ik2 - 1.0) * (ik2 * dot(oval.p, oval.p) - oval.b * oval.b);
  if (disc < 0.0) throw CapError("oval_radial: negative discriminant");
  double h = (a - std::sqrt(disc)) / (ik2 - 1.0);
  if (h <= 0.0) throw CapError("oval_radial: nonpositive radius");
  return h;
}

namespace {

// 4th-order central stencils on the chart; the oval jet is meant as an
// oracle-side fixture, so accuracy wins over evaluation count.
double oval_h_at(const Vec& x, const OvalSpec& oval) { return oval_radial(lift(x), oval); }

double fd1_4th(const std::function<double(double)>& f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

double fd2_4th(const std::function<double(double)>& f, double h) {
  return (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
}

}  // namespace

RadialJet oval_jet(const Vec& x_chart, const OvalSpec& oval, double rel_step) {
  int n = x_chart.size();
  RadialJet jet;
  jet.x = x_chart;
  jet.rho = oval_h_at(x_chart, oval);
  double scale = std::max(1.0, jet.rho);
  double hg = rel_step * scale;
  double hh = 2e-3 * scale;

  jet.grad = Vec(n);
  for (int i = 0; i < n; ++i) {
    jet.grad[i] = fd1_4th(
        [&](double d) {
          Vec xp = x_chart;
          xp[i] += d;
          return oval_h_at(xp, oval);
        },
        hg);
  }

  // Richardson pair of 4th-order stencils for the Hessian; the radial
  // function loses smoothness toward the cap rim, so the extra order buys
  // real margin there.
  auto hess_at = [&](double h) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
      m(i, i) = fd2_4th(
          [&](double d) {
            Vec xp = x_chart;
            xp[i] += d;
            return oval_h_at(xp, oval);
          },
          h);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = fd1_4th(
            [&](double di) {
              Vec xi = x_chart;
              xi[i] += di;
              return fd1_4th(
                  [&](double dj) {
                    Vec xij = xi;
                    xij[j] += dj;
                    return oval_h_at(xij, oval);
                  },
                  h);
            },
            h);
        m(i, j) = v;
        m(j, i) = v;
      }
    return m;
  };
  jet.hess = (1.0 / 15.0) * (16.0 * hess_at(0.5 * hh) - hess_at(hh));
  return jet;
}

double oval_refraction_check(const Vec& x_dir, const OvalSpec& oval, const MediaPair& media) {
  if (std::abs(media.kappa() - oval.kappa) > 1e-12)
    throw DomainError("oval_refraction_check: media kappa differs from oval kappa");
  int n = x_dir.size() - 1;
  if (x_dir[n] <= 0.0) throw DomainError("oval_refraction_check: X below the equator");
  if (dot(x_dir, normalized(oval.p)) < oval.kappa + oval.tau)
    throw CapError("oval_refraction_check: X outside the tau visibility margin");
  Vec x_chart = x_dir.head(n);

  double r = oval_h_at(x_chart, oval);
  double hg = 1e-6 * std::max(1.0, r);
  Vec grad(n);
  for (int i = 0; i < n; ++i) {
    grad[i] = fd1_4th(
        [&](double d) {
          Vec xp = x_chart;
          xp[i] += d;
          return oval_h_at(xp, oval);
        },
        hg);
  }

  RadialJet jet{x_chart, r, grad, Mat(n, n)};
  Vec y = refracted_direction(jet, media).y_dir;
  Vec target = normalized(oval.p - r * lift(x_chart));
  double chord = norm(y - target);
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

}  // namespace refract
