#include <doctest.h>

#include <cmath>
#include <limits>

#include "refract/oracle.hpp"
#include "refract/refraction.hpp"
#include "refract/rng.hpp"

using namespace refract;

namespace {

RadialJet random_jet(Rng& rng, const MediaPair& media, double x_max = 0.3) {
  RadialJet jet;
  jet.x = rng.in_ball(2, x_max);
  jet.rho = rng.uniform(0.8, 1.6);
  double gmax = 0.5;
  if (media.kappa() > 1.0)
    gmax = std::min(gmax, 0.9 * jet.rho / std::sqrt(media.kappa() * media.kappa() - 1.0));
  jet.grad = rng.in_ball(2, gmax);
  jet.hess = rng.symmetric(2, 1.0);
  return jet;
}

}  // namespace

TEST_CASE("media validation") {
  CHECK_THROWS_AS(make_media(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_media(-1.0, 1.5), ConfigError);
  CHECK(make_media(1.0, 2.0).kappa() == doctest::Approx(0.5));
}

TEST_CASE("jet validation enforces the kappa > 1 gradient bound") {
  MediaPair media = make_media(1.3, 1.0);
  RadialJet jet;
  jet.x = Vec(2);
  jet.rho = 1.0;
  jet.grad = Vec{2.0, 0.0};  // |grad|^2 = 4 > 1/(1.69-1)
  jet.hess = Mat(2, 2);
  CHECK_THROWS_AS(validate_jet(jet, media), DomainError);
}

TEST_CASE("normal at the apex of a radial graph is vertical") {
  RadialJet jet{Vec(2), 1.3, Vec(2), Mat(2, 2)};
  Vec nu = refractor_normal(jet);
  CHECK(norm_inf(nu - Vec{0.0, 0.0, 1.0}) < 1e-15);
}

TEST_CASE("normal plug-in example") {
  RadialJet jet{Vec(2), 1.0, Vec{1.0, 0.0}, Mat(2, 2)};
  Vec nu = refractor_normal(jet);
  Vec expect = (1.0 / std::sqrt(2.0)) * Vec{-1.0, 0.0, 1.0};
  CHECK(norm_inf(nu - expect) < 1e-14);
}

TEST_CASE("X . nu = rho / sqrt(a) for random jets") {
  Rng rng(31);
  MediaPair media = make_media(0.7, 1.0);
  for (int i = 0; i < 500; ++i) {
    RadialJet jet = random_jet(rng, media);
    Vec nu = refractor_normal(jet);
    ScalarCoeffs c = scalar_coeffs(jet, media);
    CHECK(dot(lift(jet.x), nu) == doctest::Approx(jet.rho / std::sqrt(c.a)).epsilon(1e-12));
    CHECK(std::abs(norm(nu) - 1.0) < 1e-12);
  }
}

TEST_CASE("snell at normal incidence is the identity") {
  MediaPair media = make_media(0.7, 1.0);
  Vec x_dir = normalized(Vec{0.1, 0.2, 1.0});
  Vec y = snell(x_dir, x_dir, media);
  CHECK(norm_inf(y - x_dir) < 1e-12);
}

TEST_CASE("snell satisfies the sine law against the classical oracle") {
  Rng rng(41);
  MediaPair media = make_media(0.7, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Vec x_dir = rng.unit_vector(3);
    Vec nu = rng.unit_vector(3);
    if (dot(x_dir, nu) <= 0.05) continue;
    Vec y = snell(x_dir, nu, media);
    CHECK(std::abs(norm(y) - 1.0) < 1e-12);
    double sin1 = norm(x_dir - dot(x_dir, nu) * nu);
    double sin2 = norm(y - dot(y, nu) * nu);
    CHECK(std::abs(sin2 - media.kappa() * sin1) < 1e-11);
    // X - (n2/n1) Y parallel to nu
    Vec r = x_dir - (media.n2 / media.n1) * y;
    CHECK(norm(r - dot(r, nu) * nu) < 1e-11);
    CHECK(dot(y, nu) > 0.0);
  }
}

TEST_CASE("snell flags total internal reflection for kappa > 1") {
  MediaPair media = make_media(1.8, 1.0);
  Vec x_dir = normalized(Vec{0.9, 0.0, 0.5});
  Vec nu{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(snell(x_dir, nu, media), TotalInternalReflectionError);
}

TEST_CASE("refracted direction at the apex goes straight through") {
  MediaPair media = make_media(0.7, 1.0);
  RadialJet jet{Vec(2), 1.2, Vec(2), Mat(2, 2)};
  RefractionResult rr = refracted_direction(jet, media);
  CHECK(norm_inf(rr.y_dir - Vec{0.0, 0.0, 1.0}) < 1e-14);
  CHECK(rr.coeffs.q == doctest::Approx(jet.rho));
  CHECK(rr.coeffs.b == doctest::Approx((media.kappa() - 1.0) / jet.rho));
}

TEST_CASE("two routes for Y agree in both regimes") {
  Rng rng(51);
  for (double kappa : {0.5, 0.7, 0.9, 1.2, 1.4}) {
    MediaPair media = make_media(kappa, 1.0);
    for (int i = 0; i < 2000; ++i) {
      RadialJet jet = random_jet(rng, media);
      RefractionResult rr = refracted_direction(jet, media);
      Vec y2 = snell(lift(jet.x), refractor_normal(jet), media);
      CHECK(norm_inf(rr.y_dir - y2) < 1e-11);
      CHECK(std::abs(norm(rr.y_dir) - 1.0) < 1e-11);
      // X.Y identity and the sign of b
      double xy = dot(lift(jet.x), rr.y_dir);
      CHECK(std::abs(xy - (kappa - rr.coeffs.b * jet.rho)) < 1e-11);
      CHECK(((kappa < 1.0) == (rr.coeffs.b < 0.0)));
      CHECK(dot(rr.y_dir, refractor_normal(jet)) > 0.0);
    }
  }
}

TEST_CASE("scalar coefficient identities hold to 1e-10 relative") {
  Rng rng(61);
  for (double kappa : {0.5, 0.9, 1.3}) {
    MediaPair media = make_media(kappa, 1.0);
    for (int i = 0; i < 1000; ++i) {
      RadialJet jet = random_jet(rng, media);
      ScalarCoeffs c = scalar_coeffs(jet, media);
      CoeffIdentityResiduals r = coeff_identity_residuals(c, jet, media);
      CHECK(r.b_identity < 1e-10);
      CHECK(r.q_identity < 1e-10);
      CHECK(r.gamma_identity < 1e-10);
      CHECK(c.a > 0.0);
      CHECK(c.q > 0.0);
    }
  }
}

TEST_CASE("grad_b vanishes for flat jets and matches FD elsewhere") {
  MediaPair media = make_media(0.7, 1.0);
  RadialJet flat{Vec(2), 1.0, Vec(2), Mat(2, 2)};
  CHECK(norm(grad_b(flat, media)) == 0.0);

  // radial-quadratic fixture at x = 0
  AnalyticRho rho = AnalyticRho::radial_quadratic(1.0, 0.2, Vec{0.1, -0.05});
  FDSpec spec;  // step 1e-5
  for (const Vec& x : {Vec(2), Vec{0.1, 0.0}, Vec{-0.07, 0.12}}) {
    Vec gb = grad_b(rho.jet_at(x), media);
    Vec gb_fd = fd_gradient(
        [&](const Vec& xp) { return scalar_coeffs(rho.jet_at(xp), media).b; }, x, spec);
    CHECK(norm_inf(gb - gb_fd) < 1e-7);
  }
}

TEST_CASE("alpha and beta recomputed from their definitions agree") {
  Rng rng(71);
  MediaPair media = make_media(0.6, 1.0);
  for (int i = 0; i < 500; ++i) {
    RadialJet jet = random_jet(rng, media);
    ScalarCoeffs c = scalar_coeffs(jet, media);
    double kappa = media.kappa();
    double k2m1 = kappa * kappa - 1.0;
    double s = dot(jet.x, jet.grad);
    double alpha_def = -(c.b * c.b) / k2m1 * ((kappa * c.q + jet.rho + k2m1 * s) / c.q);
    double beta_def = c.b * c.b / c.q;
    CHECK(c.alpha == doctest::Approx(alpha_def).epsilon(1e-14));
    CHECK(c.beta == doctest::Approx(beta_def).epsilon(1e-14));
  }
}

TEST_CASE("oval invariants and the collinear radial value") {
  MediaPair media = make_media(0.6, 1.0);
  double d = 3.0;
  Vec p{0.0, 0.0, d};
  CHECK_THROWS_AS(make_oval(p, 2.0, media, 0.05), ConfigError);      // b < |P|
  CHECK_THROWS_AS(make_oval(p, d / 0.6 + 0.1, media, 0.05), ConfigError);  // b > |P|/kappa

  double b = 3.8;
  OvalSpec oval = make_oval(p, b, media, 0.05);
  double r = oval_radial(Vec{0.0, 0.0, 1.0}, oval);
  CHECK(r == doctest::Approx((d - b * 0.6) / (1.0 - 0.6)).epsilon(1e-12));
}

TEST_CASE("oval radial satisfies the defining two-focus identity") {
  Rng rng(81);
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.2, -0.1, 3.0};
  double pn = norm(p);
  OvalSpec oval = make_oval(p, pn * 1.2, media, 0.05);
  for (int i = 0; i < 500; ++i) {
    Vec x = rng.in_ball(2, 0.3);
    Vec x_dir = lift(x);
    if (!oval_admissible(x_dir, oval)) continue;
    double r = oval_radial(x_dir, oval);
    CHECK(std::abs(r + norm(r * x_dir - p) / 0.7 - oval.b) <= 1e-10 * oval.b);
  }
}

TEST_CASE("oval shrinks to the focus segment as b approaches |P|") {
  // the refracting cap collapses to the axis in this limit, so the sweep
  // stops where the axial margin is still above the rejection slack
  MediaPair media = make_media(0.5, 1.0);
  Vec p{0.0, 0.0, 2.5};
  Vec axis{0.0, 0.0, 1.0};
  double prev = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    OvalSpec oval = make_oval(p, norm(p) * (1.0 + eps), media, 0.05);
    double r = oval_radial(axis, oval);
    CHECK(r < norm(p));
    CHECK(r > prev);  // increases toward |P| as b decreases to |P|
    prev = r;
  }
  CHECK(std::abs(prev - norm(p)) < 1e-3);
}

TEST_CASE("oval radial is decreasing in b along admissible rays") {
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.1, 0.0, 3.0};
  Vec x_dir = lift(Vec{0.05, -0.02});
  double pn = norm(p);
  double prev_r = std::numeric_limits<double>::infinity();
  for (double frac : {0.1, 0.3, 0.5, 0.7}) {
    OvalSpec oval = make_oval(p, pn * (1.0 + frac * (1.0 / 0.7 - 1.0)), media, 0.05);
    double r = oval_radial(x_dir, oval);
    CHECK(r < prev_r);
    prev_r = r;
  }
}

TEST_CASE("rays outside the refracting cap are rejected") {
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.0, 0.0, 3.0};
  OvalSpec oval = make_oval(p, 3.3, media, 0.05);
  Vec sideways = normalized(Vec{1.0, 0.0, 0.05});
  CHECK_FALSE(oval_admissible(sideways, oval));
  CHECK_THROWS_AS(oval_radial(sideways, oval), CapError);
}

TEST_CASE("oval refraction check: axial symmetry gives zero deviation") {
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.0, 0.0, 3.0};
  OvalSpec oval = make_oval(p, 3.5, media, 0.05);
  double dev = oval_refraction_check(Vec{0.0, 0.0, 1.0}, oval, media);
  CHECK(dev < 1e-9);
}

TEST_CASE("oval refraction check near the cap margin") {
  MediaPair media = make_media(0.7, 1.0);
  Rng rng(91);
  Vec p{0.0, 0.0, 3.0};
  OvalSpec oval = make_oval(p, 3.6, media, 0.05);
  double kappa = 0.7, tau = 0.05;
  for (int i = 0; i < 100; ++i) {
    Vec x = rng.in_ball(2, 0.5);
    Vec x_dir = lift(x);
    if (dot(x_dir, normalized(p)) < kappa + tau) continue;
    if (!oval_admissible(x_dir, oval)) continue;
    CHECK(oval_refraction_check(x_dir, oval, media) <= 1e-7);
  }
}

TEST_CASE("oval refraction deviation is invariant under rotation about the axis") {
  MediaPair media = make_media(0.6, 1.0);
  Vec p{0.0, 0.0, 2.8};
  OvalSpec oval = make_oval(p, 3.9, media, 0.05);
  Vec x{0.12, 0.04};
  double dev0 = oval_refraction_check(lift(x), oval, media);
  for (double th : {0.3, 1.1, 2.7}) {
    Mat r = rotation2(th);
    double dev = oval_refraction_check(lift(r * x), oval, media);
    CHECK(std::abs(dev - dev0) < 1e-8);
  }
}

TEST_CASE("snell at the visibility-margin boundary stays unit and forward") {
  MediaPair media = make_media(0.7, 1.0);
  double c = 0.7 + 0.05;  // X . nu right at kappa + tau
  Vec nu{0.0, 0.0, 1.0};
  Vec x_dir{std::sqrt(1.0 - c * c), 0.0, c};
  Vec y = snell(x_dir, nu, media);
  CHECK(std::abs(norm(y) - 1.0) < 1e-12);
  CHECK(dot(y, nu) > 0.0);
}
