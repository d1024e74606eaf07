#include <doctest.h>

#include <cmath>

#include "refract/jacobian.hpp"
#include "refract/oracle.hpp"
#include "refract/rng.hpp"

using namespace refract;

namespace {

struct Fixture {
  MediaPair media = make_media(0.7, 1.0);
  ReceiverSurface plane = make_plane(2, 3.0);

  AnalyticRho quad(Rng& rng, const Vec& x) const {
    return AnalyticRho::quadratic(x, rng.uniform(0.8, 1.6), rng.in_ball(2, 0.5),
                                  rng.symmetric(2, 1.0));
  }
};

}  // namespace

TEST_CASE("mu0 at the apex of a flat jet is rho Id") {
  Fixture fx;
  RadialJet jet{Vec(2), 1.4, Vec(2), Mat(2, 2)};
  TraceState st = trace_jet(jet, fx.plane, fx.media);
  MuMatrices mu = build_mu(jet, st);
  CHECK(norm_inf(mu.mu0 - 1.4 * Mat::identity(2)) < 1e-13);
}

TEST_CASE("mu0 equals mu2^-1 mu1 and det mu2 matches its closed form") {
  Fixture fx;
  Mat k = 0.3 * Mat::identity(2);
  ReceiverSurface parab = make_quadratic_graph(3.0, k);
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    Vec x = rng.in_ball(2, 0.3);
    AnalyticRho rho = fx.quad(rng, x);
    RadialJet jet = rho.jet_at(x);
    TraceState st;
    try {
      st = trace_jet(jet, parab, fx.media);
    } catch (const std::runtime_error&) {
      continue;
    }
    MuMatrices mu = build_mu(jet, st);
    CHECK(rel_diff(ref_inverse(mu.mu2) * mu.mu1, mu.mu0) < 1e-9);
    CHECK(rel_diff(mu.mu2 * mu.mu2_inv, Mat::identity(2)) < 1e-10);
    double dref = ref_det(mu.mu2);
    CHECK(std::abs(mu.det_mu2 - dref) <= 1e-10 * std::abs(dref));
  }
}

TEST_CASE("grad_stretch is zero for the symmetric cap") {
  Fixture fx;
  RadialJet jet{Vec(2), 1.0, Vec(2), Mat(2, 2)};
  TraceState st = trace_jet(jet, fx.plane, fx.media);
  Mat dy = build_Dy(jet, fx.media);
  CHECK(norm(grad_stretch(jet, dy, st)) < 1e-14);
}

TEST_CASE("grad_stretch matches finite differences of the traced stretch") {
  Fixture fx;
  AnalyticRho rho = AnalyticRho::radial_quadratic(1.0, 0.1, Vec(2));
  FDSpec spec;
  for (const ReceiverSurface& surf : {fx.plane, make_tilted_plane(Vec{0.12, -0.08}, 3.0)}) {
    for (const Vec& x : {Vec{0.1, 0.0}, Vec{-0.05, 0.2}}) {
      RadialJet jet = rho.jet_at(x);
      TraceState st = trace_jet(jet, surf, fx.media);
      Mat dy = build_Dy(jet, fx.media);
      Vec gt = grad_stretch(jet, dy, st);
      Vec gt_fd = fd_gradient(
          [&](const Vec& xp) {
            RadialJet j = rho.jet_at(xp);
            Vec y = refracted_direction(j, fx.media).y_dir;
            return intersect_ray(surf, j.rho * lift(xp), y).t;
          },
          x, spec);
      CHECK(norm_inf(gt - gt_fd) < 1e-6);
    }
  }
}

TEST_CASE("Dy at the apex with a flat jet is the identity") {
  Fixture fx;
  RadialJet jet{Vec(2), 1.2, Vec(2), Mat(2, 2)};
  Mat dy = build_Dy(jet, fx.media);
  CHECK(norm_inf(dy - Mat::identity(2)) < 1e-13);
}

TEST_CASE("Dy matches finite differences across kappa sweeps") {
  Rng rng(111);
  FDSpec spec;
  for (double kappa : {0.5, 0.8}) {
    MediaPair media = make_media(kappa, 1.0);
    for (int i = 0; i < 200; ++i) {
      Vec x = rng.in_ball(2, 0.3);
      AnalyticRho rho = AnalyticRho::quadratic(x, rng.uniform(0.8, 1.6), rng.in_ball(2, 0.5),
                                               rng.symmetric(2, 1.0));
      RadialJet jet = rho.jet_at(x);
      Mat dy = build_Dy(jet, media);
      Mat dy_fd = fd_jacobian(
          [&](const Vec& xp) {
            return refracted_direction(rho.jet_at(xp), media).y_dir.head(2);
          },
          x, spec);
      CHECK(norm_inf(dy - dy_fd) < 1e-6);
    }
  }
}

TEST_CASE("M at the apex with a flat jet is b Id") {
  Fixture fx;
  RadialJet jet{Vec(2), 1.0, Vec(2), Mat(2, 2)};
  ScalarCoeffs c = scalar_coeffs(jet, fx.media);
  MMatrices mm = build_M(jet, fx.media);
  CHECK(norm_inf(mm.m - c.b * Mat::identity(2)) < 1e-14);
  CHECK(mm.det_closed == doctest::Approx(c.b * c.b));
  CHECK(norm_inf(mm.m_inv - (1.0 / c.b) * Mat::identity(2)) < 1e-14);
}

TEST_CASE("the rank-one margin of M lies in (0, 1] for kappa < 1") {
  Rng rng(121);
  MediaPair media = make_media(0.7, 1.0);
  for (int i = 0; i < 2000; ++i) {
    RadialJet jet{Vec(2), rng.uniform(0.5, 2.0), rng.in_ball(2, 0.8), Mat(2, 2)};
    ScalarCoeffs c = scalar_coeffs(jet, media);
    double margin = 1.0 + (c.b / c.q) * dot(jet.grad, jet.grad);
    CHECK(margin > 0.0);
    CHECK(margin <= 1.0 + 1e-15);
  }
}

TEST_CASE("det M closed form matches the dense determinant near x = 0") {
  Rng rng(131);
  MediaPair media = make_media(0.7, 1.0);
  for (int i = 0; i < 500; ++i) {
    RadialJet jet{rng.in_ball(2, 0.2), rng.uniform(0.8, 1.6), rng.in_ball(2, 0.5),
                  rng.symmetric(2, 1.0)};
    MMatrices mm = build_M(jet, media);
    double dref = ref_det(mm.m);
    CHECK(std::abs(mm.det_closed - dref) <= 1e-9 * std::max(1e-30, std::abs(dref)));
    CHECK(rel_diff(mm.m * mm.m_inv, Mat::identity(2)) < 1e-9);
  }
}

TEST_CASE("A and B at x = 0 collapse to the stated matrices") {
  Fixture fx;
  Rng rng(141);
  for (int i = 0; i < 200; ++i) {
    RadialJet jet{Vec(2), rng.uniform(0.8, 1.6), rng.in_ball(2, 0.5), rng.symmetric(2, 1.0)};
    TraceState st = trace_jet(jet, fx.plane, fx.media);
    MMatrices mm = build_M(jet, fx.media);
    ABMatrices ab = build_AB(jet, st, mm, fx.media);
    auto [a0, b0] = AB_at_origin(jet, fx.media);
    CHECK(rel_diff(ab.a_simpl, a0) < 1e-12);
    CHECK(rel_diff(ab.b_simpl, b0) < 1e-12);
    CHECK(rel_diff(ab.a_def, a0) < 1e-10);
    CHECK(rel_diff(ab.b_def, b0) < 1e-10);
  }
  // flat jet: A = rho Id, B = Id
  RadialJet flat{Vec(2), 1.3, Vec(2), Mat(2, 2)};
  auto [a0, b0] = AB_at_origin(flat, fx.media);
  CHECK(norm_inf(a0 - 1.3 * Mat::identity(2)) < 1e-14);
  CHECK(norm_inf(b0 - Mat::identity(2)) < 1e-14);
}

TEST_CASE("definition and simplified routes for A and B agree off the origin") {
  Fixture fx;
  Rng rng(151);
  for (int i = 0; i < 500; ++i) {
    Vec x = rng.in_ball(2, 0.1);
    AnalyticRho rho = fx.quad(rng, x);
    RadialJet jet = rho.jet_at(x);
    TraceState st;
    try {
      st = trace_jet(jet, fx.plane, fx.media);
    } catch (const std::runtime_error&) {
      continue;
    }
    MMatrices mm = build_M(jet, fx.media);
    ABMatrices ab = build_AB(jet, st, mm, fx.media);
    CHECK(rel_diff(ab.a_def, ab.a_simpl) < 1e-9);
    CHECK(rel_diff(ab.b_def, ab.b_simpl) < 1e-9);
  }
}

TEST_CASE("Dz assembly routes agree and match finite differences") {
  Fixture fx;
  Rng rng(161);
  FDSpec spec;
  Mat k = 0.25 * Mat::identity(2);
  for (const ReceiverSurface& surf : {fx.plane, make_quadratic_graph(3.0, k)}) {
    for (int i = 0; i < 100; ++i) {
      Vec x = rng.in_ball(2, 0.25);
      AnalyticRho rho = fx.quad(rng, x);
      RadialJet jet = rho.jet_at(x);
      JacobianBundle bd;
      try {
        bd = assemble_bundle(jet, surf, fx.media);
      } catch (const std::runtime_error&) {
        continue;
      }
      CHECK(rel_diff(bd.dz_alt, bd.dz) < 1e-9);
      CHECK(rel_diff(bd.dz_direct, bd.dz) < 1e-9);
      CHECK(std::abs(bd.det_dz_factored - bd.det_dz) <=
            1e-9 * std::max(1.0, std::abs(bd.det_dz)));

      Mat dz_fd = fd_jacobian(
          [&](const Vec& xp) {
            RadialJet j = rho.jet_at(xp);
            Vec y = refracted_direction(j, fx.media).y_dir;
            return intersect_ray(surf, j.rho * lift(xp), y).z.head(2);
          },
          x, spec);
      CHECK(norm_inf(bd.dz - dz_fd) < 1e-5);
    }
  }
}

TEST_CASE("single-oval refractors have degenerate Dz over the cap") {
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.0, 0.0, 3.0};
  OvalSpec oval = make_oval(p, 4.0, media, 0.05);
  ReceiverSurface through_focus = make_plane(2, 3.0);
  AnalyticRho rho = AnalyticRho::oval_exact(oval);
  Rng rng(171);
  for (int i = 0; i < 30; ++i) {
    Vec x = rng.in_ball(2, 0.25);
    if (oval_cap_margin(lift(x), oval) < 0.05 * norm(p)) continue;
    JacobianBundle bd = assemble_bundle(rho.jet_at(x), through_focus, media);
    CHECK(norm_inf(bd.dz) <= 1e-7);
  }
}

TEST_CASE("det Dz keeps one sign on a connected patch") {
  Fixture fx;
  AnalyticRho rho = AnalyticRho::radial_quadratic(1.0, 0.15, Vec{0.05, 0.0});
  double sign_ref = 0.0;
  for (double x1 = -0.2; x1 <= 0.2; x1 += 0.05)
    for (double x2 = -0.2; x2 <= 0.2; x2 += 0.05) {
      JacobianBundle bd = assemble_bundle(rho.jet_at(Vec{x1, x2}), fx.plane, fx.media);
      double s = bd.det_dz > 0.0 ? 1.0 : -1.0;
      if (sign_ref == 0.0) sign_ref = s;
      CHECK(s == sign_ref);
    }
}

TEST_CASE("MA residual vanishes for the pushed-forward density") {
  Fixture fx;
  Rng rng(181);
  int tested = 0;
  for (int i = 0; i < 300 && tested < 100; ++i) {
    Vec x = rng.in_ball(2, 0.25);
    // shift the Hessian to stay on the positive-definite branch
    Mat h = rng.symmetric(2, 0.6) + 8.0 * Mat::identity(2);
    AnalyticRho rho = AnalyticRho::quadratic(x, rng.uniform(0.9, 1.4), rng.in_ball(2, 0.4), h);
    RadialJet jet = rho.jet_at(x);
    JacobianBundle bd;
    try {
      bd = assemble_bundle(jet, fx.plane, fx.media);
    } catch (const std::runtime_error&) {
      continue;
    }
    Mat arg = jet.hess + (1.0 / (bd.st.cf.b * bd.st.t)) * bd.ab.a_simpl +
              (1.0 / bd.st.cf.b) * bd.ab.b_simpl;
    if (symmetric_eigenvalues(0.5 * (arg + arg.transposed())).front() <= 1e-6) continue;
    double f_val = 1.0;
    double g_val =
        f_val * bd.st.psi_vertical / (norm(bd.st.grad_psi) * bd.st.x_dir[2] * std::abs(bd.det_dz));
    MaResidual res = ma_residual(jet, fx.plane, fx.media, f_val, g_val);
    CHECK(std::abs(res.relative) <= 1e-6);
    ++tested;
  }
  CHECK(tested >= 50);
}

TEST_CASE("apex residual has the hand-evaluable collapsed matrix") {
  Fixture fx;
  RadialJet jet{Vec(2), 1.0, Vec(2), 0.5 * Mat::identity(2)};
  TraceState st = trace_jet(jet, fx.plane, fx.media);
  const ScalarCoeffs& c = st.cf;
  CHECK(fx.media.kappa() - c.b * jet.rho == doctest::Approx(1.0));
  auto [a0, b0] = AB_at_origin(jet, fx.media);
  Mat expect = jet.hess + (jet.rho / (c.b * st.t)) * Mat::identity(2) +
               (1.0 / c.b) * Mat::identity(2);
  Mat arg = jet.hess + (1.0 / (c.b * st.t)) * a0 + (1.0 / c.b) * b0;
  CHECK(norm_inf(arg - expect) < 1e-13);
}

TEST_CASE("general residual equals the x = 0 specialization") {
  Fixture fx;
  Rng rng(191);
  for (int i = 0; i < 200; ++i) {
    RadialJet jet{Vec(2), rng.uniform(0.8, 1.6), rng.in_ball(2, 0.5), rng.symmetric(2, 1.0)};
    MaResidual general = ma_residual(jet, fx.plane, fx.media, 1.0, 1.0);
    MaResidual origin = ma_residual_at_origin(jet, fx.plane, fx.media, 1.0, 1.0);
    double scale = std::max({1.0, std::abs(general.lhs), std::abs(general.rhs)});
    CHECK(std::abs(general.raw - origin.raw) / scale < 1e-9);
  }
}

TEST_CASE("perturbed single-oval refractors sit on the positive-definite branch") {
  // the epsilon |x|^2 bump dominates the coefficient response only near the
  // apex; at |x| ~ 0.2 the A/B sensitivity to the perturbed gradient wins
  MediaPair media = make_media(0.7, 1.0);
  Vec p{0.0, 0.0, 3.0};
  OvalSpec oval = make_oval(p, 4.0, media, 0.05);
  AnalyticRho rho = AnalyticRho::oval_perturbed(oval, 1e-3);
  ReceiverSurface plane = make_plane(2, 3.0);
  Rng rng(201);
  for (int i = 0; i < 20; ++i) {
    Vec x = rng.in_ball(2, 0.1);
    RadialJet jet = rho.jet_at(x);
    JacobianBundle bd = assemble_bundle(jet, plane, media);
    Mat arg = jet.hess + (1.0 / (bd.st.cf.b * bd.st.t)) * bd.ab.a_simpl +
              (1.0 / bd.st.cf.b) * bd.ab.b_simpl;
    auto ev = symmetric_eigenvalues(0.5 * (arg + arg.transposed()));
    CHECK(ev.front() > 0.0);
  }
}

TEST_CASE("mu0 carries no Hessian dependence") {
  Fixture fx;
  Rng rng(211);
  Vec x{0.1, -0.05};
  AnalyticRho rho_a = AnalyticRho::quadratic(x, 1.2, Vec{0.3, -0.1}, rng.symmetric(2, 1.0));
  AnalyticRho rho_b = AnalyticRho::quadratic(x, 1.2, Vec{0.3, -0.1}, rng.symmetric(2, 1.0));
  TraceState st_a = trace_jet(rho_a.jet_at(x), fx.plane, fx.media);
  TraceState st_b = trace_jet(rho_b.jet_at(x), fx.plane, fx.media);
  Mat mu0_a = build_mu(rho_a.jet_at(x), st_a).mu0;
  Mat mu0_b = build_mu(rho_b.jet_at(x), st_b).mu0;
  CHECK(norm_inf(mu0_a - mu0_b) < 1e-14);
}

TEST_CASE("the assembly stays dimension-generic (n = 3 smoke test)") {
  MediaPair media = make_media(0.7, 1.0);
  ReceiverSurface plane = make_plane(3, 3.0);
  Rng rng(221);
  for (int i = 0; i < 20; ++i) {
    Vec x = rng.in_ball(3, 0.25);
    AnalyticRho rho = AnalyticRho::quadratic(x, rng.uniform(0.9, 1.4), rng.in_ball(3, 0.4),
                                             rng.symmetric(3, 0.8));
    RadialJet jet = rho.jet_at(x);
    JacobianBundle bd = assemble_bundle(jet, plane, media);
    CHECK(rel_diff(ref_inverse(bd.mu.mu2) * bd.mu.mu1, bd.mu.mu0) < 1e-9);
    CHECK(rel_diff(bd.mm.m * bd.mm.m_inv, Mat::identity(3)) < 1e-9);
    CHECK(rel_diff(bd.ab.a_def, bd.ab.a_simpl) < 1e-9);
    CHECK(rel_diff(bd.ab.b_def, bd.ab.b_simpl) < 1e-9);
    CHECK(rel_diff(bd.dz_alt, bd.dz) < 1e-9);
    CHECK(rel_diff(bd.dz_direct, bd.dz) < 1e-9);
    double dref = ref_det(bd.mm.m);
    CHECK(std::abs(bd.mm.det_closed - dref) <= 1e-9 * std::max(1e-30, std::abs(dref)));
  }
}
