#include <doctest.h>

#include "refract/linalg.hpp"
#include "refract/oracle.hpp"
#include "refract/rng.hpp"

using namespace refract;

TEST_CASE("lift maps the origin to the north pole") {
  Vec x(2);
  Vec X = lift(x);
  CHECK(X[0] == 0.0);
  CHECK(X[1] == 0.0);
  CHECK(X[2] == 1.0);
}

TEST_CASE("lift reproduces the 3-4-5 identity") {
  Vec X = lift(Vec{0.6, 0.0});
  CHECK(X[0] == doctest::Approx(0.6));
  CHECK(X[2] == doctest::Approx(0.8));
}

TEST_CASE("lift is unit-norm up to the boundary") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Vec x = 0.99 * rng.unit_vector(3);
    CHECK(std::abs(norm(lift(x)) - 1.0) < 1e-12);
  }
}

TEST_CASE("lift rejects points outside the chart") {
  CHECK_THROWS_AS(lift(Vec{1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(lift(Vec{0.8, 0.7}), DomainError);
}

TEST_CASE("outer places a single one at (1,2)") {
  Mat m = outer(basis_vector(3, 0), basis_vector(3, 1));
  CHECK(m(0, 1) == 1.0);
  CHECK(norm_fro(m) == 1.0);
}

TEST_CASE("outer of anything with zero is zero") {
  Mat m = outer(Vec{1.0, 2.0}, Vec(2));
  CHECK(norm_inf(m) == 0.0);
}

TEST_CASE("outer contraction identity (a(x)b)(c(x)d) = (b.c) a(x)d") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    Vec a = rng.in_ball(3, 2.0), b = rng.in_ball(3, 2.0);
    Vec c = rng.in_ball(3, 2.0), d = rng.in_ball(3, 2.0);
    Mat lhs = outer(a, b) * outer(c, d);
    Mat rhs = dot(b, c) * outer(a, d);
    CHECK(norm_inf(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("sherman-morrison determinant trivials") {
  Mat id = Mat::identity(3);
  CHECK(sherman_morrison_det(id, Vec(3), Vec(3)) == doctest::Approx(1.0));
  CHECK(sherman_morrison_det(id, basis_vector(3, 0), basis_vector(3, 0)) == doctest::Approx(2.0));
}

TEST_CASE("sherman-morrison inverse trivials") {
  Mat id = Mat::identity(3);
  Mat inv = sherman_morrison_inv(id, Vec(3), Vec(3));
  CHECK(norm_inf(inv - id) < 1e-14);
  Mat half = sherman_morrison_inv(id, basis_vector(3, 0), basis_vector(3, 0));
  Mat expect = id - 0.5 * outer(basis_vector(3, 0), basis_vector(3, 0));
  CHECK(norm_inf(half - expect) < 1e-14);
}

TEST_CASE("sherman-morrison agrees with dense references across sizes") {
  Rng rng(23);
  for (int n : {2, 3, 5}) {
    for (int trial = 0; trial < 1000; ++trial) {
      Mat d(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = rng.uniform(-2.0, 2.0);
      d += 3.0 * Mat::identity(n);  // keep D away from singularity
      Vec xi = rng.in_ball(n, 1.0), eta = rng.in_ball(n, 1.0);

      Mat updated = d + outer(xi, eta);
      double det_sm = sherman_morrison_det(d, xi, eta);
      double det_ref = ref_det(updated);
      CHECK(std::abs(det_sm - det_ref) <= 1e-9 * std::max(1.0, std::abs(det_ref)));

      if (std::abs(det_sm) > 1e-8) {
        Mat inv = sherman_morrison_inv(d, xi, eta);
        CHECK(norm_inf(updated * inv - Mat::identity(n)) < 1e-10);
      }
    }
  }
}

TEST_CASE("sherman-morrison inverse flags rank-one degeneracy") {
  Mat id = Mat::identity(2);
  // 1 + xi . eta = 0
  CHECK_THROWS_AS(sherman_morrison_inv(id, Vec{1.0, 0.0}, Vec{-1.0, 0.0}), RankOneDegeneracyError);
}

TEST_CASE("lu determinant and inverse match the independent references") {
  Rng rng(5);
  for (int n : {2, 3, 5}) {
    for (int trial = 0; trial < 200; ++trial) {
      Mat a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      double d_lu = det(a);
      double d_ref = ref_det(a);
      CHECK(std::abs(d_lu - d_ref) <= 1e-10 * std::max(1.0, std::abs(d_ref)));
      if (std::abs(d_ref) > 1e-6) {
        CHECK(norm_inf(inverse(a) - ref_inverse(a)) < 1e-8);
        CHECK(norm_inf(a * inverse(a) - Mat::identity(n)) < 1e-10);
      }
    }
  }
}

TEST_CASE("symmetric eigenvalues on a known matrix") {
  Mat a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  a(0, 1) = a(1, 0) = 1.0;
  auto ev = symmetric_eigenvalues(a);
  CHECK(ev[0] == doctest::Approx(2.5 - std::sqrt(1.25)));
  CHECK(ev[1] == doctest::Approx(2.5 + std::sqrt(1.25)));
}
