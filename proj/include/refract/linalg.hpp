#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "refract/errors.hpp"

namespace refract {

/// Small dense vector with runtime dimension. All hot paths in this
/// project have n <= 6, so plain contiguous storage and value semantics
/// are the right trade.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : v_(static_cast<std::size_t>(n), 0.0) {}
  Vec(std::initializer_list<double> init) : v_(init) {}

  int size() const { return static_cast<int>(v_.size()); }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double s);

  /// First n components (chart part of an ambient vector).
  Vec head(int n) const;
  /// Copy with one extra trailing component.
  Vec appended(double last) const;

 private:
  std::vector<double> v_;
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double s, Vec a);
Vec operator*(Vec a, double s);
Vec operator-(Vec a);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double norm_inf(const Vec& a);
Vec normalized(const Vec& a);
Vec basis_vector(int n, int k);

/// Dense row-major matrix, runtime-sized.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), 0.0) {}

  static Mat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  Mat transposed() const;
  bool is_symmetric(double tol = 1e-12) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);

double norm_inf(const Mat& a);
double norm_fro(const Mat& a);
/// max |a_ij - b_ij| / max(1, ||b||_F)
double rel_diff(const Mat& a, const Mat& b);
double rel_diff(const Vec& a, const Vec& b);

/// (u (x) w)_{ij} = u_i w_j. Lengths must agree with the caller's intent;
/// mixed sizes are allowed only through the two-argument form below.
Mat outer(const Vec& u, const Vec& w);

/// LU with partial pivoting; the library's dense kernel.
/// Test oracles use an independently written elimination (see oracle.hpp).
struct LuFactors {
  Mat lu;
  std::vector<int> perm;
  int sign = 1;
  bool singular = false;
};

LuFactors lu_factor(const Mat& a);
double lu_det(const LuFactors& f);
Vec lu_solve(const LuFactors& f, const Vec& b);
double det(const Mat& a);
Mat inverse(const Mat& a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Mat& a);

/// Chart lift x -> X = (x, sqrt(1-|x|^2)). Requires |x| < 1.
Vec lift(const Vec& x);

/// (1 + xi . D^{-1} eta) det D, the rank-one determinant update.
double sherman_morrison_det(const Mat& d, const Vec& xi, const Vec& eta);

/// D^{-1} - (D^{-1} xi (x) eta D^{-1}) / (1 + xi . D^{-1} eta).
/// Throws RankOneDegeneracyError when |1 + xi . D^{-1} eta| < 1e-12.
Mat sherman_morrison_inv(const Mat& d, const Vec& xi, const Vec& eta);

}  // namespace refract
