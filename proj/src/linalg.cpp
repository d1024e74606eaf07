#include "refract/linalg.hpp"

#include <algorithm>
#include <cstdlib>

namespace refract {

Vec& Vec::operator+=(const Vec& o) {
  for (int i = 0; i < size(); ++i) v_[static_cast<std::size_t>(i)] += o[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& o) {
  for (int i = 0; i < size(); ++i) v_[static_cast<std::size_t>(i)] -= o[i];
  return *this;
}

Vec& Vec::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

Vec Vec::head(int n) const {
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = (*this)[i];
  return out;
}

Vec Vec::appended(double last) const {
  Vec out(size() + 1);
  for (int i = 0; i < size(); ++i) out[i] = (*this)[i];
  out[size()] = last;
  return out;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double s, Vec a) { return a *= s; }
Vec operator*(Vec a, double s) { return a *= s; }
Vec operator-(Vec a) { return a *= -1.0; }

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

Vec normalized(const Vec& a) {
  double n = norm(a);
  if (n == 0.0) throw DomainError("normalized: zero vector");
  return (1.0 / n) * a;
}

Vec basis_vector(int n, int k) {
  Vec e(n);
  e[k] = 1.0;
  return e;
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat& Mat::operator+=(const Mat& o) {
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& x : a_) x *= s;
  return *this;
}

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Mat::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec operator*(const Mat& a, const Vec& x) {
  Vec y(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double norm_inf(const Mat& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

double norm_fro(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double rel_diff(const Mat& a, const Mat& b) {
  return norm_inf(a - b) / std::max(1.0, norm_fro(b));
}

double rel_diff(const Vec& a, const Vec& b) {
  return norm_inf(a - b) / std::max(1.0, norm(b));
}

Mat outer(const Vec& u, const Vec& w) {
  Mat m(u.size(), w.size());
  for (int i = 0; i < u.size(); ++i)
    for (int j = 0; j < w.size(); ++j) m(i, j) = u[i] * w[j];
  return m;
}

LuFactors lu_factor(const Mat& a) {
  int n = a.rows();
  LuFactors f;
  f.lu = a;
  f.perm.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(f.lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(f.lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      return f;
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(piv)]);
      f.sign = -f.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      double lik = f.lu(i, k);
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
    }
  }
  return f;
}

double lu_det(const LuFactors& f) {
  if (f.singular) return 0.0;
  double d = f.sign;
  for (int i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
  return d;
}

Vec lu_solve(const LuFactors& f, const Vec& b) {
  if (f.singular) throw SingularMatrixError("lu_solve: singular matrix");
  int n = f.lu.rows();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[f.perm[static_cast<std::size_t>(i)]];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s;
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

double det(const Mat& a) { return lu_det(lu_factor(a)); }

Mat inverse(const Mat& a) {
  LuFactors f = lu_factor(a);
  if (f.singular) throw SingularMatrixError("inverse: singular matrix");
  int n = a.rows();
  Mat inv(n, n);
  for (int j = 0; j < n; ++j) {
    Vec col = lu_solve(f, basis_vector(n, j));
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

std::vector<double> symmetric_eigenvalues(const Mat& a) {
  int n = a.rows();
  Mat m = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = m(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

Vec lift(const Vec& x) {
  double r2 = dot(x, x);
  if (r2 >= 1.0) throw DomainError("lift: |x| >= 1");
  return x.appended(std::sqrt(1.0 - r2));
}

// det(D + xi (x) eta) = (1 + eta . D^{-1} xi) det D. For symmetric D the
// two contraction orders coincide, which is the case everywhere the rank-one
// updates appear in the assembly (the matrix A = b(Id - x(x)x) and Id).
double sherman_morrison_det(const Mat& d, const Vec& xi, const Vec& eta) {
  LuFactors f = lu_factor(d);
  if (f.singular) throw SingularMatrixError("sherman_morrison_det: singular D");
  Vec di_xi = lu_solve(f, xi);
  return (1.0 + dot(eta, di_xi)) * lu_det(f);
}

Mat sherman_morrison_inv(const Mat& d, const Vec& xi, const Vec& eta) {
  LuFactors f = lu_factor(d);
  if (f.singular) throw SingularMatrixError("sherman_morrison_inv: singular D");
  Vec di_xi_s = lu_solve(f, xi);
  double denom = 1.0 + dot(eta, di_xi_s);
  if (std::abs(denom) < 1e-12)
    throw RankOneDegeneracyError("sherman_morrison_inv: 1 + eta.D^-1 xi below tolerance");
  Mat dinv = inverse(d);
  Vec di_xi = dinv * xi;
  Vec etat_di = dinv.transposed() * eta;  // eta^T D^-1 as a vector
  return dinv - (1.0 / denom) * outer(di_xi, etat_di);
}

}  // namespace refract
