#include "refract/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace refract {

void validate_fd(const FDSpec& spec) {
  if (spec.step < 1e-8 || spec.step > 1e-2) throw ConfigError("fd: step outside [1e-8, 1e-2]");
  if (spec.order != 2 && spec.order != 4) throw ConfigError("fd: order must be 2 or 4");
}

namespace {

double central1(const std::function<double(double)>& f, double h, int order) {
  if (order == 4)
    return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
  return (f(h) - f(-h)) / (2.0 * h);
}

double central2(const std::function<double(double)>& f, double h, int order) {
  if (order == 4)
    return (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) /
           (12.0 * h * h);
  return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

}  // namespace

double fd_derivative(const std::function<double(double)>& f, const FDSpec& spec) {
  validate_fd(spec);
  double d = central1(f, spec.step, spec.order);
  if (!spec.richardson) return d;
  double d2 = central1(f, 0.5 * spec.step, spec.order);
  double p = (spec.order == 4) ? 16.0 : 4.0;
  return (p * d2 - d) / (p - 1.0);
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, const FDSpec& spec) {
  int n = x.size();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = fd_derivative(
        [&](double d) {
          Vec xp = x;
          xp[i] += d;
          return f(xp);
        },
        spec);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, const FDSpec& spec) {
  validate_fd(spec);
  int n = x.size();
  Vec f0 = f(x);
  int m = f0.size();
  Mat j(m, n);
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < m; ++row) {
      j(row, col) = fd_derivative(
          [&](double d) {
            Vec xp = x;
            xp[col] += d;
            return f(xp)[row];
          },
          spec);
    }
  }
  return j;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, const FDSpec& spec) {
  validate_fd(spec);
  int n = x.size();
  Mat h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = central2(
        [&](double d) {
          Vec xp = x;
          xp[i] += d;
          return f(xp);
        },
        spec.step, spec.order);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = spec.step;
      // standard four-point cross stencil
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += s; xpp[j] += s;
      xpm[i] += s; xpm[j] -= s;
      xmp[i] -= s; xmp[j] += s;
      xmm[i] -= s; xmm[j] -= s;
      double v = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * s * s);
      h(i, j) = v;
      h(j, i) = v;
    }
  return h;
}

double fd_second_directional(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& d,
                             const FDSpec& spec) {
  validate_fd(spec);
  auto g = [&](double s) { return f(x + s * d); };
  double v = central2(g, spec.step, spec.order);
  if (!spec.richardson) return v;
  double v2 = central2(g, 0.5 * spec.step, spec.order);
  double p = (spec.order == 4) ? 16.0 : 4.0;
  return (p * v2 - v) / (p - 1.0);
}

AnalyticRho AnalyticRho::constant(int n, double c) {
  AnalyticRho a;
  a.kind_ = Kind::constant;
  a.rho_ = [c](const Vec&) { return c; };
  a.grad_ = [n](const Vec&) { return Vec(n); };
  a.hess_ = [n](const Vec&) { return Mat(n, n); };
  return a;
}

AnalyticRho AnalyticRho::radial_quadratic(double c0, double c1, const Vec& center) {
  AnalyticRho a;
  a.kind_ = Kind::radial_quadratic;
  int n = center.size();
  a.rho_ = [c0, c1, center](const Vec& x) {
    Vec d = x - center;
    return c0 + c1 * dot(d, d);
  };
  a.grad_ = [c1, center](const Vec& x) { return (2.0 * c1) * (x - center); };
  a.hess_ = [c1, n](const Vec&) { return (2.0 * c1) * Mat::identity(n); };
  return a;
}

AnalyticRho AnalyticRho::quadratic(const Vec& x0, double rho0, const Vec& g, const Mat& h) {
  AnalyticRho a;
  a.kind_ = Kind::quadratic;
  a.rho_ = [x0, rho0, g, h](const Vec& x) {
    Vec d = x - x0;
    return rho0 + dot(g, d) + 0.5 * dot(d, h * d);
  };
  a.grad_ = [x0, g, h](const Vec& x) { return g + h * (x - x0); };
  a.hess_ = [h](const Vec&) { return h; };
  return a;
}

AnalyticRho AnalyticRho::oval_exact(const OvalSpec& oval) {
  AnalyticRho a;
  a.kind_ = Kind::oval_exact;
  a.rho_ = [oval](const Vec& x) { return oval_radial(lift(x), oval); };
  a.grad_ = [oval](const Vec& x) { return oval_jet(x, oval).grad; };
  a.hess_ = [oval](const Vec& x) { return oval_jet(x, oval).hess; };
  return a;
}

AnalyticRho AnalyticRho::oval_perturbed(const OvalSpec& oval, double eps) {
  AnalyticRho a;
  a.kind_ = Kind::oval_perturbed;
  a.rho_ = [oval, eps](const Vec& x) { return oval_radial(lift(x), oval) + eps * dot(x, x); };
  a.grad_ = [oval, eps](const Vec& x) { return oval_jet(x, oval).grad + (2.0 * eps) * x; };
  a.hess_ = [oval, eps](const Vec& x) {
    RadialJet j = oval_jet(x, oval);
    return j.hess + (2.0 * eps) * Mat::identity(x.size());
  };
  return a;
}

double ref_det(const Mat& a) {
  // Full-pivot elimination, written independently of the LU kernel.
  int n = a.rows();
  Mat work = a;
  std::vector<bool> rdone(static_cast<std::size_t>(n), false), cdone(static_cast<std::size_t>(n), false);
  std::vector<int> row_order, col_order;
  double d = 1.0;
  for (int step = 0; step < n; ++step) {
    int pr = -1, pc = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (rdone[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (cdone[static_cast<std::size_t>(j)]) continue;
        if (std::abs(work(i, j)) > best) {
          best = std::abs(work(i, j));
          pr = i;
          pc = j;
        }
      }
    }
    if (best == 0.0) return 0.0;
    rdone[static_cast<std::size_t>(pr)] = true;
    cdone[static_cast<std::size_t>(pc)] = true;
    row_order.push_back(pr);
    col_order.push_back(pc);
    d *= work(pr, pc);
    for (int i = 0; i < n; ++i) {
      if (rdone[static_cast<std::size_t>(i)]) continue;
      double factor = work(i, pc) / work(pr, pc);
      for (int j = 0; j < n; ++j) {
        if (cdone[static_cast<std::size_t>(j)]) continue;
        work(i, j) -= factor * work(pr, j);
      }
    }
  }
  auto parity = [n](std::vector<int> p) {
    int swaps = 0;
    for (int i = 0; i < n; ++i) {
      while (p[static_cast<std::size_t>(i)] != i) {
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(p[static_cast<std::size_t>(i)])]);
        ++swaps;
      }
    }
    return swaps % 2;
  };
  if ((parity(row_order) + parity(col_order)) % 2 != 0) d = -d;
  return d;
}

Mat ref_inverse(const Mat& a) {
  // Gauss-Jordan on [A | I] with partial pivoting, independent of lu_factor.
  int n = a.rows();
  Mat aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1.0;
  }
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(aug(i, k)) > std::abs(aug(piv, k))) piv = i;
    if (aug(piv, k) == 0.0) throw SingularMatrixError("ref_inverse: singular");
    if (piv != k)
      for (int j = 0; j < 2 * n; ++j) std::swap(aug(k, j), aug(piv, j));
    double inv_pivot = 1.0 / aug(k, k);
    for (int j = 0; j < 2 * n; ++j) aug(k, j) *= inv_pivot;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      double f = aug(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < 2 * n; ++j) aug(i, j) -= f * aug(k, j);
    }
  }
  Mat inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

Mat rotation2(double angle) {
  Mat r(2, 2);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

RotationReport rotation_harness(const RadialJet& jet, const ReceiverSurface& surface,
                                const MediaPair& media, const Mat& r, bool corotate_receiver) {
  int n = jet.x.size();

  JacobianBundle before = assemble_bundle(jet, surface, media);
  MaResidual res_before = ma_residual(jet, surface, media, 1.0, 1.0);

  RadialJet rot;
  rot.x = r * jet.x;
  rot.rho = jet.rho;
  rot.grad = r * jet.grad;
  rot.hess = r * jet.hess * r.transposed();

  ReceiverSurface rotated_surface = surface;
  if (corotate_receiver) {
    Mat amb(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) amb(i, j) = r(i, j);
    amb(n, n) = 1.0;
    rotated_surface = make_rotated(surface, amb);
  }

  JacobianBundle after = assemble_bundle(rot, rotated_surface, media);
  MaResidual res_after = ma_residual(rot, rotated_surface, media, 1.0, 1.0);

  RotationReport rep;
  rep.det_dz_rel = std::abs(after.det_dz_factored - before.det_dz_factored) /
                   std::max(1.0, std::abs(before.det_dz_factored));
  rep.residual_rel =
      std::abs(res_after.raw - res_before.raw) / std::max(1.0, std::abs(res_before.raw));
  rep.max_rel = std::max(rep.det_dz_rel, rep.residual_rel);
  return rep;
}

}  // namespace refract
