#pragma once

// Analytic level-set geometry for the benchmark surfaces (circle, sphere,
// torus). Each surface provides its exact signed distance phi, the unit
// normal n = grad(phi), the Hessian H = D^2 phi, and the closest-point
// projection p(x) = x - phi(x) n(x). All derivatives are closed-form, so the
// narrow-band solver sees no finite-difference noise in exact-Hessian mode.

#include <cmath>
#include <utility>

#include "bandfem/common.hpp"

namespace bandfem {

enum class SurfaceKind { Circle, Sphere, Torus };

template <int N>
class Surface {
  static_assert(N == 2 || N == 3, "surfaces live in R^2 or R^3");

 public:
  static Surface circle(double radius)
    requires(N == 2)
  {
    return Surface(SurfaceKind::Circle, radius, 0.0);
  }

  static Surface sphere(double radius)
    requires(N == 3)
  {
    return Surface(SurfaceKind::Sphere, radius, 0.0);
  }

  static Surface torus(double major_radius, double minor_radius)
    requires(N == 3)
  {
    return Surface(SurfaceKind::Torus, major_radius, minor_radius);
  }

  SurfaceKind kind() const { return kind_; }
  double major_radius() const { return R_; }
  double minor_radius() const { return r_; }

  // phi(x): exact signed distance, negative inside the surface.
  double signed_distance(const Vec<N>& x) const {
    if constexpr (N == 3) {
      if (kind_ == SurfaceKind::Torus) {
        const auto [e_hat, s, w] = torus_frame(x);
        (void)e_hat;
        (void)s;
        return w - r_;
      }
    }
    return radial_norm(x) - R_;
  }

  // n(x) = grad(phi), a unit vector everywhere off the medial axis.
  Vec<N> normal(const Vec<N>& x) const {
    if constexpr (N == 3) {
      if (kind_ == SurfaceKind::Torus) {
        const auto [e_hat, s, w] = torus_frame(x);
        Vec<N> n = (s / w) * e_hat;
        n[2] += x[2] / w;
        return n;
      }
    }
    return x / radial_norm(x);
  }

  // H(x) = D^2 phi. Its eigenvalues are the level-set principal curvatures
  // kappa_i(x) plus an exact zero along n (H n = 0).
  Mat<N> hessian(const Vec<N>& x) const {
    if constexpr (N == 3) {
      if (kind_ == SurfaceKind::Torus) {
        // With rho = |(x1,x2)|, e = (x1,x2,0)/rho, s = rho - R,
        // w = sqrt(x3^2 + s^2), t = (-x2,x1,0)/rho, q = x3*e - s*e3:
        //   H = s/(w*rho) t t^T + 1/w^3 q q^T,  eigenvalues {s/(w rho), 1/w, 0}.
        const auto [e_hat, s, w] = torus_frame(x);
        const double rho = std::hypot(x[0], x[1]);
        Vec<N> t = Vec<N>::Zero();
        t[0] = -x[1] / rho;
        t[1] = x[0] / rho;
        Vec<N> q = x[2] * e_hat;
        q[2] -= s;
        return (s / (w * rho)) * (t * t.transpose()) +
               (1.0 / (w * w * w)) * (q * q.transpose());
      }
    }
    const double nrm = radial_norm(x);
    const Vec<N> n = x / nrm;
    return (Mat<N>::Identity() - n * n.transpose()) / nrm;
  }

  // p(x) = x - phi(x) n(x); exact foot of the normal since phi is a distance.
  Vec<N> closest_point(const Vec<N>& x) const {
    return x - signed_distance(x) * normal(x);
  }

  // Sufficient band half-width (4 max over Gamma of sum_i |kappa_i|)^-1.
  // Wider bands remain usable: the assembler clamps phi*H pointwise.
  double max_band_width() const {
    switch (kind_) {
      case SurfaceKind::Circle:
        return R_ / 4.0;
      case SurfaceKind::Sphere:
        return R_ / 8.0;
      case SurfaceKind::Torus:
        // |kappa_1| + |kappa_2| peaks at the inner equator: 1/r + 1/(R-r).
        return 1.0 / (4.0 * (1.0 / r_ + 1.0 / (R_ - r_)));
    }
    return 0.0;
  }

  // Axis-aligned box containing the closed band {|phi| <= d}.
  std::pair<Vec<N>, Vec<N>> band_bounding_box(double d) const {
    Vec<N> lo, hi;
    hi.setConstant(R_ + d);
    if constexpr (N == 3) {
      if (kind_ == SurfaceKind::Torus) {
        hi[0] = hi[1] = R_ + r_ + d;
        hi[2] = r_ + d;
      }
    }
    lo = -hi;
    return {lo, hi};
  }

 private:
  Surface(SurfaceKind kind, double R, double r) : kind_(kind), R_(R), r_(r) {
    if (R_ <= 0.0) throw ConfigError("surface radius must be positive");
    if (kind_ == SurfaceKind::Torus && (r_ <= 0.0 || r_ >= R_))
      throw ConfigError("torus requires 0 < minor radius < major radius");
  }

  double radial_norm(const Vec<N>& x) const {
    const double nrm = x.norm();
    if (nrm < kMedialAxisTol)
      throw std::domain_error("evaluation at the center: grad(phi) undefined");
    return nrm;
  }

  // Returns (e_hat, s, w): unit cylindrical-radial direction, signed offset
  // from the center circle in the plane, and distance to the center circle.
  std::tuple<Vec<N>, double, double> torus_frame(const Vec<N>& x) const
    requires(N == 3)
  {
    const double rho = std::hypot(x[0], x[1]);
    if (rho < kMedialAxisTol)
      throw std::domain_error("evaluation on the torus axis: grad(phi) undefined");
    const double s = rho - R_;
    const double w = std::hypot(x[2], s);
    if (w < kMedialAxisTol)
      throw std::domain_error("evaluation on the torus center circle: grad(phi) undefined");
    Vec<N> e_hat;
    e_hat[0] = x[0] / rho;
    e_hat[1] = x[1] / rho;
    e_hat[2] = 0.0;
    return {e_hat, s, w};
  }

  static constexpr double kMedialAxisTol = 1e-8;

  SurfaceKind kind_;
  double R_;
  double r_;
};

// D = (I - phi H)^-2, the elliptic coefficient of the band equation.
// Callers are expected to clamp (phi, H) first; a genuinely singular
// (I - phi H) here means that contract was broken.
template <int N>
Mat<N> diffusion_tensor(double phi, const Mat<N>& H) {
  if (phi == 0.0) return Mat<N>::Identity();
  Eigen::SelfAdjointEigenSolver<Mat<N>> eig(H);
  Vec<N> scale;
  for (int i = 0; i < N; ++i) {
    const double factor = 1.0 - phi * eig.eigenvalues()[i];
    if (std::abs(factor) < 1e-12)
      throw std::invalid_argument(
          "diffusion tensor singular: spectrum of phi*H reaches 1 (clamp upstream)");
    scale[i] = 1.0 / (factor * factor);
  }
  const Mat<N>& V = eig.eigenvectors();
  return V * scale.asDiagonal() * V.transpose();
}

}  // namespace bandfem
