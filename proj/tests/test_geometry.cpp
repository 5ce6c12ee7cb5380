// Geometry oracles: closed-form signed distances, normals, Hessians and
// closest-point projections for the circle, sphere and torus, cross-checked
// against finite differences, plus the identities the solver relies on
// (unit gradient, H n = 0, idempotent projection, diffusion-tensor spectrum).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "bandfem/geometry.hpp"
#include "doctest.h"

using namespace bandfem;

namespace {

// Central-difference gradient and Hessian of the signed distance, used as an
// independent check on the closed forms. Step 1e-5 balances truncation
// against cancellation: both leave residuals well under the tolerances used.
template <int N>
Vec<N> fd_gradient(const Surface<N>& s, const Vec<N>& x, double step = 1e-5) {
  Vec<N> g;
  for (int i = 0; i < N; ++i) {
    Vec<N> xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (s.signed_distance(xp) - s.signed_distance(xm)) / (2.0 * step);
  }
  return g;
}

template <int N>
Mat<N> fd_hessian(const Surface<N>& s, const Vec<N>& x, double step = 1e-5) {
  Mat<N> H;
  for (int i = 0; i < N; ++i) {
    Vec<N> xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const Vec<N> gp = fd_gradient(s, xp, step);
    const Vec<N> gm = fd_gradient(s, xm, step);
    for (int j = 0; j < N; ++j) H(i, j) = (gp[j] - gm[j]) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

// Fixed-seed sample of points inside the band {|phi| < d}.
template <int N>
std::vector<Vec<N>> band_points(const Surface<N>& s, double d, int count,
                                unsigned seed) {
  std::mt19937 rng(seed);
  const auto [lo, hi] = s.band_bounding_box(d);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (int i = 0; i < N; ++i) dist.emplace_back(lo[i], hi[i]);
  std::vector<Vec<N>> pts;
  while (static_cast<int>(pts.size()) < count) {
    Vec<N> x;
    for (int i = 0; i < N; ++i) x[i] = dist[i](rng);
    if (std::abs(s.signed_distance(x)) < d) pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("circle signed distance, normal, Hessian at pinned points") {
  const auto s = Surface<2>::circle(1.0);
  CHECK(s.signed_distance(Vec<2>(2.0, 0.0)) == doctest::Approx(1.0));
  CHECK(s.signed_distance(Vec<2>(0.5, 0.0)) == doctest::Approx(-0.5));
  CHECK(s.normal(Vec<2>(2.0, 0.0))[0] == doctest::Approx(1.0));
  CHECK(s.normal(Vec<2>(2.0, 0.0))[1] == doctest::Approx(0.0));

  // At (1.25, 0): H = (I - n n^T)/|x| = diag(0, 0.8).
  const Mat<2> H = s.hessian(Vec<2>(1.25, 0.0));
  CHECK(H(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(H(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(H(1, 1) == doctest::Approx(0.8));
}

TEST_CASE("sphere signed distance and Hessian at pinned points") {
  const auto s = Surface<3>::sphere(1.0);
  CHECK(s.signed_distance(Vec<3>(0.0, 0.0, 0.5)) == doctest::Approx(-0.5));
  const Mat<3> H = s.hessian(Vec<3>(0.0, 0.0, 1.25));
  CHECK(H(0, 0) == doctest::Approx(0.8));
  CHECK(H(1, 1) == doctest::Approx(0.8));
  CHECK(H(2, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(H(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("torus signed distance, closest point and normal at pinned points") {
  const auto s = Surface<3>::torus(1.0, 0.6);
  // (1, 0, 0.6) is the top of the tube over the center circle.
  CHECK(s.signed_distance(Vec<3>(1.0, 0.0, 0.6)) == doctest::Approx(0.0).epsilon(1e-14));
  // (1.8, 0, 0) projects radially onto the outer equator at (1.6, 0, 0).
  const Vec<3> p = s.closest_point(Vec<3>(1.8, 0.0, 0.0));
  CHECK(p[0] == doctest::Approx(1.6));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(0.0).epsilon(1e-14));
  const Vec<3> n = s.normal(Vec<3>(1.8, 0.0, 0.0));
  CHECK(n[0] == doctest::Approx(1.0));
  CHECK(n[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(n[2] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("sufficient band widths") {
  CHECK(Surface<2>::circle(1.0).max_band_width() == doctest::Approx(0.25));
  CHECK(Surface<3>::sphere(1.0).max_band_width() == doctest::Approx(0.125));
  // Torus: curvature sum peaks at the inner equator, 1/r + 1/(R-r).
  CHECK(Surface<3>::torus(1.0, 0.6).max_band_width() == doctest::Approx(0.06));
}

TEST_CASE("closed forms match finite differences") {
  const auto circle = Surface<2>::circle(1.0);
  for (const auto& x : band_points(circle, 0.2, 50, 11u)) {
    CHECK((circle.normal(x) - fd_gradient(circle, x)).norm() < 1e-6);
    CHECK((circle.hessian(x) - fd_hessian(circle, x)).norm() < 1e-4);
  }
  const auto torus = Surface<3>::torus(1.0, 0.6);
  for (const auto& x : band_points(torus, 0.1, 50, 13u)) {
    CHECK((torus.normal(x) - fd_gradient(torus, x)).norm() < 1e-6);
    CHECK((torus.hessian(x) - fd_hessian(torus, x)).norm() < 1e-4);
  }
  const auto sphere = Surface<3>::sphere(1.0);
  for (const auto& x : band_points(sphere, 0.2, 50, 17u)) {
    CHECK((sphere.normal(x) - fd_gradient(sphere, x)).norm() < 1e-6);
    CHECK((sphere.hessian(x) - fd_hessian(sphere, x)).norm() < 1e-4);
  }
}

TEST_CASE("level-set identities at 1000 random band points per surface") {
  const auto circle = Surface<2>::circle(1.0);
  for (const auto& x : band_points(circle, 0.05, 1000, 101u)) {
    CHECK(std::abs(circle.normal(x).norm() - 1.0) < 1e-12);
    CHECK((circle.hessian(x) * circle.normal(x)).norm() < 1e-12);
    const Vec<2> p = circle.closest_point(x);
    CHECK(std::abs(circle.signed_distance(p)) < 1e-12);
    CHECK((circle.closest_point(p) - p).norm() < 1e-10);
  }
  const auto sphere = Surface<3>::sphere(1.0);
  for (const auto& x : band_points(sphere, 0.1, 1000, 103u)) {
    CHECK(std::abs(sphere.normal(x).norm() - 1.0) < 1e-12);
    CHECK((sphere.hessian(x) * sphere.normal(x)).norm() < 1e-12);
    const Vec<3> p = sphere.closest_point(x);
    CHECK(std::abs(sphere.signed_distance(p)) < 1e-12);
    CHECK((sphere.closest_point(p) - p).norm() < 1e-10);
  }
  const auto torus = Surface<3>::torus(1.0, 0.6);
  for (const auto& x : band_points(torus, 0.1, 1000, 107u)) {
    CHECK(std::abs(torus.normal(x).norm() - 1.0) < 1e-12);
    CHECK((torus.hessian(x) * torus.normal(x)).norm() < 1e-12);
    const Vec<3> p = torus.closest_point(x);
    CHECK(std::abs(torus.signed_distance(p)) < 1e-12);
    CHECK((torus.closest_point(p) - p).norm() < 1e-10);
  }
}

TEST_CASE("diffusion tensor pinned value and spectrum bounds") {
  const auto s = Surface<2>::circle(1.0);
  // At (1.25, 0): phi = 0.25, H = diag(0, 0.8), so I - phi H = diag(1, 0.8)
  // and D = diag(1, 1/0.64) = diag(1, 1.5625).
  const Mat<2> D = diffusion_tensor(0.25, s.hessian(Vec<2>(1.25, 0.0)));
  CHECK(D(0, 0) == doctest::Approx(1.0));
  CHECK(D(1, 1) == doctest::Approx(1.5625));
  CHECK(D(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

  // phi = 0 must short-circuit to the identity.
  CHECK((diffusion_tensor(0.0, s.hessian(Vec<2>(1.25, 0.0))) - Mat<2>::Identity())
            .norm() == doctest::Approx(0.0));

  // Whenever the spectrum of phi*H stays within [-1/2, 1/2], the eigenvalues
  // of D = (I - phi H)^-2 lie in [4/9, 4].
  const auto torus = Surface<3>::torus(1.0, 0.6);
  for (const auto& x : band_points(torus, 0.05, 200, 109u)) {
    const double phi = torus.signed_distance(x);
    const Mat<3> D3 = diffusion_tensor(phi, torus.hessian(x));
    Eigen::SelfAdjointEigenSolver<Mat<3>> eig(D3);
    CHECK(eig.eigenvalues().minCoeff() > 4.0 / 9.0 - 1e-12);
    CHECK(eig.eigenvalues().maxCoeff() < 4.0 + 1e-12);
  }
}

TEST_CASE("bad parameters and medial-axis evaluations are rejected") {
  CHECK_THROWS_AS(Surface<2>::circle(0.0), ConfigError);
  CHECK_THROWS_AS(Surface<2>::circle(-1.0), ConfigError);
  CHECK_THROWS_AS(Surface<3>::torus(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(Surface<3>::torus(1.0, 1.5), ConfigError);

  const auto circle = Surface<2>::circle(1.0);
  CHECK_THROWS_AS(circle.normal(Vec<2>(0.0, 0.0)), std::domain_error);
  const auto torus = Surface<3>::torus(1.0, 0.6);
  // The torus center circle (rho = R, z = 0) is its medial axis.
  CHECK_THROWS_AS(torus.normal(Vec<3>(1.0, 0.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(torus.normal(Vec<3>(0.0, 0.0, 0.5)), std::domain_error);
}
