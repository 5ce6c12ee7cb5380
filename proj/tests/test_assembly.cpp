// P1 assembly of the band equation: local matrices against hand values,
// quadrature rule pins, global symmetry/definiteness, the constant-solution
// patch test, the normal direction as an eigenvector of the diffusion tensor,
// and the coercivity bound relative to the plain Laplacian.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <random>

#include "bandfem/assembly.hpp"
#include "doctest.h"

using namespace bandfem;

namespace {

template <int N>
std::array<Mat<N>, SimplexQuadrature<N>::npoints> identity_tensor() {
  std::array<Mat<N>, SimplexQuadrature<N>::npoints> D;
  D.fill(Mat<N>::Identity());
  return D;
}

template <int N>
std::array<double, SimplexQuadrature<N>::npoints> constant_alpha(double a) {
  std::array<double, SimplexQuadrature<N>::npoints> alpha;
  alpha.fill(a);
  return alpha;
}

// Dense mirror of a CSR matrix, for symmetry checks on small systems.
Eigen::MatrixXd to_dense(const CsrMatrix& A) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.n, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) M(i, A.col[k]) += A.val[k];
  return M;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("quadrature rules: point counts and barycentric coordinates") {
  CHECK(SimplexQuadrature<2>::npoints == 3);
  CHECK(SimplexQuadrature<3>::npoints == 4);

  // Triangles: edge midpoints.
  const auto q2 = SimplexQuadrature<2>::barycentric();
  for (const auto& p : q2) {
    double sum = 0.0;
    int zeros = 0;
    for (double l : p) {
      sum += l;
      if (l == 0.0) ++zeros;
      else CHECK(l == doctest::Approx(0.5));
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(zeros == 1);
  }

  // Tetrahedra: symmetric 4-point rule, exact for quadratics.
  const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
  const double b = (5.0 - std::sqrt(5.0)) / 20.0;
  const auto q3 = SimplexQuadrature<3>::barycentric();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(q3[i][j] == doctest::Approx(i == j ? a : b).epsilon(1e-15));
}

TEST_CASE("element matrix of the unit right triangle, identity diffusion") {
  const std::array<Vec<2>, 3> verts = {Vec<2>(0, 0), Vec<2>(1, 0), Vec<2>(0, 1)};
  const auto K = element_matrix<2>(verts, identity_tensor<2>(), constant_alpha<2>(0.0));
  Eigen::Matrix3d expect;
  expect << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  expect *= 0.5;
  CHECK((K - expect).norm() < 1e-14);
}

TEST_CASE("element mass part: alpha integrates to alpha |T| with row sums") {
  // With D = 0 unavailable, subtract the alpha = 0 stiffness instead.
  const std::array<Vec<2>, 3> verts = {Vec<2>(0.2, 0.1), Vec<2>(1.1, 0.3), Vec<2>(0.4, 0.9)};
  const auto K0 = element_matrix<2>(verts, identity_tensor<2>(), constant_alpha<2>(0.0));
  const auto K1 = element_matrix<2>(verts, identity_tensor<2>(), constant_alpha<2>(3.0));
  const Eigen::Matrix3d M = K1 - K0;
  const double vol = simplex_volume<2>(verts);
  CHECK(M.sum() == doctest::Approx(3.0 * vol).epsilon(1e-13));
  CHECK((M - M.transpose()).norm() < 1e-15);
  // Stiffness annihilates constants.
  CHECK((K0 * Eigen::Vector3d::Ones()).norm() < 1e-14);
}

TEST_CASE("2d stiffness is invariant under uniform scaling") {
  const std::array<Vec<2>, 3> verts = {Vec<2>(0.2, 0.1), Vec<2>(1.1, 0.3), Vec<2>(0.4, 0.9)};
  std::array<Vec<2>, 3> scaled;
  for (int i = 0; i < 3; ++i) scaled[i] = 7.5 * verts[i];
  const auto K = element_matrix<2>(verts, identity_tensor<2>(), constant_alpha<2>(0.0));
  const auto Ks = element_matrix<2>(scaled, identity_tensor<2>(), constant_alpha<2>(0.0));
  CHECK((K - Ks).norm() < 1e-13);
}

TEST_CASE("assembled system: symmetric, positive definite, consistent source") {
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const ExtendedData<2> data{[](const Vec<2>&) { return 1.0; },
                             [](const Vec<2>&) { return 2.5; }};
  const FemSystem sys = assemble(m, spec, data, HessianMode::exact);
  REQUIRE(sys.dofs == static_cast<int>(m.nodes.size()));
  CHECK(sys.quadrature_points == 3);

  const Eigen::MatrixXd A = to_dense(sys.A);
  CHECK((A - A.transpose()).lpNorm<Eigen::Infinity>() <
        1e-13 * A.lpNorm<Eigen::Infinity>());

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(sys.dofs);
    for (int i = 0; i < sys.dofs; ++i) x[i] = unif(rng);
    CHECK(x.dot(A * x) > 0.0);
  }

  // f constant: the load vector integrates f over the band.
  double vol = 0.0;
  for (std::size_t e = 0; e < m.elems.size(); ++e)
    vol += simplex_volume<2>(element_vertices(m, e));
  double bsum = 0.0;
  for (double v : sys.b) bsum += v;
  CHECK(bsum == doctest::Approx(2.5 * vol).epsilon(1e-12));
}

TEST_CASE("stiffness part annihilates constants globally") {
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const ExtendedData<2> data{[](const Vec<2>&) { return 0.0; },
                             [](const Vec<2>&) { return 0.0; }};
  const FemSystem sys = assemble(m, spec, data, HessianMode::exact);
  const std::vector<double> ones(sys.dofs, 1.0);
  const std::vector<double> r = matvec(sys.A, ones);
  for (double v : r) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("constant solutions are reproduced through the full solve") {
  // With alpha = 1 and f = c the continuous and discrete solutions are both
  // identically c: the load and the mass action on the constant coincide
  // quadrature point by quadrature point.
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const double c = 3.25;
  const ExtendedData<2> data{[](const Vec<2>&) { return 1.0; },
                             [c](const Vec<2>&) { return c; }};
  const FemSystem sys = assemble(m, spec, data, HessianMode::exact);
  const PcgResult sol = pcg(sys.A, sys.b, 1e-13, 10000);
  REQUIRE(sol.report.converged);
  double worst = 0.0;
  for (double u : sol.x) worst = std::max(worst, std::abs(u - c));
  CHECK(worst < 1e-9);
}

TEST_CASE("diffusion tensor keeps the normal direction fixed in the band") {
  // (I - phi H)^-2 n = n because H n = 0: verified at every quadrature point
  // the assembler visits.
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const auto bary = SimplexQuadrature<2>::barycentric();
  double worst = 0.0;
  for (std::size_t e = 0; e < m.elems.size(); ++e) {
    const auto verts = element_vertices(m, e);
    for (const auto& lambda : bary) {
      Vec<2> x = Vec<2>::Zero();
      for (int i = 0; i < 3; ++i) x += lambda[i] * verts[i];
      const Mat<2> D =
          diffusion_tensor<2>(spec.surface.signed_distance(x), spec.surface.hessian(x));
      const Vec<2> n = spec.surface.normal(x);
      worst = std::max(worst, (D * n - n).norm());
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("energy dominates 4/9 of the flat Laplacian plus the mass term") {
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const ExtendedData<2> one{[](const Vec<2>&) { return 1.0; },
                            [](const Vec<2>&) { return 0.0; }};
  const ExtendedData<2> zero{[](const Vec<2>&) { return 0.0; },
                             [](const Vec<2>&) { return 0.0; }};
  const FemSystem full = assemble(m, spec, one, HessianMode::exact);
  const FemSystem stiff = assemble(m, spec, zero, HessianMode::exact);
  // Identity diffusion tensor: interpolate a field that is identically zero,
  // so the clamp is a no-op and (I - phi H)^-2 = I.
  RecoveredField<2> flat;
  flat.phi.assign(m.nodes.size(), 0.0);
  flat.hess.assign(m.nodes.size(), Mat<2>::Zero());
  flat.provenance = FieldProvenance::recovered;
  const FemSystem lap = assemble(m, spec, zero, HessianMode::recovered, &flat);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(m.nodes.size());
    for (double& v : u) v = unif(rng);
    const double e_full = dot(u, matvec(full.A, u));
    const double e_stiff = dot(u, matvec(stiff.A, u));
    const double e_lap = dot(u, matvec(lap.A, u));
    const double e_mass = e_full - e_stiff;
    CHECK(e_mass > 0.0);
    CHECK(e_full + 1e-12 >= (4.0 / 9.0) * e_lap + e_mass);
  }
}

TEST_CASE("recovered mode needs a field and matches the exact sparsity") {
  const BandSpec<2> spec{Surface<2>::circle(1.0), 0.05};
  const BandMesh<2> m = build_band_mesh(spec, 0.05);
  const ExtendedData<2> data{[](const Vec<2>&) { return 1.0; },
                             [](const Vec<2>&) { return 1.0; }};
  CHECK_THROWS_AS(assemble(m, spec, data, HessianMode::recovered), ConfigError);

  const RecoveredField<2> field = make_recovered_field(m, spec.surface);
  const FemSystem ex = assemble(m, spec, data, HessianMode::exact);
  const FemSystem rec = assemble(m, spec, data, HessianMode::recovered, &field);
  CHECK(rec.mode == HessianMode::recovered);
  CHECK(ex.A.row_ptr == rec.A.row_ptr);
  CHECK(ex.A.col == rec.A.col);
}
