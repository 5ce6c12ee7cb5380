#include "bandfem/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace bandfem {

namespace {

// Fused clamp + (I - phi H)^-2: one eigendecomposition per quadrature point.
// Identical to diffusion_tensor(phi, clamp_hessian(phi, H)) because clamping
// preserves the eigenvectors.
template <int N>
Mat<N> clamped_diffusion_tensor(double phi, const Mat<N>& H) {
  if (phi == 0.0) return Mat<N>::Identity();
  Eigen::SelfAdjointEigenSolver<Mat<N>> eig(phi * H);
  Vec<N> scale;
  for (int i = 0; i < N; ++i) {
    double lambda = eig.eigenvalues()[i];
    lambda = std::clamp(lambda, -0.5, 0.5);
    scale[i] = 1.0 / ((1.0 - lambda) * (1.0 - lambda));
  }
  const Mat<N>& V = eig.eigenvectors();
  return V * scale.asDiagonal() * V.transpose();
}

}  // namespace

template <int N>
Eigen::Matrix<double, N + 1, N + 1> element_matrix(
    const std::array<Vec<N>, N + 1>& verts,
    const std::array<Mat<N>, SimplexQuadrature<N>::npoints>& D,
    const std::array<double, SimplexQuadrature<N>::npoints>& alpha) {
  constexpr int nq = SimplexQuadrature<N>::npoints;
  const double vol = std::abs(simplex_volume<N>(verts));
  if (vol <= 0.0) throw std::invalid_argument("element_matrix: degenerate simplex");
  const auto grad = p1_gradients<N>(verts);
  const auto qbary = SimplexQuadrature<N>::barycentric();
  const double w = vol / nq;

  Eigen::Matrix<double, N + 1, N + 1> K = Eigen::Matrix<double, N + 1, N + 1>::Zero();
  for (int q = 0; q < nq; ++q) {
    for (int i = 0; i <= N; ++i) {
      const Vec<N> Dgi = D[q] * grad[i];
      for (int j = i; j <= N; ++j) {
        const double entry =
            w * (Dgi.dot(grad[j]) + alpha[q] * qbary[q][i] * qbary[q][j]);
        K(i, j) += entry;
        if (j != i) K(j, i) += entry;
      }
    }
  }
  return K;
}

template <int N>
FemSystem assemble(const BandMesh<N>& mesh, const BandSpec<N>& spec,
                   const ExtendedData<N>& data, HessianMode mode,
                   const RecoveredField<N>* field) {
  if (mode == HessianMode::recovered && field == nullptr)
    throw ConfigError("assemble: recovered-Hessian mode needs a RecoveredField");

  constexpr int nq = SimplexQuadrature<N>::npoints;
  const auto qbary = SimplexQuadrature<N>::barycentric();
  const int n = static_cast<int>(mesh.nodes.size());

  FemSystem sys;
  sys.dofs = n;
  sys.quadrature_points = nq;
  sys.mode = mode;
  sys.b.assign(n, 0.0);

  std::vector<Triplet> triplets;
  triplets.reserve(mesh.elems.size() * (N + 1) * (N + 1));

  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    const auto& el = mesh.elems[e];
    const auto verts = element_vertices(mesh, static_cast<int>(e));
    const double vol = std::abs(simplex_volume<N>(verts));
    const double w = vol / nq;

    std::array<Mat<N>, nq> D;
    std::array<double, nq> alpha_q, f_q;
    for (int q = 0; q < nq; ++q) {
      Vec<N> x = Vec<N>::Zero();
      for (int i = 0; i <= N; ++i) x += qbary[q][i] * verts[i];

      double phi;
      Mat<N> H;
      if (mode == HessianMode::exact) {
        phi = spec.surface.signed_distance(x);
        H = spec.surface.hessian(x);
      } else {
        phi = 0.0;
        H.setZero();
        for (int i = 0; i <= N; ++i) {
          phi += qbary[q][i] * field->phi[el[i]];
          H += qbary[q][i] * field->hess[el[i]];
        }
      }
      D[q] = clamped_diffusion_tensor<N>(phi, H);

      // Data is extended along exact normals in both modes.
      const Vec<N> p = spec.surface.closest_point(x);
      alpha_q[q] = data.alpha(p);
      f_q[q] = data.f(p);
    }

    const auto K = element_matrix<N>(verts, D, alpha_q);
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j <= N; ++j)
        triplets.push_back({el[i], el[j], K(i, j)});
      double load = 0.0;
      for (int q = 0; q < nq; ++q) load += w * f_q[q] * qbary[q][i];
      sys.b[el[i]] += load;
    }
  }

  sys.A = CsrMatrix::from_triplets(n, std::move(triplets));
  return sys;
}

template Eigen::Matrix<double, 3, 3> element_matrix<2>(
    const std::array<Vec<2>, 3>&, const std::array<Mat<2>, 3>&,
    const std::array<double, 3>&);
template Eigen::Matrix<double, 4, 4> element_matrix<3>(
    const std::array<Vec<3>, 4>&, const std::array<Mat<3>, 4>&,
    const std::array<double, 4>&);
template FemSystem assemble<2>(const BandMesh<2>&, const BandSpec<2>&,
                               const ExtendedData<2>&, HessianMode,
                               const RecoveredField<2>*);
template FemSystem assemble<3>(const BandMesh<3>&, const BandSpec<3>&,
                               const ExtendedData<3>&, HessianMode,
                               const RecoveredField<3>*);

}  // namespace bandfem
