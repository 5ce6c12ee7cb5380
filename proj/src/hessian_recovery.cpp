#include "bandfem/hessian_recovery.hpp"

#include <cmath>

namespace bandfem {

template <int N>
std::vector<double> interpolate_phi(const BandMesh<N>& mesh, const Surface<N>& surface) {
  std::vector<double> phi(mesh.nodes.size());
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
    phi[n] = surface.signed_distance(mesh.nodes[n]);
  return phi;
}

namespace {

// One lumped-L2 pass: nodal volume-weighted average of the piecewise-constant
// gradient of the P1 field with nodal values `values` (D columns at a time).
template <int N, int D>
std::vector<Eigen::Matrix<double, N, D>> averaged_gradient(
    const BandMesh<N>& mesh, const std::vector<Eigen::Matrix<double, 1, D>>& values) {
  std::vector<Eigen::Matrix<double, N, D>> grad(
      mesh.nodes.size(), Eigen::Matrix<double, N, D>::Zero());
  std::vector<double> weight(mesh.nodes.size(), 0.0);

  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    const auto verts = element_vertices(mesh, static_cast<int>(e));
    const auto basis = p1_gradients<N>(verts);
    const double vol = std::abs(simplex_volume<N>(verts));
    Eigen::Matrix<double, N, D> g = Eigen::Matrix<double, N, D>::Zero();
    for (int i = 0; i <= N; ++i) g += basis[i] * values[mesh.elems[e][i]];
    for (int i = 0; i <= N; ++i) {
      grad[mesh.elems[e][i]] += vol * g;
      weight[mesh.elems[e][i]] += vol;
    }
  }
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (weight[n] == 0.0)
      throw std::runtime_error("hessian recovery: isolated mesh node");
    grad[n] /= weight[n];
  }
  return grad;
}

}  // namespace

template <int N>
std::vector<Mat<N>> recover_hessian(const BandMesh<N>& mesh,
                                    const std::vector<double>& phi_h) {
  std::vector<Eigen::Matrix<double, 1, 1>> scalar(phi_h.size());
  for (std::size_t n = 0; n < phi_h.size(); ++n) scalar[n][0] = phi_h[n];
  const auto g = averaged_gradient<N, 1>(mesh, scalar);

  std::vector<Eigen::Matrix<double, 1, N>> g_rows(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) g_rows[n] = g[n].transpose();
  const auto raw = averaged_gradient<N, N>(mesh, g_rows);

  std::vector<Mat<N>> hess(raw.size());
  for (std::size_t n = 0; n < raw.size(); ++n)
    hess[n] = 0.5 * (raw[n] + raw[n].transpose());
  return hess;
}

template <int N>
Mat<N> clamp_hessian(double phi, const Mat<N>& H) {
  if (phi == 0.0) return H;
  Eigen::SelfAdjointEigenSolver<Mat<N>> eig(phi * H);
  Vec<N> lambda = eig.eigenvalues();
  bool clamped = false;
  for (int i = 0; i < N; ++i)
    if (std::abs(lambda[i]) > 0.5) {
      lambda[i] = lambda[i] > 0.0 ? 0.5 : -0.5;
      clamped = true;
    }
  if (!clamped) return H;  // exact identity when the bound already holds
  const Mat<N>& V = eig.eigenvectors();
  return V * lambda.asDiagonal() * V.transpose() / phi;
}

template <int N>
RecoveredField<N> make_recovered_field(const BandMesh<N>& mesh, const Surface<N>& surface) {
  RecoveredField<N> field;
  field.phi = interpolate_phi(mesh, surface);
  field.hess = recover_hessian(mesh, field.phi);
  field.provenance = FieldProvenance::recovered;
  return field;
}

template std::vector<double> interpolate_phi<2>(const BandMesh<2>&, const Surface<2>&);
template std::vector<double> interpolate_phi<3>(const BandMesh<3>&, const Surface<3>&);
template std::vector<Mat<2>> recover_hessian<2>(const BandMesh<2>&, const std::vector<double>&);
template std::vector<Mat<3>> recover_hessian<3>(const BandMesh<3>&, const std::vector<double>&);
template Mat<2> clamp_hessian<2>(double, const Mat<2>&);
template Mat<3> clamp_hessian<3>(double, const Mat<3>&);
template RecoveredField<2> make_recovered_field<2>(const BandMesh<2>&, const Surface<2>&);
template RecoveredField<3> make_recovered_field<3>(const BandMesh<3>&, const Surface<3>&);

}  // namespace bandfem
