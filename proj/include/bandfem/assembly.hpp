#pragma once

// P1 Galerkin assembly of the band equation
//   integral over Omega_d of (I - phi H)^-2 grad(u) . grad(v) + alpha^e u v
//     = integral of f^e v,
// with the natural boundary condition (n . grad u = 0 on |phi| = d)
// contributing no boundary term. Data alpha and f live on Gamma and are
// extended as constants along normals: g^e(x) = g(p(x)).

#include <array>
#include <functional>

#include "bandfem/band_mesh.hpp"
#include "bandfem/hessian_recovery.hpp"
#include "bandfem/sparse.hpp"

namespace bandfem {

template <int N>
using SurfaceFn = std::function<double(const Vec<N>&)>;

template <int N>
struct ExtendedData {
  SurfaceFn<N> alpha;  // reaction coefficient on Gamma
  SurfaceFn<N> f;      // source on Gamma
};

enum class HessianMode { exact, recovered };

struct FemSystem {
  CsrMatrix A;
  std::vector<double> b;
  int dofs = 0;
  int quadrature_points = 0;  // per element
  HessianMode mode = HessianMode::exact;
};

// Normal extension: g evaluated at the closest point of x.
template <int N>
double extend_data(const SurfaceFn<N>& g, const Surface<N>& surface, const Vec<N>& x) {
  return g(surface.closest_point(x));
}

// Quadrature on the reference simplex, exact for quadratics: edge-midpoint
// rule on triangles (3 points), the symmetric 4-point rule on tetrahedra.
// Equal weights |T|/n in both cases.
template <int N>
struct SimplexQuadrature {
  static constexpr int npoints = N == 2 ? 3 : 4;
  // Barycentric coordinates of the quadrature points.
  static std::array<std::array<double, N + 1>, npoints> barycentric() {
    if constexpr (N == 2) {
      return {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
    } else {
      const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
      const double b = (5.0 - std::sqrt(5.0)) / 20.0;
      return {{{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}}};
    }
  }
};

// Local stiffness+mass matrix with the diffusion tensor and reaction
// coefficient sampled at the element's quadrature points.
template <int N>
Eigen::Matrix<double, N + 1, N + 1> element_matrix(
    const std::array<Vec<N>, N + 1>& verts,
    const std::array<Mat<N>, SimplexQuadrature<N>::npoints>& D,
    const std::array<double, SimplexQuadrature<N>::npoints>& alpha);

// Global system. In exact mode the coefficient uses analytic (phi, H) at the
// quadrature points; in recovered mode phi_h and H_h are interpolated there
// from `field`. Both are clamped before (I - phi H)^-2 is formed.
template <int N>
FemSystem assemble(const BandMesh<N>& mesh, const BandSpec<N>& spec,
                   const ExtendedData<N>& data, HessianMode mode,
                   const RecoveredField<N>* field = nullptr);

}  // namespace bandfem
