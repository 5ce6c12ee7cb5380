#pragma once

// Discrete-surface error evaluation: Gamma_h is extracted as the zero level
// set of the P1 interpolant phi_h (marching simplices with linear edge
// interpolation), and u_h is compared against the exact solution pulled back
// through the exact closest-point projection.

#include <functional>
#include <vector>

#include "bandfem/band_mesh.hpp"

namespace bandfem {

template <int N>
struct SurfaceMesh {
  // Segments (2D) or triangles (3D), oriented along grad(phi).
  std::vector<std::array<Vec<N>, N>> facets;
  std::vector<int> parent;  // band-mesh element that produced the facet
};

// Zero level set of phi_h. Nodal zeros are nudged by +1e-12*h to keep the
// marching topology nondegenerate; tetrahedra with four edge crossings yield
// two triangles split along the shorter quad diagonal.
template <int N>
SurfaceMesh<N> extract_surface(const BandMesh<N>& mesh, const std::vector<double>& phi_h);

template <int N>
double surface_measure(const SurfaceMesh<N>& surface);

// sqrt of the facet-quadrature sum of (u_h - u_exact(p(x)))^2. Default rule:
// 2-point Gauss per segment, midpoint rule per triangle; `quad_points` can
// raise it (2D: 4-point Gauss, 3D: 6-point) for saturation checks.
template <int N>
double surface_l2_error(const std::vector<double>& u_h,
                        const std::function<double(const Vec<N>&)>& u_exact,
                        const SurfaceMesh<N>& surface, const BandMesh<N>& mesh,
                        const Surface<N>& geom, int quad_points = 0);

// Max of |u_h - u_exact(p(x))| over facet quadrature points and vertices.
template <int N>
double surface_max_error(const std::vector<double>& u_h,
                         const std::function<double(const Vec<N>&)>& u_exact,
                         const SurfaceMesh<N>& surface, const BandMesh<N>& mesh,
                         const Surface<N>& geom);

// sqrt( sum over elements of |T| (n(barycenter) . grad u_h)^2 ): the discrete
// check that solutions of the band equation are constant along normals.
template <int N>
double normal_derivative_norm(const std::vector<double>& u_h, const BandMesh<N>& mesh,
                              const Surface<N>& geom);

// p = dim * log(err_prev/err_cur) / log(dof_cur/dof_prev); NaN marks an
// undefined order (nonpositive errors or non-increasing dof count).
double convergence_order(double err_prev, double err_cur, double dof_prev,
                         double dof_cur, int dim);

// One refinement level of a convergence study. Orders are NaN on level 0.
struct SurfaceErrorRow {
  int level = 0;
  long dofs = 0;
  double h = 0.0;
  double l2 = 0.0;
  double l2_order = 0.0;
  double cnorm = 0.0;
  double cnorm_order = 0.0;
  double normal_deriv = 0.0;
  int iters = 0;
};

}  // namespace bandfem
