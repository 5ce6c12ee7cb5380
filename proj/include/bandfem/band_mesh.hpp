#pragma once

// Simplicial meshing of the narrow band {|phi| < d}: a structured background
// grid (same-diagonal triangles in 2D, six-tetrahedra Kuhn split in 3D) is
// filtered by the barycenter test |phi(bary)| < d, and mesh-boundary nodes
// are snapped onto the level sets |phi| = d along grad(phi) — exact in one
// step because phi is a distance function. Regular red refinement keeps the
// hierarchy conforming and re-snaps boundary nodes each level.

#include <array>
#include <cstdint>
#include <vector>

#include "bandfem/geometry.hpp"

namespace bandfem {

enum class BoundarySide : std::uint8_t { none = 0, inner = 1, outer = 2 };

template <int N>
struct BandSpec {
  Surface<N> surface;
  double d;  // band half-width
};

template <int N>
struct BandMesh {
  std::vector<Vec<N>> nodes;
  std::vector<std::array<int, N + 1>> elems;  // positive orientation
  std::vector<BoundarySide> boundary;         // per node; |phi| = d when set
  std::vector<double> h_elem;                 // element diameters
  int level = 0;
  double grid_h = 0.0;   // background cell size at this level
  int discarded = 0;     // elements dropped by the snap-inversion guard

  double h_max() const;
  double h_min() const;
};

struct MeshQuality {
  double beta = 0.0;  // sup over cut elements of diam / inscribed-ball diameter
  double h_min = 0.0;
  double h_max = 0.0;
  int elements = 0;
  int nodes = 0;
};

// Background-grid band mesh at target size h. Requires h <= d so the band is
// at least two element layers thick; throws ConfigError otherwise.
template <int N>
BandMesh<N> build_band_mesh(const BandSpec<N>& spec, double h);

// Regular red refinement (4 children per triangle, 8 per tetrahedron with the
// shortest-diagonal split of the interior octahedron); new and old boundary
// nodes are re-snapped onto |phi| = d.
template <int N>
BandMesh<N> refine(const BandMesh<N>& mesh, const BandSpec<N>& spec);

// Quality report; beta is taken over the elements intersected by Gamma
// (nodal phi changes sign or vanishes).
template <int N>
MeshQuality shape_regularity(const BandMesh<N>& mesh, const BandSpec<N>& spec);

// Structured polar annulus mesh for the 2D circle case (rings x sectors,
// quads split along the same diagonal): exactly boundary-fitted, used to
// isolate background-grid effects when debugging convergence.
BandMesh<2> annulus_mesh(const BandSpec<2>& spec, double h);

// --- simplex helpers shared by recovery, assembly and error evaluation ---

// Signed volume (positive for positively oriented simplices).
template <int N>
double simplex_volume(const std::array<Vec<N>, N + 1>& v);

template <int N>
double simplex_diameter(const std::array<Vec<N>, N + 1>& v);

// Diameter of the inscribed ball: 2 * N * |T| / (sum of face measures).
template <int N>
double simplex_inball_diameter(const std::array<Vec<N>, N + 1>& v);

template <int N>
std::array<Vec<N>, N + 1> element_vertices(const BandMesh<N>& mesh, int elem);

// Gradients of the P1 barycentric basis functions on a simplex.
template <int N>
std::array<Vec<N>, N + 1> p1_gradients(const std::array<Vec<N>, N + 1>& v);

extern template struct BandMesh<2>;
extern template struct BandMesh<3>;

}  // namespace bandfem
