#include "bandfem/band_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace bandfem {

template <int N>
double simplex_volume(const std::array<Vec<N>, N + 1>& v) {
  if constexpr (N == 2) {
    const Vec<2> a = v[1] - v[0], b = v[2] - v[0];
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  } else {
    const Vec<3> a = v[1] - v[0], b = v[2] - v[0], c = v[3] - v[0];
    return a.dot(b.cross(c)) / 6.0;
  }
}

template <int N>
double simplex_diameter(const std::array<Vec<N>, N + 1>& v) {
  double d2 = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j)
      d2 = std::max(d2, (v[i] - v[j]).squaredNorm());
  return std::sqrt(d2);
}

template <int N>
double simplex_inball_diameter(const std::array<Vec<N>, N + 1>& v) {
  double faces = 0.0;
  if constexpr (N == 2) {
    for (int i = 0; i < 3; ++i) faces += (v[(i + 1) % 3] - v[i]).norm();
  } else {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<Vec<3>, 3> f;
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) f[k++] = v[i];
      faces += 0.5 * (f[1] - f[0]).cross(f[2] - f[0]).norm();
    }
  }
  return 2.0 * N * std::abs(simplex_volume<N>(v)) / faces;
}

template <int N>
std::array<Vec<N>, N + 1> element_vertices(const BandMesh<N>& mesh, int elem) {
  std::array<Vec<N>, N + 1> v;
  for (int i = 0; i <= N; ++i) v[i] = mesh.nodes[mesh.elems[elem][i]];
  return v;
}

template <int N>
std::array<Vec<N>, N + 1> p1_gradients(const std::array<Vec<N>, N + 1>& v) {
  Mat<N> M;
  for (int i = 0; i < N; ++i) M.col(i) = v[i + 1] - v[0];
  const Mat<N> Minv_t = M.inverse().transpose();
  std::array<Vec<N>, N + 1> g;
  g[0].setZero();
  for (int i = 1; i <= N; ++i) {
    g[i] = Minv_t.col(i - 1);
    g[0] -= g[i];
  }
  return g;
}

template <int N>
double BandMesh<N>::h_max() const {
  double h = 0.0;
  for (double v : h_elem) h = std::max(h, v);
  return h;
}

template <int N>
double BandMesh<N>::h_min() const {
  double h = std::numeric_limits<double>::max();
  for (double v : h_elem) h = std::min(h, v);
  return h_elem.empty() ? 0.0 : h;
}

namespace {

// Snap a node onto the nearer level set |phi| = d along grad(phi); exact in
// one step for a distance function. Returns which side it landed on.
template <int N>
BoundarySide snap_node(Vec<N>& x, const Surface<N>& surface, double d) {
  const double phi = surface.signed_distance(x);
  const double target = phi >= 0.0 ? d : -d;
  x -= (phi - target) * surface.normal(x);
  return phi >= 0.0 ? BoundarySide::outer : BoundarySide::inner;
}

template <int N>
void compute_h_elem(BandMesh<N>& mesh) {
  mesh.h_elem.resize(mesh.elems.size());
  for (std::size_t e = 0; e < mesh.elems.size(); ++e)
    mesh.h_elem[e] = simplex_diameter<N>(element_vertices(mesh, static_cast<int>(e)));
}

// Nodes lying on a face that belongs to exactly one element (the topological
// boundary of the band mesh). Found by sorting the face list.
template <int N>
std::vector<char> topological_boundary_nodes(const BandMesh<N>& mesh) {
  std::vector<std::array<int, N>> faces;
  faces.reserve(mesh.elems.size() * (N + 1));
  for (const auto& el : mesh.elems)
    for (int skip = 0; skip <= N; ++skip) {
      std::array<int, N> f;
      int k = 0;
      for (int i = 0; i <= N; ++i)
        if (i != skip) f[k++] = el[i];
      std::sort(f.begin(), f.end());
      faces.push_back(f);
    }
  std::sort(faces.begin(), faces.end());

  std::vector<char> on_boundary(mesh.nodes.size(), 0);
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i;
    while (j < faces.size() && faces[j] == faces[i]) ++j;
    if (j - i == 1)
      for (int node : faces[i]) on_boundary[node] = 1;
    i = j;
  }
  return on_boundary;
}

// Drops the flagged elements and compacts the node numbering. Returns the
// number dropped.
template <int N>
int discard_elements(BandMesh<N>& mesh, const std::vector<char>& drop) {
  std::vector<std::array<int, N + 1>> kept;
  kept.reserve(mesh.elems.size());
  int dropped = 0;
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    if (!drop[e])
      kept.push_back(mesh.elems[e]);
    else
      ++dropped;
  }
  if (dropped == 0) return 0;

  // Renumber surviving nodes in their original order (deterministic).
  std::vector<int> remap(mesh.nodes.size(), -1);
  for (const auto& el : kept)
    for (int n : el) remap[n] = 0;
  int next = 0;
  for (auto& r : remap)
    if (r == 0) r = next++;

  std::vector<Vec<N>> nodes(next);
  std::vector<BoundarySide> boundary(next, BoundarySide::none);
  for (std::size_t old = 0; old < mesh.nodes.size(); ++old)
    if (remap[old] >= 0) {
      nodes[remap[old]] = mesh.nodes[old];
      boundary[remap[old]] = mesh.boundary[old];
    }
  for (auto& el : kept)
    for (int& n : el) n = remap[n];

  mesh.nodes = std::move(nodes);
  mesh.boundary = std::move(boundary);
  mesh.elems = std::move(kept);
  return dropped;
}

// Second snap pass: push topological-boundary nodes that the barycenter keep
// rule left short of |phi| = d ("staircase" nodes, at most about one grid
// step deep) out onto the band boundary, so the discrete boundary
// interpolates the true one and the enclosed volume is chord-accurate.
//
// Each push is guarded: no incident element may invert (volume must stay
// positive), and surface-cut elements must stay inside the shape budget
// (beta well under the bound of 8 the solver relies on). Band-skin elements
// are allowed to flatten — a whole boundary element in the staircase
// collapses toward a chord sliver — because the caller sweeps slivers out
// afterwards and re-runs the push on the freshly exposed boundary. Where the
// full push is blocked, the largest safe fraction is taken and the node
// stays unflagged.
// Budget for cut elements, under the beta < 8 bound the error analysis
// assumes with room for the (shape-aware) refinement to degrade children
// slightly.
constexpr double kCutBetaLimit = 6.5;

// `noncut_floor` is the volume below which a band-skin element may not be
// squeezed. The initial build passes the bare inversion floor because its
// sweep deletes whatever the push flattens; refinement cannot delete (children
// count is fixed), so it passes a real sliver floor instead.
template <int N>
void push_boundary_nodes(BandMesh<N>& mesh, const BandSpec<N>& spec, double h,
                         double noncut_floor) {
  const double volume_floor = 1e-14 * std::pow(h, N);

  const std::vector<char> on_boundary = topological_boundary_nodes(mesh);

  std::vector<std::vector<int>> incident(mesh.nodes.size());
  std::vector<char> cut(mesh.elems.size(), 0);
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    bool neg = false, pos = false;
    for (int n : mesh.elems[e]) {
      if (on_boundary[n] && mesh.boundary[n] == BoundarySide::none)
        incident[n].push_back(static_cast<int>(e));
      const double phi = spec.surface.signed_distance(mesh.nodes[n]);
      if (phi <= 0.0) neg = true;
      if (phi >= 0.0) pos = true;
    }
    cut[e] = neg && pos;
  }

  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (!on_boundary[n] || mesh.boundary[n] != BoundarySide::none) continue;
    const double phi = spec.surface.signed_distance(mesh.nodes[n]);
    if (std::abs(phi) <= spec.d - 1.9 * h) continue;  // not a staircase node
    const Vec<N> saved = mesh.nodes[n];
    Vec<N> target = saved;
    const BoundarySide side = snap_node(target, spec.surface, spec.d);
    for (const double t : {1.0, 0.875, 0.75, 0.625, 0.5, 0.375, 0.25, 0.125}) {
      mesh.nodes[n] = saved + t * (target - saved);
      bool safe = true;
      for (int e : incident[n]) {
        const auto v = element_vertices(mesh, e);
        if (simplex_volume<N>(v) <= (cut[e] ? volume_floor : noncut_floor) ||
            (cut[e] && simplex_diameter<N>(v) / simplex_inball_diameter<N>(v) >
                           kCutBetaLimit)) {
          safe = false;
          break;
        }
      }
      if (safe) {
        if (t == 1.0) mesh.boundary[n] = side;
        break;
      }
      mesh.nodes[n] = saved;
    }
  }
}

// Pull pass with a sliver guard, for refinement. Every node outside the band
// must come back inside, but landing exactly on |phi| = d is only required of
// nodes we flag as boundary. When the full snap would crush an incident
// element below `noncut_floor` — the signature failure mode is a tetrahedron
// whose four corners all sit on the curved level set, nearly coplanar — the
// node retreats a fraction of h deeper into the band instead, which moves it
// off the level-set plane and restores thickness. Retreated nodes stay
// unflagged (|phi| < d holds strictly), so the boundary invariants are kept.
template <int N>
void guarded_pull(BandMesh<N>& mesh, const BandSpec<N>& spec, double h,
                  double noncut_floor) {
  const double volume_floor = 1e-14 * std::pow(h, N);

  std::vector<char> outside(mesh.nodes.size(), 0);
  bool any = false;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
    if (std::abs(spec.surface.signed_distance(mesh.nodes[n])) > spec.d) {
      outside[n] = 1;
      any = true;
    }
  if (!any) return;

  std::vector<std::vector<int>> incident(mesh.nodes.size());
  std::vector<char> cut(mesh.elems.size(), 0);
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    bool neg = false, pos = false;
    for (int n : mesh.elems[e]) {
      if (outside[n]) incident[n].push_back(static_cast<int>(e));
      const double phi = spec.surface.signed_distance(mesh.nodes[n]);
      if (phi <= 0.0) neg = true;
      if (phi >= 0.0) pos = true;
    }
    cut[e] = neg && pos;
  }

  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (!outside[n]) continue;
    const Vec<N> saved = mesh.nodes[n];
    const double phi = spec.surface.signed_distance(saved);
    const Vec<N> normal = spec.surface.normal(saved);
    const BoundarySide side = phi >= 0.0 ? BoundarySide::outer : BoundarySide::inner;
    const double sign = phi >= 0.0 ? 1.0 : -1.0;

    double best_depth = 0.0;
    double best_margin = -std::numeric_limits<double>::max();
    bool committed = false;
    for (const double eps : {0.0, 0.0625, 0.125, 0.25, 0.5}) {
      const double target = sign * (spec.d - eps * h);
      mesh.nodes[n] = saved - (phi - target) * normal;
      bool safe = true;
      double margin = std::numeric_limits<double>::max();
      for (int e : incident[n]) {
        const auto v = element_vertices(mesh, e);
        const double vol = simplex_volume<N>(v);
        margin = std::min(margin, vol);
        if (vol <= (cut[e] ? volume_floor : noncut_floor) ||
            (cut[e] && simplex_diameter<N>(v) / simplex_inball_diameter<N>(v) >
                           kCutBetaLimit))
          safe = false;
      }
      if (safe) {
        if (eps == 0.0) mesh.boundary[n] = side;
        committed = true;
        break;
      }
      if (margin > best_margin) {
        best_margin = margin;
        best_depth = eps;
      }
    }
    if (!committed) {
      // No rung clears the quality floor. Orientation is non-negotiable even
      // when quality is not attainable: retry the ladder demanding only
      // positively oriented incident elements.
      for (const double eps : {0.0, 0.0625, 0.125, 0.25, 0.5}) {
        const double target = sign * (spec.d - eps * h);
        mesh.nodes[n] = saved - (phi - target) * normal;
        bool oriented = true;
        for (int e : incident[n])
          if (simplex_volume<N>(element_vertices(mesh, e)) <= volume_floor) {
            oriented = false;
            break;
          }
        if (oriented) {
          if (eps == 0.0) mesh.boundary[n] = side;
          committed = true;
          break;
        }
      }
    }
    if (!committed) {
      // Inversion at every rung; take the least-squashed one. Exact snaps
      // get flagged just as the unguarded pull would have done.
      const double target = sign * (spec.d - best_depth * h);
      mesh.nodes[n] = saved - (phi - target) * normal;
      if (best_depth == 0.0) mesh.boundary[n] = side;
    }
  }
}

}  // namespace

template <int N>
BandMesh<N> build_band_mesh(const BandSpec<N>& spec, double h) {
  if (spec.d <= 0.0) throw ConfigError("band half-width d must be positive");
  if (h <= 0.0) throw ConfigError("mesh size h must be positive");
  if (h > spec.d)
    throw ConfigError("mesh size h exceeds the band half-width d: the band "
                      "would be less than two element layers thick");

  const auto [lo, hi] = spec.surface.band_bounding_box(spec.d);
  // Grid nodes sit at integer multiples of h; one cell of margin all around.
  std::array<int, N> imin, icount;
  for (int a = 0; a < N; ++a) {
    imin[a] = static_cast<int>(std::floor(lo[a] / h)) - 1;
    icount[a] = static_cast<int>(std::ceil(hi[a] / h)) + 1 - imin[a] + 1;
  }

  BandMesh<N> mesh;
  mesh.grid_h = h;
  std::unordered_map<std::int64_t, int> node_ids;

  const auto lattice_key = [&](const std::array<int, N>& idx) {
    std::int64_t key = 0;
    for (int a = 0; a < N; ++a) key = key * (1 << 21) + (idx[a] - imin[a]);
    return key;
  };
  const auto node_at = [&](const std::array<int, N>& idx) {
    const auto [it, inserted] = node_ids.try_emplace(lattice_key(idx),
                                                     static_cast<int>(mesh.nodes.size()));
    if (inserted) {
      Vec<N> x;
      for (int a = 0; a < N; ++a) x[a] = h * idx[a];
      mesh.nodes.push_back(x);
    }
    return it->second;
  };

  // Cell corner offsets for each simplex of the cell split. 2D: two triangles
  // along the same diagonal everywhere. 3D: the six-tetrahedra Kuhn split
  // (conforming across cells, all sharing the cell diagonal), listed with
  // positive orientation.
  std::vector<std::array<std::array<int, N>, N + 1>> splits;
  if constexpr (N == 2) {
    splits = {{{{0, 0}, {1, 0}, {1, 1}}}, {{{0, 0}, {1, 1}, {0, 1}}}};
  } else {
    constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    constexpr bool odd[6] = {false, true, true, false, false, true};
    for (int p = 0; p < 6; ++p) {
      std::array<std::array<int, 3>, 4> tet;
      tet[0] = {0, 0, 0};
      for (int step = 0; step < 3; ++step) {
        tet[step + 1] = tet[step];
        tet[step + 1][perms[p][step]] += 1;
      }
      if (odd[p]) std::swap(tet[1], tet[2]);
      splits.push_back(tet);
    }
  }

  // Lexicographic cell sweep keeps the node numbering deterministic.
  std::array<int, N> cell;
  const auto sweep = [&](auto&& self, int axis) -> void {
    if (axis == N) {
      for (const auto& split : splits) {
        std::array<std::array<int, N>, N + 1> corner;
        Vec<N> bary = Vec<N>::Zero();
        for (int i = 0; i <= N; ++i) {
          for (int a = 0; a < N; ++a) {
            corner[i][a] = cell[a] + split[i][a];
            bary[a] += h * corner[i][a];
          }
        }
        bary /= N + 1;
        if (std::abs(spec.surface.signed_distance(bary)) >= spec.d) continue;
        std::array<int, N + 1> el;
        for (int i = 0; i <= N; ++i) el[i] = node_at(corner[i]);
        mesh.elems.push_back(el);
      }
      return;
    }
    for (cell[axis] = imin[axis]; cell[axis] < imin[axis] + icount[axis] - 1; ++cell[axis])
      self(self, axis + 1);
  };
  sweep(sweep, 0);

  if (mesh.elems.empty())
    throw ConfigError("band mesh is empty: no background cell meets |phi| < d");

  // Snap onto |phi| = d. The pull pass moves every node with |phi| > d onto
  // the nearer level set (toward the band along the normal, which cannot
  // turn elements inside out). The push pass then raises the staircase the
  // keep rule left behind; without it the discrete band undercuts Omega_d at
  // first order and the boundary error dominates everything the scheme is
  // supposed to show. Where a whole boundary element lay in the staircase
  // the push flattens it into a sliver hugging |phi| = d; the sweep discards
  // those and the next round re-snaps the boundary they exposed, so the loop
  // ends with every boundary node interpolating the band boundary.
  mesh.boundary.assign(mesh.nodes.size(), BoundarySide::none);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (std::abs(spec.surface.signed_distance(mesh.nodes[n])) > spec.d)
      mesh.boundary[n] = snap_node(mesh.nodes[n], spec.surface, spec.d);
  }
  mesh.discarded = 0;
  for (int round = 0; round < 32; ++round) {
    push_boundary_nodes(mesh, spec, h, /*noncut_floor=*/1e-14 * std::pow(h, N));
    // Sweep out what the push flattened: anything at sliver volume, plus
    // badly shaped elements off the cut layer (they would poison the
    // stiffness conditioning; on the cut layer the push guard already keeps
    // beta in budget, and cut elements are never discarded).
    std::vector<char> drop(mesh.elems.size(), 0);
    int flagged = 0;
    for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
      const auto v = element_vertices(mesh, static_cast<int>(e));
      double pmin = std::numeric_limits<double>::max(), pmax = -pmin;
      for (int n : mesh.elems[e]) {
        const double p = spec.surface.signed_distance(mesh.nodes[n]);
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
      }
      const bool is_cut = pmin <= 0.0 && pmax >= 0.0;
      const double vol = simplex_volume<N>(v);
      if ((vol <= 1e-3 * std::pow(h, N) ||
           simplex_diameter<N>(v) / simplex_inball_diameter<N>(v) > 100.0) &&
          !is_cut) {
        drop[e] = 1;
        ++flagged;
      }
    }
    const int harvested = flagged ? discard_elements(mesh, drop) : 0;
    mesh.discarded += harvested;
    if (harvested == 0) break;
  }
  {
    // Unconditional degeneracy floor: nothing inverted or volumeless may
    // survive, wherever it sits.
    std::vector<char> drop(mesh.elems.size(), 0);
    int flagged = 0;
    for (std::size_t e = 0; e < mesh.elems.size(); ++e)
      if (simplex_volume<N>(element_vertices(mesh, static_cast<int>(e))) <=
          1e-14 * std::pow(h, N)) {
        drop[e] = 1;
        ++flagged;
      }
    if (flagged) mesh.discarded += discard_elements(mesh, drop);
  }
  compute_h_elem(mesh);
  return mesh;
}

namespace {

// Child tables for regular red refinement. Corner children first, then the
// interior children. 2D locals: 0,1,2 = corners, 3 = m01, 4 = m12, 5 = m02.
constexpr int kTriChildren[4][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};

// 3D locals: 0..3 = corners, 4 = m01, 5 = m02, 6 = m03, 7 = m12, 8 = m13,
// 9 = m23. The interior octahedron is split around one of its diagonals
// (m01,m23), (m02,m13) or (m03,m12); tables give positively oriented children
// for positively oriented parents (verified on the reference tetrahedron).
constexpr int kTetCorners[4][4] = {
    {0, 4, 5, 6}, {4, 1, 7, 8}, {5, 7, 2, 9}, {6, 8, 9, 3}};
constexpr int kTetOcta[3][4][4] = {
    // diagonal m01 - m23
    {{4, 7, 5, 9}, {4, 8, 7, 9}, {4, 6, 8, 9}, {4, 5, 6, 9}},
    // diagonal m02 - m13
    {{5, 6, 4, 8}, {5, 9, 6, 8}, {5, 7, 9, 8}, {5, 4, 7, 8}},
    // diagonal m03 - m12
    {{6, 4, 5, 7}, {6, 5, 9, 7}, {6, 9, 8, 7}, {6, 8, 4, 7}}};
constexpr int kOctaDiagonal[3][2] = {{4, 9}, {5, 8}, {6, 7}};

}  // namespace

template <int N>
BandMesh<N> refine(const BandMesh<N>& mesh, const BandSpec<N>& spec) {
  BandMesh<N> fine;
  fine.level = mesh.level + 1;
  fine.grid_h = 0.5 * mesh.grid_h;
  fine.nodes = mesh.nodes;
  fine.boundary = mesh.boundary;

  // Edge midpoints are shared between neighbours: dedupe by node-id pair.
  std::unordered_map<std::int64_t, int> midpoint_ids;
  const auto midpoint = [&](int a, int b) {
    const std::int64_t key =
        (static_cast<std::int64_t>(std::min(a, b)) << 32) | std::max(a, b);
    const auto [it, inserted] =
        midpoint_ids.try_emplace(key, static_cast<int>(fine.nodes.size()));
    if (inserted) {
      fine.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
      // Midpoints start unflagged; the snap passes below decide which of
      // them belong on |phi| = d.
      fine.boundary.push_back(BoundarySide::none);
    }
    return it->second;
  };

  fine.elems.reserve(mesh.elems.size() * (N == 2 ? 4 : 8));
  for (const auto& el : mesh.elems) {
    if constexpr (N == 2) {
      const int local[6] = {el[0], el[1], el[2], midpoint(el[0], el[1]),
                            midpoint(el[1], el[2]), midpoint(el[0], el[2])};
      for (const auto& child : kTriChildren)
        fine.elems.push_back({local[child[0]], local[child[1]], local[child[2]]});
    } else {
      const int local[10] = {el[0],
                             el[1],
                             el[2],
                             el[3],
                             midpoint(el[0], el[1]),
                             midpoint(el[0], el[2]),
                             midpoint(el[0], el[3]),
                             midpoint(el[1], el[2]),
                             midpoint(el[1], el[3]),
                             midpoint(el[2], el[3])};
      // Split the interior octahedron around whichever diagonal gives the
      // best-shaped children; the popular shortest-diagonal rule can still
      // degrade stretched boundary tets past the shape budget.
      int best = 0;
      double best_beta = std::numeric_limits<double>::max();
      for (int k = 0; k < 3; ++k) {
        double worst = 0.0;
        for (const auto& child : kTetOcta[k]) {
          const std::array<Vec<3>, 4> v{fine.nodes[local[child[0]]],
                                        fine.nodes[local[child[1]]],
                                        fine.nodes[local[child[2]]],
                                        fine.nodes[local[child[3]]]};
          const double inball = simplex_inball_diameter<3>(v);
          worst = inball > 0.0
                      ? std::max(worst, simplex_diameter<3>(v) / inball)
                      : std::numeric_limits<double>::max();
        }
        if (worst < best_beta) {
          best_beta = worst;
          best = k;
        }
      }
      for (const auto& child : kTetCorners)
        fine.elems.push_back(
            {local[child[0]], local[child[1]], local[child[2]], local[child[3]]});
      for (const auto& child : kTetOcta[best])
        fine.elems.push_back(
            {local[child[0]], local[child[1]], local[child[2]], local[child[3]]});
    }
  }

  // Re-snap with the same two passes as the initial build. Parent boundary
  // nodes already sit on |phi| = d and keep their flags; midpoints of
  // boundary faces sag off the band boundary by O(h^2) and are pulled or
  // pushed back onto it, while midpoints of interior chords stay interior.
  // Leftover staircase nodes a guarded build push could only move part-way
  // get retried here at half the element size. Unlike the build, refinement
  // cannot discard what a snap flattens (children count is pinned), so both
  // passes run with a real sliver floor. The floor is set loose: boundary-
  // hugging slivers cost nothing in accuracy, they only cap the attainable
  // CG residual (rounding floor ~ eps * |A|_max, and the largest stiffness
  // entries scale like h^{N+1}/vol), so the guard should bite as rarely as
  // possible — every retreat it forces leaves a small dent in the band.
  const double sliver_floor = 1e-5 * std::pow(fine.grid_h, N);
  guarded_pull(fine, spec, fine.grid_h, sliver_floor);
  push_boundary_nodes(fine, spec, fine.grid_h, sliver_floor);

  compute_h_elem(fine);
  return fine;
}

template <int N>
MeshQuality shape_regularity(const BandMesh<N>& mesh, const BandSpec<N>& spec) {
  MeshQuality q;
  q.elements = static_cast<int>(mesh.elems.size());
  q.nodes = static_cast<int>(mesh.nodes.size());
  q.h_max = mesh.h_max();
  q.h_min = mesh.h_min();

  std::vector<double> phi(mesh.nodes.size());
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
    phi[n] = spec.surface.signed_distance(mesh.nodes[n]);

  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    double pmin = std::numeric_limits<double>::max(), pmax = -pmin;
    for (int n : mesh.elems[e]) {
      pmin = std::min(pmin, phi[n]);
      pmax = std::max(pmax, phi[n]);
    }
    if (pmin > 0.0 || pmax < 0.0) continue;  // not cut by Gamma
    const auto v = element_vertices(mesh, static_cast<int>(e));
    q.beta = std::max(q.beta, simplex_diameter<N>(v) / simplex_inball_diameter<N>(v));
  }
  return q;
}

BandMesh<2> annulus_mesh(const BandSpec<2>& spec, double h) {
  if (spec.surface.kind() != SurfaceKind::Circle)
    throw ConfigError("annulus mesh is only defined for the circle case");
  if (spec.d <= 0.0) throw ConfigError("band half-width d must be positive");
  if (h <= 0.0) throw ConfigError("mesh size h must be positive");
  if (h > spec.d)
    throw ConfigError("mesh size h exceeds the band half-width d: the band "
                      "would be less than two element layers thick");

  const double R = spec.surface.major_radius();
  const int rings = std::max(2, static_cast<int>(std::lround(2.0 * spec.d / h)));
  const int sectors = std::max(8, static_cast<int>(std::lround(2.0 * pi * R / h)));

  BandMesh<2> mesh;
  mesh.grid_h = h;
  for (int i = 0; i <= rings; ++i) {
    const double rho = R - spec.d + 2.0 * spec.d * i / rings;
    for (int j = 0; j < sectors; ++j) {
      const double theta = 2.0 * pi * j / sectors;
      mesh.nodes.push_back({rho * std::cos(theta), rho * std::sin(theta)});
      mesh.boundary.push_back(i == 0          ? BoundarySide::inner
                              : i == rings    ? BoundarySide::outer
                                              : BoundarySide::none);
    }
  }
  const auto id = [&](int i, int j) { return i * sectors + (j % sectors); };
  for (int i = 0; i < rings; ++i)
    for (int j = 0; j < sectors; ++j) {
      // Same-diagonal quad split, counterclockwise children.
      mesh.elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.elems.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  compute_h_elem(mesh);
  return mesh;
}

template struct BandMesh<2>;
template struct BandMesh<3>;
template BandMesh<2> build_band_mesh<2>(const BandSpec<2>&, double);
template BandMesh<3> build_band_mesh<3>(const BandSpec<3>&, double);
template BandMesh<2> refine<2>(const BandMesh<2>&, const BandSpec<2>&);
template BandMesh<3> refine<3>(const BandMesh<3>&, const BandSpec<3>&);
template MeshQuality shape_regularity<2>(const BandMesh<2>&, const BandSpec<2>&);
template MeshQuality shape_regularity<3>(const BandMesh<3>&, const BandSpec<3>&);
template double simplex_volume<2>(const std::array<Vec<2>, 3>&);
template double simplex_volume<3>(const std::array<Vec<3>, 4>&);
template double simplex_diameter<2>(const std::array<Vec<2>, 3>&);
template double simplex_diameter<3>(const std::array<Vec<3>, 4>&);
template double simplex_inball_diameter<2>(const std::array<Vec<2>, 3>&);
template double simplex_inball_diameter<3>(const std::array<Vec<3>, 4>&);
template std::array<Vec<2>, 3> element_vertices<2>(const BandMesh<2>&, int);
template std::array<Vec<3>, 4> element_vertices<3>(const BandMesh<3>&, int);
template std::array<Vec<2>, 3> p1_gradients<2>(const std::array<Vec<2>, 3>&);
template std::array<Vec<3>, 4> p1_gradients<3>(const std::array<Vec<3>, 4>&);

}  // namespace bandfem
