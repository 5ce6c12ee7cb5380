#include "bandfem/surface_error.hpp"

#include <cmath>
#include <limits>

namespace bandfem {

namespace {

// Linear-interpolation zero on the edge (xi, xj); phi_i and phi_j have
// opposite signs by construction.
template <int N>
Vec<N> edge_crossing(const Vec<N>& xi, double phi_i, const Vec<N>& xj, double phi_j) {
  const double t = phi_i / (phi_i - phi_j);
  return xi + t * (xj - xi);
}

template <int N>
Vec<N> p1_gradient_of(const std::array<Vec<N>, N + 1>& verts,
                      const std::array<double, N + 1>& values) {
  const auto basis = p1_gradients<N>(verts);
  Vec<N> g = Vec<N>::Zero();
  for (int i = 0; i <= N; ++i) g += values[i] * basis[i];
  return g;
}

// Orient a facet so its normal points along grad(phi_h) of the parent.
void orient(std::array<Vec<2>, 2>& f, const Vec<2>& grad) {
  const Vec<2> t = f[1] - f[0];
  if (t[1] * grad[0] - t[0] * grad[1] < 0.0) std::swap(f[0], f[1]);
}

void orient(std::array<Vec<3>, 3>& f, const Vec<3>& grad) {
  if ((f[1] - f[0]).cross(f[2] - f[0]).dot(grad) < 0.0) std::swap(f[1], f[2]);
}

double facet_measure(const std::array<Vec<2>, 2>& f) { return (f[1] - f[0]).norm(); }

double facet_measure(const std::array<Vec<3>, 3>& f) {
  return 0.5 * (f[1] - f[0]).cross(f[2] - f[0]).norm();
}

// Barycentric coordinates of x in the simplex (for evaluating u_h at facet
// quadrature points; x lies inside its parent element by construction).
template <int N>
std::array<double, N + 1> barycentric_coords(const std::array<Vec<N>, N + 1>& verts,
                                             const Vec<N>& x) {
  Mat<N> M;
  for (int i = 0; i < N; ++i) M.col(i) = verts[i + 1] - verts[0];
  const Vec<N> lam = M.inverse() * (x - verts[0]);
  std::array<double, N + 1> out;
  out[0] = 1.0;
  for (int i = 0; i < N; ++i) {
    out[i + 1] = lam[i];
    out[0] -= lam[i];
  }
  return out;
}

// Facet quadrature: (barycentric point on the facet, weight fraction of the
// facet measure). Default rules are exact for quadratics.
template <int N>
std::vector<std::pair<std::array<double, N>, double>> facet_rule(int quad_points) {
  if constexpr (N == 2) {
    if (quad_points == 4) {
      const double p1 = 0.3399810435848563, w1 = 0.3260725774312730;
      const double p2 = 0.8611363115940526, w2 = 0.1739274225687269;
      return {{{0.5 - 0.5 * p2, 0.5 + 0.5 * p2}, w2},
              {{0.5 - 0.5 * p1, 0.5 + 0.5 * p1}, w1},
              {{0.5 + 0.5 * p1, 0.5 - 0.5 * p1}, w1},
              {{0.5 + 0.5 * p2, 0.5 - 0.5 * p2}, w2}};
    }
    const double g = 0.5 / std::sqrt(3.0);
    return {{{0.5 - g, 0.5 + g}, 0.5}, {{0.5 + g, 0.5 - g}, 0.5}};
  } else {
    if (quad_points == 6) {
      const double a1 = 0.816847572980459, b1 = 0.091576213509771,
                   w1 = 0.109951743655322;
      const double a2 = 0.108103018168070, b2 = 0.445948490915965,
                   w2 = 0.223381589678011;
      return {{{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
              {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2}};
    }
    const double third = 1.0 / 3.0;
    return {{{0.5, 0.5, 0.0}, third}, {{0.0, 0.5, 0.5}, third}, {{0.5, 0.0, 0.5}, third}};
  }
}

}  // namespace

template <int N>
SurfaceMesh<N> extract_surface(const BandMesh<N>& mesh, const std::vector<double>& phi_h) {
  // Nudge exact nodal zeros off the level set; far below discretization error.
  std::vector<double> phi = phi_h;
  const double nudge = 1e-12 * mesh.grid_h;
  for (double& v : phi)
    if (v == 0.0) v = nudge;

  SurfaceMesh<N> surface;
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    const auto& el = mesh.elems[e];
    std::array<int, N + 1> neg{}, pos{};
    int nneg = 0, npos = 0;
    for (int i = 0; i <= N; ++i) {
      if (phi[el[i]] < 0.0)
        neg[nneg++] = el[i];
      else
        pos[npos++] = el[i];
    }
    if (nneg == 0 || npos == 0) continue;

    const auto verts = element_vertices(mesh, static_cast<int>(e));
    std::array<double, N + 1> local_phi;
    for (int i = 0; i <= N; ++i) local_phi[i] = phi[el[i]];
    const Vec<N> grad = p1_gradient_of<N>(verts, local_phi);

    const auto cross = [&](int a, int b) {
      return edge_crossing<N>(mesh.nodes[a], phi[a], mesh.nodes[b], phi[b]);
    };
    const auto emit = [&](std::array<Vec<N>, N> facet) {
      orient(facet, grad);
      surface.facets.push_back(facet);
      surface.parent.push_back(static_cast<int>(e));
    };

    if constexpr (N == 2) {
      const int lone = nneg == 1 ? neg[0] : pos[0];
      const int* other = nneg == 1 ? pos.data() : neg.data();
      emit({cross(lone, other[0]), cross(lone, other[1])});
    } else {
      if (nneg == 1 || npos == 1) {
        const int lone = nneg == 1 ? neg[0] : pos[0];
        const int* other = nneg == 1 ? pos.data() : neg.data();
        emit({cross(lone, other[0]), cross(lone, other[1]), cross(lone, other[2])});
      } else {
        // Two nodes on each side: four crossings form a quad (consecutive
        // corners share a tetrahedron node); cut along its shorter diagonal.
        const std::array<Vec<N>, 4> quad = {cross(neg[0], pos[0]), cross(neg[0], pos[1]),
                                            cross(neg[1], pos[1]), cross(neg[1], pos[0])};
        if ((quad[2] - quad[0]).squaredNorm() <= (quad[3] - quad[1]).squaredNorm()) {
          emit({quad[0], quad[1], quad[2]});
          emit({quad[0], quad[2], quad[3]});
        } else {
          emit({quad[1], quad[2], quad[3]});
          emit({quad[1], quad[3], quad[0]});
        }
      }
    }
  }
  return surface;
}

template <int N>
double surface_measure(const SurfaceMesh<N>& surface) {
  double total = 0.0;
  for (const auto& f : surface.facets) total += facet_measure(f);
  return total;
}

template <int N>
double surface_l2_error(const std::vector<double>& u_h,
                        const std::function<double(const Vec<N>&)>& u_exact,
                        const SurfaceMesh<N>& surface, const BandMesh<N>& mesh,
                        const Surface<N>& geom, int quad_points) {
  const auto rule = facet_rule<N>(quad_points);
  double sum = 0.0;
  for (std::size_t f = 0; f < surface.facets.size(); ++f) {
    const auto& facet = surface.facets[f];
    const auto verts = element_vertices(mesh, surface.parent[f]);
    const double measure = facet_measure(facet);
    for (const auto& [fb, wfrac] : rule) {
      Vec<N> x = Vec<N>::Zero();
      for (int i = 0; i < N; ++i) x += fb[i] * facet[i];
      const auto lam = barycentric_coords<N>(verts, x);
      double uh = 0.0;
      for (int i = 0; i <= N; ++i) uh += lam[i] * u_h[mesh.elems[surface.parent[f]][i]];
      const double diff = uh - u_exact(geom.closest_point(x));
      sum += measure * wfrac * diff * diff;
    }
  }
  return std::sqrt(sum);
}

template <int N>
double surface_max_error(const std::vector<double>& u_h,
                         const std::function<double(const Vec<N>&)>& u_exact,
                         const SurfaceMesh<N>& surface, const BandMesh<N>& mesh,
                         const Surface<N>& geom) {
  const auto rule = facet_rule<N>(0);
  double worst = 0.0;
  for (std::size_t f = 0; f < surface.facets.size(); ++f) {
    const auto& facet = surface.facets[f];
    const auto verts = element_vertices(mesh, surface.parent[f]);
    const auto sample = [&](const Vec<N>& x) {
      const auto lam = barycentric_coords<N>(verts, x);
      double uh = 0.0;
      for (int i = 0; i <= N; ++i) uh += lam[i] * u_h[mesh.elems[surface.parent[f]][i]];
      worst = std::max(worst, std::abs(uh - u_exact(geom.closest_point(x))));
    };
    for (int i = 0; i < N; ++i) sample(facet[i]);
    for (const auto& [fb, wfrac] : rule) {
      (void)wfrac;
      Vec<N> x = Vec<N>::Zero();
      for (int i = 0; i < N; ++i) x += fb[i] * facet[i];
      sample(x);
    }
  }
  return worst;
}

template <int N>
double normal_derivative_norm(const std::vector<double>& u_h, const BandMesh<N>& mesh,
                              const Surface<N>& geom) {
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    const auto verts = element_vertices(mesh, static_cast<int>(e));
    std::array<double, N + 1> local;
    for (int i = 0; i <= N; ++i) local[i] = u_h[mesh.elems[e][i]];
    const Vec<N> grad = p1_gradient_of<N>(verts, local);
    Vec<N> bary = Vec<N>::Zero();
    for (int i = 0; i <= N; ++i) bary += verts[i];
    bary /= N + 1;
    const double dn = geom.normal(bary).dot(grad);
    sum += std::abs(simplex_volume<N>(verts)) * dn * dn;
  }
  return std::sqrt(sum);
}

double convergence_order(double err_prev, double err_cur, double dof_prev,
                         double dof_cur, int dim) {
  if (!(err_prev > 0.0) || !(err_cur > 0.0) || !(dof_cur > dof_prev) || dof_prev <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return dim * std::log(err_prev / err_cur) / std::log(dof_cur / dof_prev);
}

template SurfaceMesh<2> extract_surface<2>(const BandMesh<2>&, const std::vector<double>&);
template SurfaceMesh<3> extract_surface<3>(const BandMesh<3>&, const std::vector<double>&);
template double surface_measure<2>(const SurfaceMesh<2>&);
template double surface_measure<3>(const SurfaceMesh<3>&);
template double surface_l2_error<2>(const std::vector<double>&,
                                    const std::function<double(const Vec<2>&)>&,
                                    const SurfaceMesh<2>&, const BandMesh<2>&,
                                    const Surface<2>&, int);
template double surface_l2_error<3>(const std::vector<double>&,
                                    const std::function<double(const Vec<3>&)>&,
                                    const SurfaceMesh<3>&, const BandMesh<3>&,
                                    const Surface<3>&, int);
template double surface_max_error<2>(const std::vector<double>&,
                                     const std::function<double(const Vec<2>&)>&,
                                     const SurfaceMesh<2>&, const BandMesh<2>&,
                                     const Surface<2>&);
template double surface_max_error<3>(const std::vector<double>&,
                                     const std::function<double(const Vec<3>&)>&,
                                     const SurfaceMesh<3>&, const BandMesh<3>&,
                                     const Surface<3>&);
template double normal_derivative_norm<2>(const std::vector<double>&, const BandMesh<2>&,
                                          const Surface<2>&);
template double normal_derivative_norm<3>(const std::vector<double>&, const BandMesh<3>&,
                                          const Surface<3>&);

}  // namespace bandfem
