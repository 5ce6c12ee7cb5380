#pragma once

// Nodal level-set data for the discrete-coefficient mode: the P1 interpolant
// phi_h of the exact distance and a recovered nodal Hessian H_h obtained by
// applying the volume-weighted (lumped-L2) gradient average twice. The pair
// is clamped pointwise wherever the diffusion tensor is evaluated so that the
// spectrum of phi*H never leaves [-1/2, 1/2].

#include <vector>

#include "bandfem/band_mesh.hpp"

namespace bandfem {

enum class FieldProvenance { exact, recovered };

template <int N>
struct RecoveredField {
  std::vector<double> phi;     // nodal phi_h, exact evaluations of phi
  std::vector<Mat<N>> hess;    // nodal H_h, symmetric
  FieldProvenance provenance = FieldProvenance::recovered;
};

// Nodal values of the exact signed distance (the Lagrange interpolant data).
template <int N>
std::vector<double> interpolate_phi(const BandMesh<N>& mesh, const Surface<N>& surface);

// Double lumped-L2 recovery: g_h(i) = sum_{T∋i} |T| grad(phi_h)|_T / sum |T|,
// then the same average of grad(g_h), symmetrized. Boundary nodes use their
// one-sided patches.
template <int N>
std::vector<Mat<N>> recover_hessian(const BandMesh<N>& mesh,
                                    const std::vector<double>& phi_h);

// Enforces |spectrum(phi*H)| <= 1/2: eigenvalues of phi*H beyond the bound
// are moved to sign/2 and the Hessian is reassembled. Identity whenever the
// bound already holds.
template <int N>
Mat<N> clamp_hessian(double phi, const Mat<N>& H);

// phi_h plus recovered H_h in one struct.
template <int N>
RecoveredField<N> make_recovered_field(const BandMesh<N>& mesh, const Surface<N>& surface);

}  // namespace bandfem
