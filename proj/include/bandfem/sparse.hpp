#pragma once

// Minimal compressed-row sparse matrix and a Jacobi-preconditioned conjugate
// gradient solver. The assembled band systems are symmetric positive
// definite, so CG is the natural Krylov method; the diagonal preconditioner
// keeps the solve dependency-free and bit-deterministic.

#include <vector>

#include "bandfem/common.hpp"

namespace bandfem {

struct Triplet {
  int row;
  int col;
  double value;
};

struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;      // sorted within each row, no duplicates
  std::vector<double> val;

  // Builds CSR from scatter-add triplets: duplicates are summed, columns
  // sorted. Entries that cancel to exactly zero are kept (stencil-structural).
  static CsrMatrix from_triplets(int n, std::vector<Triplet> triplets);

  std::size_t nonzeros() const { return val.size(); }
};

// y = A x. Throws on dimension mismatch.
std::vector<double> matvec(const CsrMatrix& A, const std::vector<double>& x);

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

struct PcgResult {
  std::vector<double> x;
  SolveReport report;
};

// Jacobi-preconditioned CG. Stops when ||b - Ax|| / ||b|| <= tol; maxit < 0
// selects the default 20*sqrt(n). Throws SolverError when p^T A p falls to
// the breakdown floor 1e-30 (indefinite or structurally broken matrix).
PcgResult pcg(const CsrMatrix& A, const std::vector<double>& b,
              double tol = 1e-9, int maxit = -1);

}  // namespace bandfem
