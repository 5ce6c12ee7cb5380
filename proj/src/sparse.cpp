#include "bandfem/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace bandfem {

CsrMatrix CsrMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix A;
  A.n = n;
  A.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  A.col.reserve(triplets.size());
  A.val.reserve(triplets.size());

  for (std::size_t i = 0; i < triplets.size();) {
    const int row = triplets[i].row;
    const int col = triplets[i].col;
    if (row < 0 || row >= n || col < 0 || col >= n)
      throw std::invalid_argument("triplet index out of range");
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i)
      sum += triplets[i].value;
    A.col.push_back(col);
    A.val.push_back(sum);
    A.row_ptr[static_cast<std::size_t>(row) + 1] = static_cast<int>(A.col.size());
  }
  // Rows without entries inherit the previous offset.
  for (int r = 1; r <= n; ++r)
    A.row_ptr[r] = std::max(A.row_ptr[r], A.row_ptr[r - 1]);
  return A;
}

std::vector<double> matvec(const CsrMatrix& A, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.n)
    throw std::invalid_argument("matvec: vector length does not match matrix dimension");
  std::vector<double> y(static_cast<std::size_t>(A.n), 0.0);
  for (int i = 0; i < A.n; ++i) {
    double sum = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      sum += A.val[k] * x[A.col[k]];
    y[i] = sum;
  }
  return y;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

PcgResult pcg(const CsrMatrix& A, const std::vector<double>& b, double tol, int maxit) {
  if (static_cast<int>(b.size()) != A.n)
    throw std::invalid_argument("pcg: right-hand side length does not match matrix");
  if (maxit < 0) maxit = static_cast<int>(20.0 * std::sqrt(static_cast<double>(A.n))) + 1;

  const std::size_t n = b.size();
  PcgResult result;
  result.x.assign(n, 0.0);

  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    result.report.converged = true;
    return result;
  }

  // Jacobi preconditioner; an SPD matrix has a strictly positive diagonal.
  std::vector<double> inv_diag(n, 1.0);
  for (int i = 0; i < A.n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col[k] == i) {
        if (A.val[k] <= 0.0)
          throw SolverError("pcg: non-positive diagonal entry, matrix is not SPD");
        inv_diag[i] = 1.0 / A.val[k];
      }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  int it = 0;
  double true_rel = 1.0;

  // Outer restarts guard against recurrence-residual drift: each pass starts
  // from the exact residual of the current iterate.
  for (int pass = 0; pass < 3 && it < maxit; ++pass) {
    const std::vector<double> Ax = matvec(A, result.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ax[i];
    true_rel = norm(r) / bnorm;
    if (true_rel <= tol) break;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rel = true_rel;

    while (rel > tol && it < maxit) {
      Ap = matvec(A, p);
      const double pAp = dot(p, Ap);
      if (pAp <= 1e-30)
        throw SolverError("pcg: p^T A p breakdown, matrix is not positive definite");
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < n; ++i) {
        result.x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = dot(r, z);
      if (rz_next < 0.0)
        throw SolverError("pcg: preconditioned residual product turned negative");
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      ++it;
      rel = norm(r) / bnorm;
    }
  }

  const std::vector<double> Ax = matvec(A, result.x);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ax[i];
  result.report.rel_residual = norm(r) / bnorm;
  result.report.iterations = it;
  result.report.converged = result.report.rel_residual <= tol;
  return result;
}

}  // namespace bandfem
