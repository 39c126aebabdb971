#include "dtnlab/linalg.hpp"

#include <lapacke.h>

#include <string>

#include "dtnlab/error.hpp"

namespace dtnlab {

GeneralizedEigen generalized_symmetric_eigen(const DenseMatrix& a, const DenseMatrix& b,
                                             bool want_vectors) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw Error(ErrorKind::shape, "generalized eigenproblem needs square matrices of equal size");
  }
  const lapack_int n = static_cast<lapack_int>(a.rows());
  GeneralizedEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  DenseMatrix work_a = a;  // column-major; overwritten by eigenvectors
  DenseMatrix work_b = b;
  const lapack_int info =
      LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, want_vectors ? 'V' : 'N', 'U', n, work_a.data(), n,
                     work_b.data(), n, out.values.data());
  if (info != 0) {
    throw Error(ErrorKind::spectral_failure,
                "dsygvd failed with info=" + std::to_string(info) +
                    (info > n ? " (second matrix not positive definite)" : ""));
  }
  if (want_vectors) out.vectors = std::move(work_a);
  return out;
}

Vector symmetric_eigenvalues(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::shape, "symmetric_eigenvalues needs a square matrix");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Vector values(n);
  if (n == 0) return values;
  DenseMatrix work = a;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, values.data());
  if (info != 0) throw Error(ErrorKind::spectral_failure, "dsyevd failed with info=" + std::to_string(info));
  return values;
}

double largest_singular_value(const DenseMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  if (m == 0 || n == 0) return 0.0;
  DenseMatrix work = a;
  Vector s(std::min(m, n));
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(),
                                         nullptr, 1, nullptr, 1);
  if (info != 0) throw Error(ErrorKind::spectral_failure, "dgesdd failed with info=" + std::to_string(info));
  return s(0);
}

}  // namespace dtnlab
