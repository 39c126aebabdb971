#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dtnlab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Eigenpairs of the symmetric-definite pencil (A, B), ascending, with
/// B-orthonormal eigenvectors in the columns of `vectors`.
struct GeneralizedEigen {
  Vector values;
  DenseMatrix vectors;
};

/// Dense solve of A x = lambda B x (LAPACK dsygvd). Only the upper
/// triangles of A and B are read. Throws spectral_failure on non-convergence
/// or if B is not positive definite.
GeneralizedEigen generalized_symmetric_eigen(const DenseMatrix& a, const DenseMatrix& b,
                                             bool want_vectors = true);

/// Eigenvalues of a dense symmetric matrix, ascending (LAPACK dsyevd).
Vector symmetric_eigenvalues(const DenseMatrix& a);

/// Largest singular value of a dense matrix (LAPACK dgesdd).
double largest_singular_value(const DenseMatrix& a);

}  // namespace dtnlab
