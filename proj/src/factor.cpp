#include "factor.hpp"

#include "dtnlab/error.hpp"

namespace dtnlab::detail {

SymmetricFactor::SymmetricFactor(const SparseMatrix& a) {
  if (a.rows() == 0) {
    pivot_ratio_ = 1.0;
    return;
  }
  auto llt = std::make_unique<Supernodal>();
  llt->compute(a);
  if (llt->info() == Eigen::Success) {
    pivot_ratio_ = llt->rcond();
    llt_ = std::move(llt);
    return;
  }
  ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>(a);
  if (ldlt_->info() != Eigen::Success) throw Error(ErrorKind::solver_failure, "LDL^T factorisation failed");
  const Vector d = ldlt_->vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  pivot_ratio_ = dmax > 0.0 ? d.cwiseAbs().minCoeff() / dmax : 0.0;
  negative_pivots_ = static_cast<int>((d.array() < 0.0).count());
}

Vector SymmetricFactor::solve(const Vector& b) const {
  if (b.size() == 0) return b;
  Vector x = llt_ ? Vector(llt_->solve(b)) : Vector(ldlt_->solve(b));
  if (!x.allFinite()) throw Error(ErrorKind::solver_failure, "back-solve produced non-finite values");
  return x;
}

DenseMatrix SymmetricFactor::solve(const DenseMatrix& b) const {
  if (b.size() == 0) return b;
  DenseMatrix x = llt_ ? DenseMatrix(llt_->solve(b)) : DenseMatrix(ldlt_->solve(b));
  if (!x.allFinite()) throw Error(ErrorKind::solver_failure, "back-solve produced non-finite values");
  return x;
}

}  // namespace dtnlab::detail
