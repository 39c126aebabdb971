#pragma once

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <memory>

#include "dtnlab/linalg.hpp"

namespace dtnlab::detail {

// Supernodal Cholesky (CHOLMOD) for SPD systems, simplicial LDL^T otherwise.
class SymmetricFactor {
 public:
  explicit SymmetricFactor(const SparseMatrix& a);

  bool positive_definite() const { return static_cast<bool>(llt_); }
  double pivot_ratio() const { return pivot_ratio_; }
  int negative_pivots() const { return negative_pivots_; }

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;

 private:
  struct Supernodal : Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> {
    Supernodal() { cholmod().print = 0; }
    double rcond() { return cholmod_rcond(m_cholmodFactor, &cholmod()); }
  };
  std::unique_ptr<Supernodal> llt_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt_;
  double pivot_ratio_ = 0.0;
  int negative_pivots_ = 0;
};

}  // namespace dtnlab::detail
