#pragma once

#include <Eigen/Dense>

#include "kemeny/chain.hpp"

namespace kemeny::detail {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Stationary vector: one balance equation replaced by the normalization,
// then a direct LU solve with one pass of iterative refinement.
template <class Real>
Vec<Real> stationary_replaced_row(const Mat<Real>& rates, TimeKind kind) {
  const long m = rates.rows();
  Mat<Real> sys = rates.transpose();
  if (kind == TimeKind::Discrete) sys -= Mat<Real>::Identity(m, m);
  sys.row(0).setOnes();
  Vec<Real> b = Vec<Real>::Zero(m);
  b(0) = Real(1);

  Eigen::PartialPivLU<Mat<Real>> lu(sys);
  Vec<Real> x = lu.solve(b);
  x += lu.solve(Vec<Real>(b - sys * x));
  return x;
}

// True when every entry off the first sub/super diagonal is zero.
template <class Real>
bool is_tridiagonal(const Mat<Real>& a) {
  const long m = a.rows();
  if (m < 2) return false;
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j)
      if (std::abs(i - j) > 1 && a(i, j) != Real(0)) return false;
  return true;
}

}  // namespace kemeny::detail
