#pragma once

#include <Eigen/Dense>

#include "fracheat/errors.hpp"

namespace fracheat {

/// Thomas algorithm for a tridiagonal system.
///
/// `lower[i]` multiplies x[i-1] in row i (lower[0] unused), `upper[i]`
/// multiplies x[i+1] (upper[n-1] unused). No pivoting; throws DomainError on
/// a vanishing pivot.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& lower,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& diag,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& upper,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& rhs) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = diag.size();
  Vector c(n);
  Vector d(n);

  Scalar pivot = diag[0];
  if (pivot == Scalar(0)) throw DomainError("solve_tridiagonal: zero pivot");
  c[0] = n > 1 ? upper[0] / pivot : Scalar(0);
  d[0] = rhs[0] / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    if (pivot == Scalar(0)) throw DomainError("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / pivot : Scalar(0);
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
  }

  Vector x(n);
  x[n - 1] = d[n - 1];
  for (Eigen::Index i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace fracheat
