#pragma once

// Brute-force reference for the distance statistics, written with explicit
// loops and no matrix identities. Used by the test suites as an oracle for
// the closed-form kernels in dcor.hpp.

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "deepdc/dcor.hpp"
#include "deepdc/error.hpp"

namespace deepdc::oracle {

namespace detail {

using Table = std::vector<std::vector<double>>;

template <typename Derived>
Table distance_table(const Eigen::MatrixBase<Derived>& s) {
  const long n = s.rows();
  const long d = s.cols();
  Table a(n, std::vector<double>(n, 0.0));
  for (long k = 0; k < n; ++k) {
    for (long l = 0; l < n; ++l) {
      double acc = 0.0;
      for (long c = 0; c < d; ++c) {
        const double diff = static_cast<double>(s(k, c)) - static_cast<double>(s(l, c));
        acc += diff * diff;
      }
      a[k][l] = std::sqrt(acc);
    }
  }
  return a;
}

// A_kl = a_kl - abar_k. - abar_.l + abar_.., with every mean a fresh loop.
inline double centered_entry(const Table& a, long k, long l) {
  const long n = static_cast<long>(a.size());
  double row = 0.0, col = 0.0, all = 0.0;
  for (long j = 0; j < n; ++j) row += a[k][j];
  for (long i = 0; i < n; ++i) col += a[i][l];
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) all += a[i][j];
  return a[k][l] - row / n - col / n + all / (static_cast<double>(n) * n);
}

inline double dcov(const Table& a, const Table& b) {
  const long n = static_cast<long>(a.size());
  double acc = 0.0;
  for (long k = 0; k < n; ++k)
    for (long l = 0; l < n; ++l) acc += centered_entry(a, k, l) * centered_entry(b, k, l);
  return acc / (static_cast<double>(n) * n);
}

}  // namespace detail

template <typename DerivedX, typename DerivedY>
double sample_dcorr_naive(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                          const DcorConfig& cfg = {}) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "samples have different observation counts");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "sample has non-finite entries");
  if (!(cfg.epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be non-negative");
  const auto a = detail::distance_table(x);
  const auto b = detail::distance_table(y);
  const double v_xy = detail::dcov(a, b);
  const double v_x = detail::dcov(a, a);
  const double v_y = detail::dcov(b, b);
  const double denom = std::sqrt(v_x * v_y) + cfg.epsilon;
  if (denom == 0.0) return 0.0;
  return (v_xy + cfg.epsilon) / denom;
}

}  // namespace deepdc::oracle
