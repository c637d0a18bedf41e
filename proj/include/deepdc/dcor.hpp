#pragma once

// Energy-statistics kernels: pairwise distances, double centering and the
// sample distance covariance / variance / correlation, plus the derivative
// of the correlation with respect to one of its samples.
//
// Sample matrices hold one observation per row. Any real scalar type is
// accepted; every accumulation happens in double.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "deepdc/error.hpp"

namespace deepdc {

using MatrixXdRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DcorConfig {
  double epsilon = 1e-6;
  /// Only the Euclidean norm is supported.
  static constexpr int norm_exponent = 2;
};

/// Double-centered pairwise-distance matrix. Only double_center() builds one,
/// so row and column sums vanish up to round-off.
class CenteredDistanceMatrix {
 public:
  const Eigen::MatrixXd& matrix() const { return data_; }
  Eigen::Index size() const { return data_.rows(); }
  double operator()(Eigen::Index k, Eigen::Index l) const { return data_(k, l); }

 private:
  explicit CenteredDistanceMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {}

  template <typename Derived>
  friend CenteredDistanceMatrix double_center(const Eigen::MatrixBase<Derived>& a);

  Eigen::MatrixXd data_;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has NaN or infinite entries");
}

template <typename Derived>
void require_nonempty(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " is empty");
}

}  // namespace detail

/// Euclidean distances between all rows of `s`.
///
/// Uses ||u-v||^2 = ||u||^2 + ||v||^2 - 2 u.v on column-centered data (one
/// matrix product). Entries where that expansion cancels badly (squared
/// distance below 1e-4 of the squared norms) are recomputed directly, so
/// identical rows give exactly 0.
template <typename Derived>
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixBase<Derived>& s) {
  detail::require_nonempty(s, "sample matrix");
  detail::require_finite(s, "sample matrix");

  const Eigen::Index n = s.rows();
  MatrixXdRM x = s.template cast<double>();
  x.rowwise() -= x.colwise().mean();

  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(x);

  Eigen::MatrixXd out(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    out(l, l) = 0.0;
    for (Eigen::Index k = l + 1; k < n; ++k) {
      const double scale = sq(k) + sq(l);
      double d2 = scale - 2.0 * gram(k, l);
      if (d2 < 1e-4 * scale) d2 = (x.row(k) - x.row(l)).squaredNorm();
      const double d = std::sqrt(std::max(d2, 0.0));
      out(k, l) = d;
      out(l, k) = d;
    }
  }
  return out;
}

/// A_kl = a_kl - mean_k. - mean_.l + mean_..
template <typename Derived>
CenteredDistanceMatrix double_center(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "distance matrix must be square");
  if (a.rows() < 1) throw Error(ErrorCode::ShapeMismatch, "distance matrix is empty");
  const Eigen::MatrixXd ad = a.template cast<double>();
  const Eigen::VectorXd row_mean = ad.rowwise().mean();
  const Eigen::RowVectorXd col_mean = ad.colwise().mean();
  const double grand = ad.mean();
  Eigen::MatrixXd c = ad;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean;
  c.array() += grand;
  return CenteredDistanceMatrix(std::move(c));
}

template <typename Derived>
CenteredDistanceMatrix centered_distances(const Eigen::MatrixBase<Derived>& s) {
  return double_center(pairwise_distances(s));
}

inline double sample_dcov(const CenteredDistanceMatrix& ac, const CenteredDistanceMatrix& bc) {
  if (ac.size() != bc.size()) throw Error(ErrorCode::ShapeMismatch, "centered matrices differ in size");
  const double n = static_cast<double>(ac.size());
  return ac.matrix().cwiseProduct(bc.matrix()).sum() / (n * n);
}

inline double sample_dvar(const CenteredDistanceMatrix& ac) { return sample_dcov(ac, ac); }

/// Stabilized ratio (V2_xy + eps) / (sqrt(V2_x * V2_y) + eps).
///
/// With eps > 0 two zero-variance samples give 1. With eps == 0 a zero
/// denominator gives 0.
inline double dcorr_ratio(double v_xy, double v_x, double v_y, const DcorConfig& cfg) {
  if (!(cfg.epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be non-negative");
  const double denom = std::sqrt(v_x * v_y) + cfg.epsilon;
  if (denom == 0.0) return 0.0;
  return (v_xy + cfg.epsilon) / denom;
}

inline double sample_dcorr(const CenteredDistanceMatrix& ac, const CenteredDistanceMatrix& bc,
                           const DcorConfig& cfg = {}) {
  return dcorr_ratio(sample_dcov(ac, bc), sample_dvar(ac), sample_dvar(bc), cfg);
}

/// Squared sample distance correlation R^2_n(x, y) with the epsilon stabilizer.
template <typename DerivedX, typename DerivedY>
double sample_dcorr(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                    const DcorConfig& cfg = {}) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "samples have different observation counts");
  return sample_dcorr(centered_distances(x), centered_distances(y), cfg);
}

/// d R^2_n(x, y) / d y, one entry per entry of y.
///
/// Requires every off-diagonal pairwise distance in x and in y to be at
/// least 1e-12.
template <typename DerivedX, typename DerivedY>
Eigen::MatrixXd grad_sample_dcorr(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                  const DcorConfig& cfg = {}) {
  constexpr double kMinDistance = 1e-12;
  if (x.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "samples have different observation counts");
  if (!(cfg.epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be non-negative");

  const Eigen::MatrixXd a = pairwise_distances(x);
  const Eigen::MatrixXd b = pairwise_distances(y);
  const Eigen::Index n = b.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (k != l && (a(k, l) < kMinDistance || b(k, l) < kMinDistance))
        throw Error(ErrorCode::DegenerateSample, "two observations coincide");
    }
  }
  const MatrixXdRM yd = y.template cast<double>();
  if (n < 2) return Eigen::MatrixXd::Zero(yd.rows(), yd.cols());

  const CenteredDistanceMatrix ac = double_center(a);
  const CenteredDistanceMatrix bc = double_center(b);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double v_xy = sample_dcov(ac, bc);
  const double v_x = sample_dvar(ac);
  const double v_y = sample_dvar(bc);
  const double s = std::sqrt(v_x * v_y);
  const double denom = s + cfg.epsilon;

  // <A, B> = <A, b> because A is centered, so dV2_xy/db_kl = A_kl / n^2 and
  // dV2_y/db_kl = 2 B_kl / n^2.
  const double ds_dvy = v_y > 0.0 ? 0.5 * std::sqrt(v_x / v_y) : 0.0;
  const Eigen::MatrixXd g =
      (ac.matrix() * denom - (v_xy + cfg.epsilon) * ds_dvy * 2.0 * bc.matrix()) / (nn * denom * denom);

  // b_kl = ||y_k - y_l||; both (k,l) and (l,k) depend on y_k.
  Eigen::MatrixXd w = g.cwiseQuotient(b + Eigen::MatrixXd::Identity(n, n));
  w.diagonal().setZero();
  const Eigen::VectorXd row_sum = w.rowwise().sum();
  return 2.0 * (row_sum.asDiagonal() * yd - w * yd);
}

/// Product-moment correlation of two series.
template <typename DerivedX, typename DerivedY>
double pearson_corr(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "series differ in length");
  if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least two observations");
  Eigen::ArrayXd xd = x.derived().template cast<double>().reshaped().array();
  Eigen::ArrayXd yd = y.derived().template cast<double>().reshaped().array();
  if (!xd.allFinite() || !yd.allFinite()) throw Error(ErrorCode::NonFiniteInput, "series has non-finite values");
  xd -= xd.mean();
  yd -= yd.mean();
  const double sxx = xd.square().sum();
  const double syy = yd.square().sum();
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantInput, "series has zero variance");
  const double r = (xd * yd).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace deepdc
