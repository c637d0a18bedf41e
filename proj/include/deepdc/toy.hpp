#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "deepdc/splitmix64.hpp"

namespace deepdc {

/// x ~ U(-1, 1) with a linear (2x + 1) and a quadratic (x^2) response, for
/// contrasting Pearson correlation with distance correlation.
struct ToySeries {
  Eigen::VectorXd x;
  Eigen::VectorXd linear;
  Eigen::VectorXd quadratic;
};

inline ToySeries toy_series(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ToySeries s;
  s.x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.x(i) = rng.uniform(-1.0, 1.0);
  s.linear = 2.0 * s.x.array() + 1.0;
  s.quadratic = s.x.array().square();
  return s;
}

}  // namespace deepdc
