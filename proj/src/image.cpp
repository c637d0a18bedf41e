#include "deepdc/image.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "deepdc/error.hpp"

namespace deepdc {

namespace {

struct Taps {
  Eigen::Index first = 0;
  std::vector<double> weights;
};

// Filter taps for every output coordinate along one axis.
std::vector<Taps> axis_taps(Eigen::Index in_size, Eigen::Index out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double support = std::max(scale, 1.0);
  std::vector<Taps> taps(out_size);
  for (Eigen::Index i = 0; i < out_size; ++i) {
    const double center = (static_cast<double>(i) + 0.5) * scale;
    auto lo = static_cast<Eigen::Index>(std::floor(center - support));
    auto hi = static_cast<Eigen::Index>(std::ceil(center + support));
    lo = std::max<Eigen::Index>(lo, 0);
    hi = std::min<Eigen::Index>(hi, in_size);
    Taps& t = taps[i];
    t.first = lo;
    double total = 0.0;
    for (Eigen::Index j = lo; j < hi; ++j) {
      const double x = (static_cast<double>(j) + 0.5 - center) / support;
      const double w = std::max(0.0, 1.0 - std::abs(x));
      t.weights.push_back(w);
      total += w;
    }
    if (total > 0.0)
      for (double& w : t.weights) w /= total;
    // Trim zero-weight ends so same-size resampling is an exact copy.
    while (!t.weights.empty() && t.weights.back() == 0.0) t.weights.pop_back();
    while (!t.weights.empty() && t.weights.front() == 0.0) {
      t.weights.erase(t.weights.begin());
      ++t.first;
    }
  }
  return taps;
}

}  // namespace

Plane resample_plane(const Plane& src, Eigen::Index out_height, Eigen::Index out_width) {
  if (out_height < 1 || out_width < 1 || src.rows() < 1 || src.cols() < 1)
    throw Error(ErrorCode::ImageTooSmall, "resize to or from an empty image");
  if (out_height == src.rows() && out_width == src.cols()) return src;

  const auto col_taps = axis_taps(src.cols(), out_width);
  const auto row_taps = axis_taps(src.rows(), out_height);

  Eigen::ArrayXXd horizontal(src.rows(), out_width);
  for (Eigen::Index r = 0; r < src.rows(); ++r) {
    for (Eigen::Index c = 0; c < out_width; ++c) {
      const Taps& t = col_taps[c];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * src(r, t.first + k);
      horizontal(r, c) = acc;
    }
  }
  Plane out(out_height, out_width);
  for (Eigen::Index r = 0; r < out_height; ++r) {
    const Taps& t = row_taps[r];
    for (Eigen::Index c = 0; c < out_width; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * horizontal(t.first + k, c);
      out(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

Image resize(const Image& img, Eigen::Index out_height, Eigen::Index out_width) {
  Image out;
  for (int c = 0; c < 3; ++c) out.channels[c] = resample_plane(img.channels[c], out_height, out_width);
  out.clamp();
  return out;
}

std::array<Eigen::Index, 2> short_side_geometry(Eigen::Index height, Eigen::Index width, Eigen::Index short_side) {
  if (height < 1 || width < 1) throw Error(ErrorCode::ImageTooSmall, "image is empty");
  if (short_side < 1) throw Error(ErrorCode::ImageTooSmall, "short side must be positive");
  if (height <= width) {
    const auto w = static_cast<Eigen::Index>(std::llround(static_cast<double>(width) * short_side / height));
    return {short_side, std::max<Eigen::Index>(w, short_side)};
  }
  const auto h = static_cast<Eigen::Index>(std::llround(static_cast<double>(height) * short_side / width));
  return {std::max<Eigen::Index>(h, short_side), short_side};
}

Image resize_short_side(const Image& img, Eigen::Index short_side) {
  const auto [h, w] = short_side_geometry(img.height(), img.width(), short_side);
  return resize(img, h, w);
}

}  // namespace deepdc
