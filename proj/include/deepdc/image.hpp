#pragma once

#include <array>
#include <filesystem>

#include <Eigen/Core>

namespace deepdc {

using Plane = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// RGB image with values in [0, 1], stored as three height x width planes.
struct Image {
  std::array<Plane, 3> channels;

  Image() = default;
  Image(Eigen::Index height, Eigen::Index width, float fill = 0.0f) {
    for (auto& c : channels) c = Plane::Constant(height, width, fill);
  }

  Eigen::Index height() const { return channels[0].rows(); }
  Eigen::Index width() const { return channels[0].cols(); }
  bool empty() const { return height() == 0 || width() == 0; }

  void clamp() {
    for (auto& c : channels) c = c.max(0.0f).min(1.0f);
  }

  bool operator==(const Image& other) const {
    if (height() != other.height() || width() != other.width()) return false;
    for (int c = 0; c < 3; ++c)
      if (!(channels[c] == other.channels[c]).all()) return false;
    return true;
  }
};

/// Separable triangle-filter resampling. When shrinking, the filter support
/// widens with the scale factor, which area-averages before interpolation.
/// Same-size resampling returns the input unchanged.
Plane resample_plane(const Plane& src, Eigen::Index out_height, Eigen::Index out_width);
Image resize(const Image& img, Eigen::Index out_height, Eigen::Index out_width);

/// Output geometry with the shorter side equal to `short_side` and the
/// longer side rounded to preserve the aspect ratio.
std::array<Eigen::Index, 2> short_side_geometry(Eigen::Index height, Eigen::Index width, Eigen::Index short_side);
Image resize_short_side(const Image& img, Eigen::Index short_side);

/// PNG (8/16-bit, gray/RGB, with or without alpha) or JPEG, picked by
/// content. Gray is replicated to RGB; alpha is composited over white.
Image read_image(const std::filesystem::path& path);

/// 8-bit RGB PNG.
void write_png(const Image& img, const std::filesystem::path& path);

}  // namespace deepdc
