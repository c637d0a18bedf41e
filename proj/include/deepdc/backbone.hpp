#pragma once

// VGG19-features forward pass driven by weights from a DDCW container.
//
// DDCW v1 layout (little-endian):
//   "DDCW" | u32 version | u32 metadata length | metadata (UTF-8 JSON)
//   then per tensor: u16 name length | name | u8 rank | rank x u64 dims | f32 data (row-major)
// Metadata keys: architecture, layers (network order), taps, mean, std.
// Every layer contributes "<layer>.weight" (out x in x 3 x 3) and
// "<layer>.bias" (out), in layer order.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deepdc/image.hpp"

namespace deepdc {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Channel-major activation tensor: one row per channel, each row a
/// flattened height x width map.
struct Tensor3 {
  FeatureMatrix data;
  Eigen::Index height = 0;
  Eigen::Index width = 0;

  Tensor3() = default;
  Tensor3(Eigen::Index channels, Eigen::Index h, Eigen::Index w)
      : data(FeatureMatrix::Zero(channels, h * w)), height(h), width(w) {}

  Eigen::Index channels() const { return data.rows(); }
  float& operator()(Eigen::Index c, Eigen::Index y, Eigen::Index x) { return data(c, y * width + x); }
  float operator()(Eigen::Index c, Eigen::Index y, Eigen::Index x) const { return data(c, y * width + x); }
};

struct ConvLayer {
  std::string name;
  /// out x (in * 9), row-major, i.e. the out x in x 3 x 3 kernel flattened.
  FeatureMatrix kernel;
  Eigen::VectorXf bias;

  Eigen::Index in_channels() const { return kernel.cols() / 9; }
  Eigen::Index out_channels() const { return kernel.rows(); }
};

inline constexpr std::uint32_t kContainerVersion = 1;
inline const std::vector<std::string> kVgg19Taps = {"conv1_2", "conv2_2", "conv3_4", "conv4_4", "conv5_4"};
inline constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd = {0.229, 0.224, 0.225};

struct BackboneWeights {
  std::string architecture = "vgg19";
  std::vector<ConvLayer> layers;
  std::vector<std::string> taps;
  std::array<double, 3> mean = kImageNetMean;
  std::array<double, 3> std = kImageNetStd;

  /// Throws CorruptTensor or MissingTap when the weights are unusable.
  void validate() const;
  const ConvLayer* find(const std::string& name) const;
};

struct FeatureMap {
  std::string name;
  Tensor3 tensor;
};

using FeatureStack = std::vector<FeatureMap>;

/// VGG19-features conv names and channel counts, divided by `scale`.
struct LayerShape {
  std::string name;
  Eigen::Index in_channels;
  Eigen::Index out_channels;
};
std::vector<LayerShape> vgg19_topology(int scale = 1);

/// Block index parsed from a "conv<block>_<k>" layer name.
int layer_block(const std::string& name);

std::vector<std::uint8_t> serialize_weights(const BackboneWeights& weights);
BackboneWeights parse_weights(const std::vector<std::uint8_t>& bytes);
void save_weights(const BackboneWeights& weights, const std::filesystem::path& path);
BackboneWeights load_weights(const std::filesystem::path& path);

/// Deterministic stand-in for pretrained weights: uniform(-s, s) kernels
/// with s = sqrt(6 / fan_in) from one splitmix64 stream, zero biases.
/// `scale` must be 1, 4 or 8.
BackboneWeights generate_test_backbone(std::uint64_t seed, int scale);

/// Resizes so the shorter side equals `short_side`, then normalizes each
/// channel with the container's mean and std.
Tensor3 preprocess(const Image& img, Eigen::Index short_side, const BackboneWeights& weights);
Tensor3 normalize(const Image& img, const BackboneWeights& weights);

/// 3x3 cross-correlation, zero padding 1, stride 1, plus bias.
Tensor3 conv2d_forward(const Tensor3& input, const FeatureMatrix& kernel, const Eigen::VectorXf& bias);
void relu_inplace(Tensor3& t);
/// 2x2 stride-2 max pooling, floor semantics.
Tensor3 max_pool2x2(const Tensor3& input);

/// Post-ReLU activations at every tap, in tap order.
FeatureStack extract_features(const BackboneWeights& weights, const Tensor3& input);

}  // namespace deepdc
