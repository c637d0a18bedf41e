#include "deepdc/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "deepdc/error.hpp"
#include "deepdc/splitmix64.hpp"

namespace deepdc {

int layer_block(const std::string& name) {
  int block = 0, index = 0;
  char tail = 0;
  if (std::sscanf(name.c_str(), "conv%d_%d%c", &block, &index, &tail) != 2 || block < 1)
    throw Error(ErrorCode::CorruptTensor, "layer name '" + name + "' is not conv<block>_<index>");
  return block;
}

std::vector<LayerShape> vgg19_topology(int scale) {
  if (scale != 1 && scale != 4 && scale != 8)
    throw Error(ErrorCode::InvalidScale, "scale must be 1, 4 or 8, got " + std::to_string(scale));
  static constexpr int kBlockWidths[] = {64, 128, 256, 512, 512};
  static constexpr int kBlockDepths[] = {2, 2, 4, 4, 4};
  std::vector<LayerShape> shapes;
  Eigen::Index in = 3;
  for (int b = 0; b < 5; ++b) {
    const Eigen::Index out = kBlockWidths[b] / scale;
    for (int k = 0; k < kBlockDepths[b]; ++k) {
      shapes.push_back({"conv" + std::to_string(b + 1) + "_" + std::to_string(k + 1), in, out});
      in = out;
    }
  }
  return shapes;
}

const ConvLayer* BackboneWeights::find(const std::string& name) const {
  const auto it = std::find_if(layers.begin(), layers.end(), [&](const ConvLayer& l) { return l.name == name; });
  return it == layers.end() ? nullptr : &*it;
}

void BackboneWeights::validate() const {
  if (layers.empty()) throw Error(ErrorCode::CorruptTensor, "no layers");
  for (int c = 0; c < 3; ++c) {
    if (!(std[c] > 0.0) || !std::isfinite(std[c]) || !std::isfinite(mean[c]))
      throw Error(ErrorCode::CorruptTensor, "normalization constants must be finite with std > 0");
  }
  int prev_block = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const ConvLayer& layer = layers[i];
    const int block = layer_block(layer.name);
    if (block < prev_block) throw Error(ErrorCode::CorruptTensor, layer.name + " is out of network order");
    prev_block = block;
    if (layer.kernel.rows() < 1 || layer.kernel.cols() < 9 || layer.kernel.cols() % 9 != 0)
      throw Error(ErrorCode::CorruptTensor, layer.name + ": bad kernel shape");
    if (layer.bias.size() != layer.out_channels()) throw Error(ErrorCode::CorruptTensor, layer.name + ": bad bias size");
    if (i == 0 && layer.in_channels() != 3)
      throw Error(ErrorCode::CorruptTensor, layer.name + ": first layer must take 3 channels");
    if (i > 0 && layer.in_channels() != layers[i - 1].out_channels())
      throw Error(ErrorCode::CorruptTensor, layer.name + ": input channels do not match previous layer");
    if (!layer.kernel.allFinite() || !layer.bias.allFinite())
      throw Error(ErrorCode::CorruptTensor, layer.name + ": non-finite parameters");
  }

  if (taps.empty()) throw Error(ErrorCode::MissingTap, "no taps");
  std::size_t last = 0;
  for (std::size_t t = 0; t < taps.size(); ++t) {
    const auto it = std::find_if(layers.begin(), layers.end(), [&](const ConvLayer& l) { return l.name == taps[t]; });
    if (it == layers.end()) throw Error(ErrorCode::MissingTap, "tap " + taps[t] + " has no layer");
    const auto pos = static_cast<std::size_t>(it - layers.begin());
    if (t > 0 && pos <= last) throw Error(ErrorCode::MissingTap, "taps are not in network order");
    last = pos;
  }
  if (architecture == "vgg19" && taps != kVgg19Taps) {
    for (const auto& want : kVgg19Taps)
      if (std::find(taps.begin(), taps.end(), want) == taps.end())
        throw Error(ErrorCode::MissingTap, "vgg19 container lacks tap " + want);
    throw Error(ErrorCode::MissingTap, "vgg19 taps must be exactly conv1_2, conv2_2, conv3_4, conv4_4, conv5_4");
  }
}

BackboneWeights generate_test_backbone(std::uint64_t seed, int scale) {
  BackboneWeights weights;
  weights.architecture = "vgg19";
  weights.taps = kVgg19Taps;
  SplitMix64 rng(seed);
  for (const auto& shape : vgg19_topology(scale)) {
    ConvLayer layer;
    layer.name = shape.name;
    const double fan_in = static_cast<double>(shape.in_channels) * 9.0;
    const double limit = std::sqrt(6.0 / fan_in);
    layer.kernel.resize(shape.out_channels, shape.in_channels * 9);
    // Row-major fill order = out x in x 3 x 3 order.
    for (Eigen::Index i = 0; i < layer.kernel.size(); ++i)
      layer.kernel.data()[i] = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
    layer.bias = Eigen::VectorXf::Zero(shape.out_channels);
    weights.layers.push_back(std::move(layer));
  }
  return weights;
}

Tensor3 normalize(const Image& img, const BackboneWeights& weights) {
  Tensor3 out(3, img.height(), img.width());
  for (int c = 0; c < 3; ++c) {
    const Eigen::Map<const Eigen::RowVectorXf> plane(img.channels[c].data(), img.height() * img.width());
    out.data.row(c) = ((plane.cast<double>().array() - weights.mean[c]) / weights.std[c]).cast<float>().matrix();
  }
  return out;
}

Tensor3 preprocess(const Image& img, Eigen::Index short_side, const BackboneWeights& weights) {
  if (short_side < 32) throw Error(ErrorCode::ImageTooSmall, "short side must be at least 32");
  if (img.empty()) throw Error(ErrorCode::ImageTooSmall, "image is empty");
  return normalize(resize_short_side(img, short_side), weights);
}

Tensor3 conv2d_forward(const Tensor3& input, const FeatureMatrix& kernel, const Eigen::VectorXf& bias) {
  const Eigen::Index cin = input.channels();
  const Eigen::Index h = input.height;
  const Eigen::Index w = input.width;
  if (kernel.cols() != cin * 9) throw Error(ErrorCode::ShapeMismatch, "kernel input channels do not match tensor");
  if (bias.size() != kernel.rows()) throw Error(ErrorCode::ShapeMismatch, "bias size does not match kernel");
  if (input.data.cols() != h * w) throw Error(ErrorCode::ShapeMismatch, "tensor geometry is inconsistent");

  Tensor3 out(kernel.rows(), h, w);
  // im2col over bands of output rows keeps the column buffer bounded.
  const Eigen::Index band = std::max<Eigen::Index>(1, 16384 / std::max<Eigen::Index>(w, 1));
  FeatureMatrix cols;
  for (Eigen::Index y0 = 0; y0 < h; y0 += band) {
    const Eigen::Index rows = std::min(band, h - y0);
    cols.setZero(cin * 9, rows * w);
    for (Eigen::Index c = 0; c < cin; ++c) {
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          float* dst = cols.row(c * 9 + ky * 3 + kx).data();
          for (Eigen::Index y = 0; y < rows; ++y) {
            const Eigen::Index sy = y0 + y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            const float* src = input.data.row(c).data() + sy * w;
            const Eigen::Index x_lo = kx == 0 ? 1 : 0;
            const Eigen::Index x_hi = kx == 2 ? w - 1 : w;
            for (Eigen::Index x = x_lo; x < x_hi; ++x) dst[y * w + x] = src[x + kx - 1];
          }
        }
      }
    }
    out.data.middleCols(y0 * w, rows * w).noalias() = kernel * cols;
  }
  out.data.colwise() += bias;
  return out;
}

void relu_inplace(Tensor3& t) { t.data = t.data.cwiseMax(0.0f); }

Tensor3 max_pool2x2(const Tensor3& input) {
  const Eigen::Index h = input.height / 2;
  const Eigen::Index w = input.width / 2;
  if (h < 1 || w < 1) throw Error(ErrorCode::ShapeMismatch, "feature map too small to pool");
  Tensor3 out(input.channels(), h, w);
  for (Eigen::Index c = 0; c < input.channels(); ++c) {
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) {
        out(c, y, x) = std::max({input(c, 2 * y, 2 * x), input(c, 2 * y, 2 * x + 1), input(c, 2 * y + 1, 2 * x),
                                 input(c, 2 * y + 1, 2 * x + 1)});
      }
    }
  }
  return out;
}

FeatureStack extract_features(const BackboneWeights& weights, const Tensor3& input) {
  if (input.channels() != 3) throw Error(ErrorCode::ShapeMismatch, "input must have 3 channels");
  FeatureStack stack;
  Tensor3 x = input;
  int block = layer_block(weights.layers.front().name);
  std::size_t next_tap = 0;
  for (const ConvLayer& layer : weights.layers) {
    if (next_tap == weights.taps.size()) break;
    const int b = layer_block(layer.name);
    if (b != block) {
      x = max_pool2x2(x);
      block = b;
    }
    x = conv2d_forward(x, layer.kernel, layer.bias);
    relu_inplace(x);
    if (!x.data.allFinite()) throw Error(ErrorCode::NonFiniteActivation, "non-finite activation at " + layer.name);
    if (layer.name == weights.taps[next_tap]) {
      stack.push_back({layer.name, x});
      ++next_tap;
    }
  }
  return stack;
}

}  // namespace deepdc
