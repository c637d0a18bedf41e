#pragma once

#include <string>
#include <vector>

#include "deepdc/backbone.hpp"
#include "deepdc/dcor.hpp"
#include "deepdc/image.hpp"

namespace deepdc {

struct LayerScore {
  std::string layer;
  double r_squared = 0.0;
};

using LayerProfile = std::vector<LayerScore>;

/// value = 1 - mean of the per-layer squared distance correlations.
/// Higher means the distorted image is further from the reference.
struct QualityScore {
  double value = 0.0;
  LayerProfile profile;
};

/// Per-tap R^2 between two feature stacks. Observations are channels, each a
/// flattened height x width map. Values are clamped into [0, 1].
LayerProfile layer_dcorr_profile(const FeatureStack& fx, const FeatureStack& fy, const DcorConfig& cfg = {});

/// Aggregates a profile into the final score.
QualityScore aggregate(LayerProfile profile);

/// Both images are resized to the same short side; differing resulting
/// geometry (aspect mismatch) is a ShapeMismatch error.
QualityScore deepdc_score(const Image& ref, const Image& dist, const BackboneWeights& weights,
                          Eigen::Index short_side = 224, const DcorConfig& cfg = {});

/// Features of one image after preprocessing.
FeatureStack image_features(const Image& img, const BackboneWeights& weights, Eigen::Index short_side);

}  // namespace deepdc
