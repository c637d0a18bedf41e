#include "deepdc/metric.hpp"

#include <algorithm>

#include "deepdc/error.hpp"

namespace deepdc {

LayerProfile layer_dcorr_profile(const FeatureStack& fx, const FeatureStack& fy, const DcorConfig& cfg) {
  if (fx.size() != fy.size()) throw Error(ErrorCode::TapMismatch, "feature stacks have different tap counts");
  LayerProfile profile;
  profile.reserve(fx.size());
  for (std::size_t j = 0; j < fx.size(); ++j) {
    const Tensor3& a = fx[j].tensor;
    const Tensor3& b = fy[j].tensor;
    if (fx[j].name != fy[j].name || a.channels() != b.channels() || a.height != b.height || a.width != b.width)
      throw Error(ErrorCode::TapMismatch, "tap " + fx[j].name + " differs between stacks");
    const double r2 = sample_dcorr(a.data, b.data, cfg);
    profile.push_back({fx[j].name, std::clamp(r2, 0.0, 1.0)});
  }
  return profile;
}

QualityScore aggregate(LayerProfile profile) {
  if (profile.empty()) throw Error(ErrorCode::InsufficientData, "empty layer profile");
  double sum = 0.0;
  for (const auto& s : profile) sum += s.r_squared;
  QualityScore score;
  score.value = 1.0 - sum / static_cast<double>(profile.size());
  score.profile = std::move(profile);
  return score;
}

FeatureStack image_features(const Image& img, const BackboneWeights& weights, Eigen::Index short_side) {
  return extract_features(weights, preprocess(img, short_side, weights));
}

QualityScore deepdc_score(const Image& ref, const Image& dist, const BackboneWeights& weights, Eigen::Index short_side,
                          const DcorConfig& cfg) {
  const Tensor3 x = preprocess(ref, short_side, weights);
  const Tensor3 y = preprocess(dist, short_side, weights);
  if (x.height != y.height || x.width != y.width)
    throw Error(ErrorCode::ShapeMismatch, "reference and distorted images differ in aspect ratio");
  return aggregate(layer_dcorr_profile(extract_features(weights, x), extract_features(weights, y), cfg));
}

}  // namespace deepdc
