#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "deepdc/evalkit.hpp"
#include "deepdc/image.hpp"
#include "deepdc/splitmix64.hpp"

namespace deepdc {

/// Mild geometric transforms whose effect on perceived quality is assumed
/// negligible.
struct GtConfig {
  double translate_frac = 0.05;
  double rotate_deg = 3.0;
  double scale_factor = 1.05;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class TransformKind { Translation, Rotation, Scaling, Combined };

inline constexpr TransformKind kAllTransforms[] = {TransformKind::Translation, TransformKind::Rotation,
                                                   TransformKind::Scaling, TransformKind::Combined};

/// Accepts "translation", "rotation", "scaling", "combined" or the
/// one-letter suffixes t, r, s, c.
TransformKind parse_transform_kind(std::string_view name);
char transform_suffix(TransformKind kind);

/// Integer shift of round(frac * axis length) pixels along one random axis
/// with random sign. Out-of-range samples reflect at the border.
Image translate(const Image& img, double frac, SplitMix64& rng);
/// Rotation by +-degrees about the image center, bilinear with reflection.
Image rotate(const Image& img, double degrees, SplitMix64& rng);
/// Magnification by `factor` about the center, cropped to the input size.
Image scale_crop(const Image& img, double factor);

/// Output has the input's dimensions. Combined applies translation, rotation
/// and scaling in that order, each with its own draws from `rng`.
Image apply_transform(const Image& img, TransformKind kind, const GtConfig& cfg, SplitMix64& rng);

struct GtDatasetResult {
  DatasetManifest manifest;
  std::vector<RecordError> errors;
};

/// For every record, emits the record itself plus one variant per transform
/// kind as `<stem>__{t|r|s|c}.png` in `out_dir`, all with the source MOS.
/// The returned manifest's paths are relative to `out_dir`, and it is also
/// written there as manifest.csv. Record i draws from the substream
/// (cfg.seed, i).
GtDatasetResult build_gt_dataset(const DatasetManifest& manifest, const GtConfig& cfg,
                                 const std::filesystem::path& out_dir);

}  // namespace deepdc
