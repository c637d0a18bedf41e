#include "deepdc/geotransform.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "deepdc/error.hpp"

namespace deepdc {

namespace {

// Half-sample symmetric reflection: -1 -> 0, n -> n - 1.
Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

float bilinear(const Plane& p, double y, double x) {
  const double fy = std::floor(y), fx = std::floor(x);
  const double ty = y - fy, tx = x - fx;
  const auto y0 = static_cast<Eigen::Index>(fy), x0 = static_cast<Eigen::Index>(fx);
  const Eigen::Index h = p.rows(), w = p.cols();
  const double v00 = p(reflect(y0, h), reflect(x0, w));
  const double v01 = p(reflect(y0, h), reflect(x0 + 1, w));
  const double v10 = p(reflect(y0 + 1, h), reflect(x0, w));
  const double v11 = p(reflect(y0 + 1, h), reflect(x0 + 1, w));
  return static_cast<float>((1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11));
}

// Resamples with out(y, x) = in(source(y, x)).
template <typename Map>
Image warp(const Image& img, Map source) {
  Image out(img.height(), img.width());
  for (Eigen::Index y = 0; y < img.height(); ++y) {
    for (Eigen::Index x = 0; x < img.width(); ++x) {
      const auto [sy, sx] = source(static_cast<double>(y), static_cast<double>(x));
      for (int c = 0; c < 3; ++c) out.channels[c](y, x) = bilinear(img.channels[c], sy, sx);
    }
  }
  out.clamp();
  return out;
}

}  // namespace

void GtConfig::validate() const {
  if (!(translate_frac >= 0.0 && translate_frac < 0.5))
    throw Error(ErrorCode::InvalidConfig, "translate fraction must be in [0, 0.5)");
  if (!(std::abs(rotate_deg) < 45.0)) throw Error(ErrorCode::InvalidConfig, "rotation must be below 45 degrees");
  if (!(scale_factor > 1.0 && scale_factor < 2.0)) throw Error(ErrorCode::InvalidConfig, "scale factor must be in (1, 2)");
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "translation" || name == "t") return TransformKind::Translation;
  if (name == "rotation" || name == "r") return TransformKind::Rotation;
  if (name == "scaling" || name == "s") return TransformKind::Scaling;
  if (name == "combined" || name == "c") return TransformKind::Combined;
  throw Error(ErrorCode::UnknownKind, "unknown transform '" + std::string(name) + "'");
}

char transform_suffix(TransformKind kind) {
  switch (kind) {
    case TransformKind::Translation: return 't';
    case TransformKind::Rotation: return 'r';
    case TransformKind::Scaling: return 's';
    case TransformKind::Combined: return 'c';
  }
  throw Error(ErrorCode::UnknownKind, "unknown transform");
}

Image translate(const Image& img, double frac, SplitMix64& rng) {
  const bool vertical = rng.coin();
  const Eigen::Index sign = rng.coin() ? 1 : -1;
  const Eigen::Index length = vertical ? img.height() : img.width();
  const Eigen::Index shift = sign * static_cast<Eigen::Index>(std::llround(frac * static_cast<double>(length)));
  const Eigen::Index dy = vertical ? shift : 0;
  const Eigen::Index dx = vertical ? 0 : shift;
  Image out(img.height(), img.width());
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index y = 0; y < img.height(); ++y)
      for (Eigen::Index x = 0; x < img.width(); ++x)
        out.channels[c](y, x) = img.channels[c](reflect(y - dy, img.height()), reflect(x - dx, img.width()));
  }
  return out;
}

Image rotate(const Image& img, double degrees, SplitMix64& rng) {
  const double angle = (rng.coin() ? 1.0 : -1.0) * degrees * std::numbers::pi / 180.0;
  const double cy = 0.5 * static_cast<double>(img.height() - 1);
  const double cx = 0.5 * static_cast<double>(img.width() - 1);
  const double cs = std::cos(angle), sn = std::sin(angle);
  return warp(img, [&](double y, double x) {
    const double dy = y - cy, dx = x - cx;
    return std::pair{cy + cs * dy - sn * dx, cx + sn * dy + cs * dx};
  });
}

Image scale_crop(const Image& img, double factor) {
  const double cy = 0.5 * static_cast<double>(img.height() - 1);
  const double cx = 0.5 * static_cast<double>(img.width() - 1);
  return warp(img, [&](double y, double x) { return std::pair{cy + (y - cy) / factor, cx + (x - cx) / factor}; });
}

Image apply_transform(const Image& img, TransformKind kind, const GtConfig& cfg, SplitMix64& rng) {
  cfg.validate();
  if (img.empty()) throw Error(ErrorCode::ImageTooSmall, "image is empty");
  switch (kind) {
    case TransformKind::Translation: return translate(img, cfg.translate_frac, rng);
    case TransformKind::Rotation: return rotate(img, cfg.rotate_deg, rng);
    case TransformKind::Scaling: return scale_crop(img, cfg.scale_factor);
    case TransformKind::Combined: {
      const Image shifted = translate(img, cfg.translate_frac, rng);
      const Image turned = rotate(shifted, cfg.rotate_deg, rng);
      return scale_crop(turned, cfg.scale_factor);
    }
  }
  throw Error(ErrorCode::UnknownKind, "unknown transform");
}

GtDatasetResult build_gt_dataset(const DatasetManifest& manifest, const GtConfig& cfg,
                                 const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto out_abs = std::filesystem::absolute(out_dir).lexically_normal();
  const auto relative_to_out = [&](const std::string& path) {
    return std::filesystem::absolute(manifest.resolve(path)).lexically_normal().lexically_relative(out_abs).generic_string();
  };

  GtDatasetResult result;
  result.manifest.base_dir = out_dir;
  std::set<std::string> stems;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const ManifestRecord& rec = manifest.records[i];
    try {
      const std::string stem = std::filesystem::path(rec.dist).stem().string();
      if (!stems.insert(stem).second) throw Error(ErrorCode::IoError, "duplicate output stem '" + stem + "'");
      const Image source = read_image(manifest.resolve(rec.dist));
      const std::string ref = relative_to_out(rec.ref);

      std::vector<ManifestRecord> rows{{ref, relative_to_out(rec.dist), rec.mos}};
      SplitMix64 rng = SplitMix64::substream(cfg.seed, i);
      for (const TransformKind kind : kAllTransforms) {
        const std::string name = stem + "__" + transform_suffix(kind) + ".png";
        write_png(apply_transform(source, kind, cfg, rng), out_dir / name);
        rows.push_back({ref, name, rec.mos});
      }
      result.manifest.records.insert(result.manifest.records.end(), rows.begin(), rows.end());
    } catch (const Error& e) {
      result.errors.push_back({i, e.what()});
    }
  }
  write_manifest(result.manifest, out_dir / "manifest.csv");
  return result;
}

}  // namespace deepdc
