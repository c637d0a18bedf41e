#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "deepdc/backbone.hpp"
#include "deepdc/error.hpp"

namespace deepdc {

namespace {

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void le(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void f32(float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    le(bits);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::CorruptTensor, std::string("truncated ") + what);
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename T>
  T le(const char* what) {
    const auto* p = take(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
    return value;
  }
  float f32(const char* what) {
    const auto bits = le<std::uint32_t>(what);
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const std::string& name, const std::vector<std::uint64_t>& dims, const float* data,
                  std::size_t count) {
  w.le(static_cast<std::uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.le(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) w.le(d);
  for (std::size_t i = 0; i < count; ++i) w.f32(data[i]);
}

struct RawTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> values;
};

RawTensor read_tensor(Reader& r) {
  RawTensor t;
  const auto name_len = r.le<std::uint16_t>("tensor name length");
  const auto* name = r.take(name_len, "tensor name");
  t.name.assign(reinterpret_cast<const char*>(name), name_len);
  const auto rank = r.le<std::uint8_t>("tensor rank");
  std::uint64_t count = 1;
  for (int i = 0; i < rank; ++i) {
    t.dims.push_back(r.le<std::uint64_t>("tensor dims"));
    if (t.dims.back() > (1ULL << 32)) throw Error(ErrorCode::CorruptTensor, t.name + ": implausible dimension");
    count *= t.dims.back();
    if (count > (1ULL << 34)) throw Error(ErrorCode::CorruptTensor, t.name + ": implausible size");
  }
  if (count * sizeof(float) > r.remaining()) throw Error(ErrorCode::CorruptTensor, "truncated tensor data in " + t.name);
  t.values.resize(count);
  for (auto& v : t.values) v = r.f32("tensor data");
  return t;
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const BackboneWeights& weights) {
  nlohmann::json meta;
  meta["architecture"] = weights.architecture;
  meta["taps"] = weights.taps;
  meta["mean"] = weights.mean;
  meta["std"] = weights.std;
  auto& order = meta["layers"] = nlohmann::json::array();
  for (const auto& layer : weights.layers) order.push_back(layer.name);
  const std::string text = meta.dump();

  Writer w;
  w.bytes("DDCW", 4);
  w.le(kContainerVersion);
  w.le(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  for (const auto& layer : weights.layers) {
    const auto out = static_cast<std::uint64_t>(layer.out_channels());
    const auto in = static_cast<std::uint64_t>(layer.in_channels());
    write_tensor(w, layer.name + ".weight", {out, in, 3, 3}, layer.kernel.data(), layer.kernel.size());
    write_tensor(w, layer.name + ".bias", {out}, layer.bias.data(), layer.bias.size());
  }
  return w.take();
}

BackboneWeights parse_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DDCW", 4) != 0)
    throw Error(ErrorCode::BadMagic, "not a DDCW container");
  r.take(4, "magic");
  const auto version = r.le<std::uint32_t>("version");
  if (version != kContainerVersion)
    throw Error(ErrorCode::UnsupportedVersion, "container version " + std::to_string(version));
  const auto meta_len = r.le<std::uint32_t>("metadata length");
  const auto* meta_bytes = r.take(meta_len, "metadata");

  BackboneWeights weights;
  std::vector<std::string> order;
  try {
    const auto meta = nlohmann::json::parse(meta_bytes, meta_bytes + meta_len);
    weights.architecture = meta.at("architecture").get<std::string>();
    weights.taps = meta.at("taps").get<std::vector<std::string>>();
    weights.mean = meta.at("mean").get<std::array<double, 3>>();
    weights.std = meta.at("std").get<std::array<double, 3>>();
    order = meta.at("layers").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptTensor, std::string("bad metadata: ") + e.what());
  }

  for (const auto& name : order) {
    const RawTensor kernel = read_tensor(r);
    if (kernel.name != name + ".weight" || kernel.dims.size() != 4 || kernel.dims[2] != 3 || kernel.dims[3] != 3)
      throw Error(ErrorCode::CorruptTensor, "expected 3x3 kernel " + name + ".weight, found " + kernel.name);
    const RawTensor bias = read_tensor(r);
    if (bias.name != name + ".bias" || bias.dims.size() != 1 || bias.dims[0] != kernel.dims[0])
      throw Error(ErrorCode::CorruptTensor, "expected bias " + name + ".bias, found " + bias.name);

    ConvLayer layer;
    layer.name = name;
    const auto out = static_cast<Eigen::Index>(kernel.dims[0]);
    const auto in9 = static_cast<Eigen::Index>(kernel.dims[1] * 9);
    layer.kernel = Eigen::Map<const FeatureMatrix>(kernel.values.data(), out, in9);
    layer.bias = Eigen::Map<const Eigen::VectorXf>(bias.values.data(), out);
    weights.layers.push_back(std::move(layer));
  }
  if (!r.done()) throw Error(ErrorCode::CorruptTensor, "trailing bytes after last tensor");
  weights.validate();
  return weights;
}

void save_weights(const BackboneWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(weights);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BackboneWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_weights(bytes);
}

}  // namespace deepdc
