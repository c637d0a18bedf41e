#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "deepdc/error.hpp"
#include "deepdc/image.hpp"

namespace deepdc {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Interleaved samples in [0, 1] with 1-4 channels (gray, gray+alpha, RGB, RGBA).
Image from_interleaved(const std::vector<double>& samples, int height, int width, int channels) {
  Image img(height, width);
  const bool has_alpha = channels == 2 || channels == 4;
  const int colour = has_alpha ? channels - 1 : channels;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double* px = &samples[(static_cast<std::size_t>(r) * width + c) * channels];
      const double alpha = has_alpha ? px[channels - 1] : 1.0;
      for (int k = 0; k < 3; ++k) {
        const double v = colour == 1 ? px[0] : px[k];
        img.channels[k](r, c) = static_cast<float>(v * alpha + (1.0 - alpha));
      }
    }
  }
  img.clamp();
  return img;
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(ErrorCode::DecodeError, name + ": " + image.message);
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  // Decode to 8-bit sRGB; 16-bit sources are reduced by libpng.
  image.format = colour ? (has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (has_alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, name + ": " + msg);
  }
  const int channels = PNG_IMAGE_SAMPLE_CHANNELS(image.format);
  std::vector<double> samples(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) samples[i] = buffer[i] / 255.0;
  return from_interleaved(samples, static_cast<int>(image.height), static_cast<int>(image.width), channels);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, mgr->message);
  std::longjmp(mgr->jump, 1);
}

Image decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name) {
  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<unsigned char> pixels;
  int height = 0, width = 0, channels = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw Error(ErrorCode::DecodeError, name + ": " + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = info.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&info);
  height = static_cast<int>(info.output_height);
  width = static_cast<int>(info.output_width);
  channels = info.output_components;
  pixels.resize(static_cast<std::size_t>(height) * width * channels);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(info.output_scanline) * width * channels];
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  std::vector<double> samples(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) samples[i] = pixels[i] / 255.0;
  return from_interleaved(samples, height, width, channels);
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes, path.string());
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return decode_jpeg(bytes, path.string());
  throw Error(ErrorCode::DecodeError, path.string() + ": not a PNG or JPEG file");
}

void write_png(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw Error(ErrorCode::IoError, "cannot write an empty image");
  const auto height = static_cast<std::size_t>(img.height());
  const auto width = static_cast<std::size_t>(img.width());
  std::vector<unsigned char> buffer(height * width * 3);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      for (int k = 0; k < 3; ++k) {
        const float v = std::clamp(img.channels[k](r, c), 0.0f, 1.0f);
        buffer[(r * width + c) * 3 + k] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
}

}  // namespace deepdc
