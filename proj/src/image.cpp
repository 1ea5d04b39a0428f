// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <fstream>
#include <memory>
#include <string>

#include "hogfusion/error.hpp"

namespace hogfusion::imageio {

RgbImage::RgbImage(int w, int h) : RgbImage(w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)) {}

RgbImage::RgbImage(int w, int h, std::vector<std::uint8_t> pixels) : width(w), height(h), data(std::move(pixels)) {
  if (w < 1 || h < 1) throw Error(ErrorCode::ZeroDimension, "image dimensions must be positive");
  if (data.size() != static_cast<std::size_t>(w) * h * 3)
    throw Error(ErrorCode::ShapeMismatch, "pixel buffer length does not match width*height*3");
}

GrayImage::GrayImage(int w, int h, float fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
  if (w < 1 || h < 1) throw Error(ErrorCode::ZeroDimension, "image dimensions must be positive");
}

namespace {

enum class Signature { Png, Jpeg, Unknown };

Signature sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::array<unsigned char, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (got == 8 && std::equal(kPng.begin(), kPng.end(), head.begin())) return Signature::Png;
  if (got >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return Signature::Jpeg;
  return Signature::Unknown;
}

bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

RgbImage decode_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorCode::CorruptImage, path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorCode::CorruptImage, path.string() + ": empty image");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::CorruptImage, path.string() + ": " + msg);
  }
  return RgbImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

RgbImage decode_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  // Nothing with a destructor may be live across the setjmp boundary below.
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::CorruptImage, path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return RgbImage(width, height, std::move(pixels));
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::FileNotFound, path.string());
  switch (sniff(path)) {
    case Signature::Png: return decode_png(path);
    case Signature::Jpeg: return decode_jpeg(path);
    case Signature::Unknown: break;
  }
  if (has_image_extension(path))
    throw Error(ErrorCode::CorruptImage, path.string() + ": signature does not match extension");
  throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a PNG or JPEG file");
}

void save_png(const RgbImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
}

RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorCode::ZeroDimension, "resize target must be at least 1x1");

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
      double src = (o + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      t[static_cast<std::size_t>(o)] = {i0, std::min(i0 + 1, in - 1), src - i0};
    }
    return t;
  };
  const auto tx = taps(img.width, out_w);
  const auto ty = taps(img.height, out_h);

  RgbImage out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(vx.i0, vy.i0, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i0, c) * vx.frac;
        const double bottom = img.at(vx.i0, vy.i1, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i1, c) * vx.frac;
        const double v = top * (1.0 - vy.frac) + bottom * vy.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width, img.height);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = img.data[3 * i];
    const double g = img.data[3 * i + 1];
    const double b = img.data[3 * i + 2];
    const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
    out.data[i] = static_cast<float>(std::clamp(luma, 0.0, 255.0));
  }
  return out;
}

}  // namespace hogfusion::imageio
