// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "patternscope/error.hpp"

namespace patternscope {

namespace {

enum class Format { kPng, kJpeg };

Format format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return Format::kPng;
  if (ext == ".jpg" || ext == ".jpeg") return Format::kJpeg;
  throw IoError("unsupported image extension: " + path.string());
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open image: " + path.string());
  return f;
}

// libjpeg reports fatal errors through error_exit; route them back via longjmp.
struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image8 interleaved_to_planar(const std::vector<std::uint8_t>& buf, int w, int h, int channels) {
  Image8 img(w, h);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = buf.data() + static_cast<std::size_t>(y) * w * channels;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c)
        img.planes[c](y, x) = row[x * channels + (channels >= 3 ? c : 0)];
    }
  }
  return img;
}

std::vector<std::uint8_t> planar_to_interleaved(const Image8& img) {
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(img.width()) * img.height() * 3);
  std::size_t i = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) buf[i++] = img.planes[c](y, x);
  return buf;
}

Image8 read_jpeg(const std::filesystem::path& path, bool header_only, Extent* extent) {
  FilePtr f = open_file(path, "rb");
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("cannot decode jpeg " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f.get());
  jpeg_read_header(&cinfo, TRUE);
  if (extent) *extent = {static_cast<int>(cinfo.image_width), static_cast<int>(cinfo.image_height)};
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return {};
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int channels = cinfo.output_components;
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return interleaved_to_planar(buf, w, h, channels);
}

void write_jpeg(const std::filesystem::path& path, const Image8& img, int quality) {
  FilePtr f = open_file(path, "wb");
  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    throw IoError("cannot encode jpeg " + path.string() + ": " + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<std::uint8_t> buf = planar_to_interleaved(img);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = buf.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width() * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

Image8 read_png(const std::filesystem::path& path, bool header_only, Extent* extent) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("cannot decode png " + path.string() + ": " + image.message);
  if (extent) *extent = {static_cast<int>(image.width), static_cast<int>(image.height)};
  if (header_only) {
    png_image_free(&image);
    return {};
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
    throw IoError("cannot decode png " + path.string() + ": " + image.message);
  return interleaved_to_planar(buf, static_cast<int>(image.width), static_cast<int>(image.height), 3);
}

void write_png_buffer(const std::filesystem::path& path, const std::uint8_t* data, int w, int h,
                      png_uint_32 format) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr))
    throw IoError("cannot write png " + path.string() + ": " + image.message);
}

}  // namespace

ImageF resize_area(const Image8& img, int width, int height) {
  const int sw = img.width();
  const int sh = img.height();
  ImageF out(width, height);
  // Separable: horizontal weights then vertical weights. weight(o, s) is the
  // overlap of output cell o (scaled into source units) with source pixel s.
  auto weights = [](int src, int dst) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dst, src);
    const double scale = static_cast<double>(src) / dst;
    for (int o = 0; o < dst; ++o) {
      const double a = o * scale;
      const double b = (o + 1) * scale;
      for (int s = static_cast<int>(std::floor(a)); s < src && s < b; ++s) {
        const double overlap = std::min<double>(b, s + 1) - std::max<double>(a, s);
        if (overlap > 0) w(o, s) = overlap / scale;
      }
    }
    return w;
  };
  const Eigen::MatrixXd wx = weights(sw, width);
  const Eigen::MatrixXd wy = weights(sh, height);
  for (int c = 0; c < 3; ++c) {
    const Eigen::MatrixXd src = img.planes[c].cast<double>().matrix();
    const Eigen::MatrixXd res = wy * src * wx.transpose();
    out.planes[c] = res.cast<float>().array();
  }
  return out;
}

void fill_rect(Image8& img, const IntRect& rect, const Rgb& color) {
  const IntRect r = rect.intersect(img.bounds());
  if (r.empty()) return;
  for (int c = 0; c < 3; ++c)
    img.planes[c].block(r.top, r.left, r.height(), r.width()).setConstant(color[c]);
}

void fill_disc(Image8& img, const IntRect& rect, const Rgb& color) {
  const double cx = 0.5 * (rect.left + rect.right);
  const double cy = 0.5 * (rect.top + rect.bottom);
  const double rx = 0.5 * rect.width();
  const double ry = 0.5 * rect.height();
  const IntRect r = rect.intersect(img.bounds());
  for (int y = r.top; y < r.bottom; ++y) {
    for (int x = r.left; x < r.right; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0)
        for (int c = 0; c < 3; ++c) img.planes[c](y, x) = color[c];
    }
  }
}

std::int64_t count_color(const Image8& img, const IntRect& rect, const Rgb& color, int tolerance) {
  const IntRect r = rect.intersect(img.bounds());
  std::int64_t n = 0;
  for (int y = r.top; y < r.bottom; ++y) {
    for (int x = r.left; x < r.right; ++x) {
      bool match = true;
      for (int c = 0; c < 3 && match; ++c)
        match = std::abs(static_cast<int>(img.planes[c](y, x)) - color[c]) <= tolerance;
      n += match;
    }
  }
  return n;
}

Image8 read_image(const std::filesystem::path& path) {
  return format_for(path) == Format::kPng ? read_png(path, false, nullptr)
                                          : read_jpeg(path, false, nullptr);
}

Extent probe_image(const std::filesystem::path& path) {
  Extent e;
  if (format_for(path) == Format::kPng)
    read_png(path, true, &e);
  else
    read_jpeg(path, true, &e);
  return e;
}

void write_image(const std::filesystem::path& path, const Image8& img, int jpeg_quality) {
  if (format_for(path) == Format::kJpeg) {
    write_jpeg(path, img, jpeg_quality);
    return;
  }
  const std::vector<std::uint8_t> buf = planar_to_interleaved(img);
  write_png_buffer(path, buf.data(), img.width(), img.height(), PNG_FORMAT_RGB);
}

void write_gray_png(const std::filesystem::path& path, const Plane<std::uint8_t>& gray) {
  write_png_buffer(path, gray.data(), static_cast<int>(gray.cols()), static_cast<int>(gray.rows()),
                   PNG_FORMAT_GRAY);
}

}  // namespace patternscope
