// Copyright 2026 The vemorph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vemorph/image.hpp"

#include <png.h>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>
#include <memory>
#include <string>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/io.hpp"

namespace vemorph {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

std::vector<std::uint8_t> write_png_memory(ImageDims dims, png_uint_32 format,
                                           const std::uint8_t* pixels) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(dims.width);
  img.height = static_cast<png_uint_32>(dims.height);
  img.format = format;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw Error(ErrorCode::kIo, fmt::format("png sizing failed: {}", img.message));
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw Error(ErrorCode::kIo, fmt::format("png encoding failed: {}", img.message));
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_png_memory(std::span<const std::uint8_t> bytes,
                                          png_uint_32 format, ImageDims& dims) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kImageDecode, fmt::format("bad png: {}", img.message));
  }
  img.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kImageDecode, fmt::format("bad png: {}", img.message));
  }
  dims = {static_cast<int>(img.width), static_cast<int>(img.height)};
  return pixels;
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

Image read_jpeg_memory(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Everything touched after setjmp lives outside this frame's automatic
  // storage or is reset before use.
  std::vector<std::uint8_t> rgb;
  ImageDims dims;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::kImageDecode, fmt::format("bad jpeg: {}", err.message));
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  dims = {static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height)};
  rgb.resize(dims.pixel_count() * 3);
  const std::size_t stride = static_cast<std::size_t>(dims.width) * 3;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return Image(dims, std::move(rgb));
}

}  // namespace

Image::Image(ImageDims dims, Rgb fill) : dims_(dims), data_(dims.pixel_count() * 3) {
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Image::Image(ImageDims dims, std::vector<std::uint8_t> rgb)
    : dims_(dims), data_(std::move(rgb)) {
  if (!dims_.valid() || data_.size() != dims_.pixel_count() * 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{} bytes do not form a {}x{} RGB image", data_.size(),
                            dims_.width, dims_.height));
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  return write_png_memory(image.dims(), PNG_FORMAT_RGB, image.bytes().data());
}

std::vector<std::uint8_t> encode_png(const Mask& mask) {
  return write_png_memory(mask.dims(), PNG_FORMAT_GRAY, mask.pixels().data());
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    ImageDims dims;
    auto pixels = read_png_memory(bytes, PNG_FORMAT_RGB, dims);
    return Image(dims, std::move(pixels));
  }
  if (is_jpeg(bytes)) return read_jpeg_memory(bytes);
  throw Error(ErrorCode::kImageDecode, "unrecognized image format");
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) throw Error(ErrorCode::kImageDecode, "mask is not a png");
  ImageDims dims;
  auto pixels = read_png_memory(bytes, PNG_FORMAT_GRAY, dims);
  return Mask(dims, std::move(pixels));
}

bool looks_like_image(std::span<const std::uint8_t> bytes) noexcept {
  return is_png(bytes) || is_jpeg(bytes);
}

Image read_image(const std::filesystem::path& path) {
  return decode_image(read_bytes(path));
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_atomic(path, encode_png(image));
}

void write_png(const std::filesystem::path& path, const Mask& mask) {
  write_atomic(path, encode_png(mask));
}

}  // namespace vemorph
