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

#ifndef VEMORPH_IMAGE_HPP_
#define VEMORPH_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vemorph/geometry.hpp"

namespace vemorph {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  std::uint32_t packed() const noexcept {
    return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | std::uint32_t{b};
  }
  bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster, row-major, interleaved.
class Image {
 public:
  Image() = default;
  Image(ImageDims dims, Rgb fill);
  Image(ImageDims dims, std::vector<std::uint8_t> rgb);

  ImageDims dims() const noexcept { return dims_; }
  Rgb at(int row, int col) const {
    const auto i = offset(row, col);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int row, int col, Rgb c) {
    const auto i = offset(row, col);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int row, int col) const {
    return 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
                static_cast<std::size_t>(col));
  }

  ImageDims dims_;
  std::vector<std::uint8_t> data_;
};

std::vector<std::uint8_t> encode_png(const Image& image);
// Single-channel 8-bit PNG with values exactly 0 or 255.
std::vector<std::uint8_t> encode_png(const Mask& mask);

// Accepts PNG or baseline JPEG; throws Error(kImageDecode).
Image decode_image(std::span<const std::uint8_t> bytes);
// Accepts any PNG whose decoded gray values are all 0 or 255.
Mask decode_mask(std::span<const std::uint8_t> bytes);

bool looks_like_image(std::span<const std::uint8_t> bytes) noexcept;

Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const Mask& mask);

}  // namespace vemorph

#endif  // VEMORPH_IMAGE_HPP_
