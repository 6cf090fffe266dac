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

#ifndef VEMORPH_GEOMETRY_HPP_
#define VEMORPH_GEOMETRY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vemorph {

struct ImageDims {
  int width = 0;
  int height = 0;

  bool valid() const noexcept { return width >= 1 && height >= 1; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool operator==(const ImageDims&) const = default;
};

// Axis-aligned region in continuous pixel coordinates. Containment is
// half-open: a point (x, y) is inside iff x1 <= x < x2 and y1 <= y < y2.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  // Finite coordinates and strictly positive area.
  bool valid() const noexcept;
  bool contains(double x, double y) const noexcept {
    return x >= x1 && x < x2 && y >= y1 && y < y2;
  }
  bool operator==(const BBox&) const = default;
};

// Overlap threshold used both for un-linked classification and for the
// erasure feasibility check.
class IouThreshold {
 public:
  static constexpr double kDefault = 0.1;

  constexpr IouThreshold() = default;
  // Throws Error(kConfig) outside [0, 1].
  explicit IouThreshold(double value);

  double value() const noexcept { return value_; }

 private:
  double value_ = kDefault;
};

// Binary raster: 255 marks the object region, 0 everything else. Row-major.
class Mask {
 public:
  static constexpr std::uint8_t kWhite = 255;
  static constexpr std::uint8_t kBlack = 0;

  Mask() = default;
  explicit Mask(ImageDims dims);
  Mask(ImageDims dims, std::vector<std::uint8_t> pixels);

  ImageDims dims() const noexcept { return dims_; }
  bool white(int row, int col) const {
    return pixels_[index(row, col)] == kWhite;
  }
  void set_white(int row, int col) { pixels_[index(row, col)] = kWhite; }
  std::size_t white_count() const noexcept;
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  bool operator==(const Mask&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(col);
  }

  ImageDims dims_;
  std::vector<std::uint8_t> pixels_;
};

double area(const BBox& b) noexcept;

// Positive-area overlap, or nullopt when the boxes only touch or are disjoint.
std::optional<BBox> intersect(const BBox& a, const BBox& b) noexcept;

double iou(const BBox& a, const BBox& b) noexcept;

// True iff every linked box overlaps `candidate` with IoU strictly below t.
bool is_unlinked(const BBox& candidate, std::span<const BBox> linked,
                 IouThreshold t) noexcept;

// True iff no remaining box overlaps `target` with IoU strictly above t.
bool erasure_feasible(const BBox& target, std::span<const BBox> remaining,
                      IouThreshold t) noexcept;

// Clips into [0, width] x [0, height]. Throws Error(kDegenerateBox) when the
// input is not a proper box or nothing of it lies inside the image.
BBox clamp_to_image(const BBox& b, ImageDims dims);

// Pixel (row, col) is white iff its center (col + 0.5, row + 0.5) lies inside
// the clamped box.
Mask render_mask(ImageDims dims, const BBox& b);

}  // namespace vemorph

#endif  // VEMORPH_GEOMETRY_HPP_
