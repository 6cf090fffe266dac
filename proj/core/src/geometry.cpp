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

#include "vemorph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "vemorph/error.hpp"

namespace vemorph {

bool BBox::valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x1 < x2 && y1 < y2;
}

IouThreshold::IouThreshold(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kConfig,
                fmt::format("IoU threshold must lie in [0, 1], got {}", value));
  }
}

Mask::Mask(ImageDims dims) : dims_(dims), pixels_(dims.pixel_count(), kBlack) {}

Mask::Mask(ImageDims dims, std::vector<std::uint8_t> pixels)
    : dims_(dims), pixels_(std::move(pixels)) {
  if (pixels_.size() != dims_.pixel_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("mask has {} pixels, expected {}x{}", pixels_.size(),
                            dims_.width, dims_.height));
  }
  for (auto p : pixels_) {
    if (p != kWhite && p != kBlack) {
      throw Error(ErrorCode::kImageDecode,
                  fmt::format("mask pixel value {} is neither 0 nor 255", p));
    }
  }
}

std::size_t Mask::white_count() const noexcept {
  return static_cast<std::size_t>(
      std::count(pixels_.begin(), pixels_.end(), kWhite));
}

double area(const BBox& b) noexcept { return (b.x2 - b.x1) * (b.y2 - b.y1); }

std::optional<BBox> intersect(const BBox& a, const BBox& b) noexcept {
  BBox out{std::max(a.x1, b.x1), std::max(a.y1, b.y1), std::min(a.x2, b.x2),
           std::min(a.y2, b.y2)};
  if (out.x1 < out.x2 && out.y1 < out.y2) return out;
  return std::nullopt;
}

double iou(const BBox& a, const BBox& b) noexcept {
  auto overlap = intersect(a, b);
  if (!overlap) return 0.0;
  const double inter = area(*overlap);
  const double uni = area(a) + area(b) - inter;
  // inter <= min(area) so uni >= max(area) > 0 for valid boxes.
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool is_unlinked(const BBox& candidate, std::span<const BBox> linked,
                 IouThreshold t) noexcept {
  return std::all_of(linked.begin(), linked.end(), [&](const BBox& l) {
    return iou(candidate, l) < t.value();
  });
}

bool erasure_feasible(const BBox& target, std::span<const BBox> remaining,
                      IouThreshold t) noexcept {
  return std::none_of(remaining.begin(), remaining.end(), [&](const BBox& r) {
    return iou(target, r) > t.value();
  });
}

BBox clamp_to_image(const BBox& b, ImageDims dims) {
  if (!b.valid()) {
    throw Error(ErrorCode::kDegenerateBox,
                fmt::format("box ({}, {}, {}, {}) has no area", b.x1, b.y1,
                            b.x2, b.y2));
  }
  const double w = dims.width;
  const double h = dims.height;
  BBox out{std::clamp(b.x1, 0.0, w), std::clamp(b.y1, 0.0, h),
           std::clamp(b.x2, 0.0, w), std::clamp(b.y2, 0.0, h)};
  if (!out.valid()) {
    throw Error(ErrorCode::kDegenerateBox,
                fmt::format("box ({}, {}, {}, {}) lies outside the {}x{} image",
                            b.x1, b.y1, b.x2, b.y2, dims.width, dims.height));
  }
  return out;
}

Mask render_mask(ImageDims dims, const BBox& b) {
  const BBox box = clamp_to_image(b, dims);
  Mask mask(dims);
  // Columns whose center c + 0.5 falls in [x1, x2): c >= x1 - 0.5, c < x2 - 0.5.
  const int col_begin = std::max(0, static_cast<int>(std::ceil(box.x1 - 0.5)));
  const int col_end =
      std::min(dims.width, static_cast<int>(std::ceil(box.x2 - 0.5)));
  const int row_begin = std::max(0, static_cast<int>(std::ceil(box.y1 - 0.5)));
  const int row_end =
      std::min(dims.height, static_cast<int>(std::ceil(box.y2 - 0.5)));
  for (int row = row_begin; row < row_end; ++row) {
    for (int col = col_begin; col < col_end; ++col) {
      mask.set_white(row, col);
    }
  }
  return mask;
}

}  // namespace vemorph
