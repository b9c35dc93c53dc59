// Copyright 2026 The gradrev Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRADREV_IMAGE_HPP
#define GRADREV_IMAGE_HPP

#include <cstddef>
#include <filesystem>
#include <vector>

namespace gradrev {

/// Grayscale image with row-major intensities in [0, 1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // height * width

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), pixels(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  /// Bilinear sample with edge replication outside the image.
  double sample_clamped(double x, double y) const;
};

/// Reads a binary (P5) PGM, normalizing intensities to [0, 1].
/// Throws IngestionError naming the path on any malformed input.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes binary (P5) PGM at maxval 255, quantizing by rounding.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

}  // namespace gradrev

#endif  // GRADREV_IMAGE_HPP
