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

#ifndef GRADREV_WARP_HPP
#define GRADREV_WARP_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "gradrev/geometry.hpp"
#include "gradrev/image.hpp"

namespace gradrev {

/// Triangle as indices into a point list, counter-clockwise in the
/// triangulated configuration.
using Triangle = std::array<std::size_t, 3>;

/// Bowyer-Watson Delaunay triangulation. Insertion order is the input
/// order, so the result is deterministic for a given point list.
std::vector<Triangle> delaunay_triangulate(const std::vector<Point2>& points);

/// Twice the signed area of triangle (a, b, c); positive when CCW.
double signed_area2(const Point2& a, const Point2& b, const Point2& c);

struct WarpResult {
  GrayImage image;
  /// Triangles whose destination copy flipped orientation; they are still
  /// rendered, with source samples clamped to the image.
  std::vector<std::size_t> flipped_triangles;
};

/// Piecewise-affine warp: triangulates `src`, carries each triangle to the
/// corresponding `dst` vertices, and pulls output pixels back through the
/// per-triangle affine map with bilinear sampling (edge replication outside
/// the source). Triangles whose src and dst vertices coincide are copied
/// pixel-for-pixel, so dst == src reproduces the input bit for bit.
WarpResult warp_piecewise_affine(const GrayImage& image,
                                 const std::vector<Point2>& src,
                                 const std::vector<Point2>& dst);

/// The 8 fixed frame anchors: image corners plus edge midpoints.
std::vector<Point2> border_anchors(std::size_t width, std::size_t height);

}  // namespace gradrev

#endif  // GRADREV_WARP_HPP
