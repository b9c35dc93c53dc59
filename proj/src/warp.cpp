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

#include "gradrev/warp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "gradrev/errors.hpp"

namespace gradrev {

double signed_area2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

namespace {

// Strictly-inside-circumcircle test for a CCW triangle (a, b, c).
bool in_circumcircle(const Point2& a, const Point2& b, const Point2& c,
                     const Point2& d, double eps) {
  const double ax = a.x - d.x, ay = a.y - d.y;
  const double bx = b.x - d.x, by = b.y - d.y;
  const double cx = c.x - d.x, cy = c.y - d.y;
  const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                     (bx * bx + by * by) * (ax * cy - cx * ay) +
                     (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > eps;
}

using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t u, std::size_t v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

}  // namespace

std::vector<Triangle> delaunay_triangulate(const std::vector<Point2>& points) {
  if (points.size() < 3) {
    throw ValidationError("delaunay_triangulate: need at least 3 points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy < 1e-18) {
        throw ValidationError("delaunay_triangulate: duplicate points at index " +
                              std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  double min_x = points[0].x, max_x = points[0].x;
  double min_y = points[0].y, max_y = points[0].y;
  for (const Point2& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
  const double mid_x = (min_x + max_x) / 2.0;
  const double mid_y = (min_y + max_y) / 2.0;

  std::vector<Point2> pts = points;
  const std::size_t s0 = pts.size();
  pts.push_back({mid_x - 20.0 * span, mid_y - 10.0 * span});
  pts.push_back({mid_x + 20.0 * span, mid_y - 10.0 * span});
  pts.push_back({mid_x, mid_y + 20.0 * span});

  const double eps = 1e-12 * span * span * span * span;

  std::vector<Triangle> triangles;
  triangles.push_back({s0, s0 + 1, s0 + 2});

  for (std::size_t p = 0; p < s0; ++p) {
    std::vector<Triangle> bad;
    std::vector<Triangle> keep;
    for (const Triangle& t : triangles) {
      if (in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p], eps)) {
        bad.push_back(t);
      } else {
        keep.push_back(t);
      }
    }
    // Boundary of the cavity: edges that appear in exactly one bad triangle.
    std::map<Edge, int> edge_count;
    for (const Triangle& t : bad) {
      ++edge_count[make_edge(t[0], t[1])];
      ++edge_count[make_edge(t[1], t[2])];
      ++edge_count[make_edge(t[2], t[0])];
    }
    triangles = std::move(keep);
    for (const auto& [edge, count] : edge_count) {
      if (count != 1) continue;
      Triangle t{edge.first, edge.second, p};
      if (signed_area2(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0) {
        std::swap(t[1], t[2]);
      }
      triangles.push_back(t);
    }
  }

  std::vector<Triangle> result;
  for (const Triangle& t : triangles) {
    if (t[0] < s0 && t[1] < s0 && t[2] < s0) result.push_back(t);
  }
  return result;
}

std::vector<Point2> border_anchors(std::size_t width, std::size_t height) {
  const double w = static_cast<double>(width - 1);
  const double h = static_cast<double>(height - 1);
  return {{0.0, 0.0}, {w / 2.0, 0.0}, {w, 0.0},   {0.0, h / 2.0},
          {w, h / 2.0}, {0.0, h},     {w / 2.0, h}, {w, h}};
}

WarpResult warp_piecewise_affine(const GrayImage& image,
                                 const std::vector<Point2>& src,
                                 const std::vector<Point2>& dst) {
  if (src.size() != dst.size()) {
    throw ValidationError("warp_piecewise_affine: src has " +
                          std::to_string(src.size()) + " points, dst has " +
                          std::to_string(dst.size()));
  }
  const std::vector<Triangle> triangles = delaunay_triangulate(src);

  struct TriData {
    Point2 d0, d1, d2;  // destination vertices
    Point2 s0, s1, s2;  // source vertices
    double area2 = 0.0;
    bool identity = false;
    bool degenerate = false;
  };
  std::vector<TriData> tri_data;
  WarpResult result;
  result.image = GrayImage(image.width, image.height);

  tri_data.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    TriData d;
    d.d0 = dst[triangles[t][0]];
    d.d1 = dst[triangles[t][1]];
    d.d2 = dst[triangles[t][2]];
    d.s0 = src[triangles[t][0]];
    d.s1 = src[triangles[t][1]];
    d.s2 = src[triangles[t][2]];
    d.area2 = signed_area2(d.d0, d.d1, d.d2);
    d.identity = d.s0.x == d.d0.x && d.s0.y == d.d0.y && d.s1.x == d.d1.x &&
                 d.s1.y == d.d1.y && d.s2.x == d.d2.x && d.s2.y == d.d2.y;
    if (d.area2 < 0.0) result.flipped_triangles.push_back(t);
    d.degenerate = d.area2 == 0.0;
    tri_data.push_back(d);
  }

  const double bary_eps = 1e-9;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      bool rendered = false;
      for (const TriData& d : tri_data) {
        if (d.degenerate) continue;
        const double inv = 1.0 / d.area2;
        const double alpha = signed_area2(p, d.d1, d.d2) * inv;
        const double beta = signed_area2(d.d0, p, d.d2) * inv;
        const double gamma = 1.0 - alpha - beta;
        if (alpha < -bary_eps || beta < -bary_eps || gamma < -bary_eps) {
          continue;
        }
        if (d.identity) {
          result.image.at(x, y) = image.at(x, y);
        } else {
          const double sx = alpha * d.s0.x + beta * d.s1.x + gamma * d.s2.x;
          const double sy = alpha * d.s0.y + beta * d.s1.y + gamma * d.s2.y;
          result.image.at(x, y) = image.sample_clamped(sx, sy);
        }
        rendered = true;
        break;
      }
      // A destination configuration can leave holes (all its triangles
      // pulled away from this pixel); keep the input pixel there.
      if (!rendered) result.image.at(x, y) = image.at(x, y);
    }
  }
  return result;
}

}  // namespace gradrev
