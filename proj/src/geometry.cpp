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

#include "gradrev/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "gradrev/errors.hpp"
#include "gradrev/matrix.hpp"

namespace gradrev {

void LandmarkModel3D::recenter() {
  Point3 centroid;
  for (const Point3& p : points) {
    centroid.x += p.x;
    centroid.y += p.y;
    centroid.z += p.z;
  }
  const double inv = 1.0 / static_cast<double>(kLandmarkCount);
  centroid.x *= inv;
  centroid.y *= inv;
  centroid.z *= inv;
  for (Point3& p : points) {
    p.x -= centroid.x;
    p.y -= centroid.y;
    p.z -= centroid.z;
  }
}

void LandmarkModel3D::validate() const {
  double scale2 = 0.0;
  for (const Point3& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw FitError("LandmarkModel3D: non-finite coordinate");
    }
    scale2 = std::max(scale2, p.x * p.x + p.y * p.y + p.z * p.z);
  }
  if (scale2 == 0.0) {
    throw FitError("LandmarkModel3D: all points at the origin");
  }
  // Centered points lie on a line exactly when every pairwise cross
  // product vanishes.
  double max_cross2 = 0.0;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    for (std::size_t j = i + 1; j < kLandmarkCount; ++j) {
      const Point3& a = points[i];
      const Point3& b = points[j];
      const double cx = a.y * b.z - a.z * b.y;
      const double cy = a.z * b.x - a.x * b.z;
      const double cz = a.x * b.y - a.y * b.x;
      max_cross2 = std::max(max_cross2, cx * cx + cy * cy + cz * cz);
    }
  }
  if (max_cross2 < 1e-18 * scale2 * scale2) {
    throw FitError("LandmarkModel3D: points are collinear");
  }
}

LandmarkModel3D default_landmark_model() {
  // Eye corners (outer/inner, left then right), nose tip, nostrils, mouth
  // corners. Model units are roughly half-face widths; loaded and recentered
  // like any user-supplied model file.
  LandmarkModel3D model;
  model.points = {{
      {-0.45, 0.40, 0.06},   // left eye outer corner
      {-0.15, 0.38, 0.16},   // left eye inner corner
      {0.15, 0.38, 0.16},    // right eye inner corner
      {0.45, 0.40, 0.06},    // right eye outer corner
      {0.00, 0.00, 0.55},    // nose tip
      {-0.14, -0.10, 0.30},  // left nostril
      {0.14, -0.10, 0.30},   // right nostril
      {-0.26, -0.45, 0.18},  // left mouth corner
      {0.26, -0.45, 0.18},   // right mouth corner
  }};
  model.recenter();
  model.validate();
  return model;
}

LandmarkModel3D load_landmark_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IngestionError("load_landmark_model: cannot open " + path.string());
  }
  LandmarkModel3D model;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (!(in >> model.points[i].x >> model.points[i].y >> model.points[i].z)) {
      throw IngestionError("load_landmark_model: expected 9 'x y z' lines in " +
                           path.string() + ", failed at line " +
                           std::to_string(i + 1));
    }
  }
  double extra;
  if (in >> extra) {
    throw IngestionError("load_landmark_model: more than 9 points in " +
                         path.string());
  }
  model.recenter();
  model.validate();
  return model;
}

void save_landmark_model(const LandmarkModel3D& model,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IngestionError("save_landmark_model: cannot open " + path.string());
  }
  char line[96];
  for (const Point3& p : model.points) {
    std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << line;
  }
}

void PoseSpec::validate() const {
  for (double angle : {yaw, pitch, roll}) {
    if (!(angle >= -90.0 && angle <= 90.0)) {
      throw ValidationError("PoseSpec: angle " + std::to_string(angle) +
                            " outside [-90, 90] degrees");
    }
  }
}

CameraFit fit_camera(const LandmarkSet2D& landmarks2d,
                     const LandmarkModel3D& model3d) {
  model3d.validate();
  for (const Point2& p : landmarks2d.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("fit_camera: non-finite 2D landmark");
    }
  }

  DenseMatrix design(kLandmarkCount, 4);
  DenseMatrix rhs(kLandmarkCount, 2);
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    design.at(i, 0) = model3d.points[i].x;
    design.at(i, 1) = model3d.points[i].y;
    design.at(i, 2) = model3d.points[i].z;
    design.at(i, 3) = 1.0;
    rhs.at(i, 0) = landmarks2d.points[i].x;
    rhs.at(i, 1) = landmarks2d.points[i].y;
  }

  DenseMatrix solution;  // 4x2, one column per image coordinate
  std::size_t rank = 0;
  try {
    solution = lsq_solve(design, rhs, &rank);
  } catch (const FitError& e) {
    throw FitError(std::string("fit_camera: ") + e.what());
  }
  // A planar model loses one design column (rank 3) and is fine; anything
  // lower means the model collapsed to a line.
  if (rank < 3) {
    throw FitError("fit_camera: degenerate model geometry (design rank " +
                   std::to_string(rank) + ")");
  }

  CameraFit fit;
  for (std::size_t c = 0; c < 4; ++c) {
    fit.camera.matrix[c] = solution.at(c, 0);
    fit.camera.matrix[4 + c] = solution.at(c, 1);
  }

  // Rows of the linear part must be independent or the camera collapses the
  // model onto a line.
  const double* r0 = fit.camera.matrix.data();
  const double* r1 = fit.camera.matrix.data() + 4;
  const double cx = r0[1] * r1[2] - r0[2] * r1[1];
  const double cy = r0[2] * r1[0] - r0[0] * r1[2];
  const double cz = r0[0] * r1[1] - r0[1] * r1[0];
  const double n0 = r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2];
  const double n1 = r1[0] * r1[0] + r1[1] * r1[1] + r1[2] * r1[2];
  if (cx * cx + cy * cy + cz * cz <= 1e-24 * std::max(n0 * n1, 1e-12)) {
    throw FitError("fit_camera: recovered linear part is rank deficient");
  }

  double sum_sq = 0.0;
  const LandmarkSet2D reprojected = project(fit.camera, model3d);
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const double dx = reprojected.points[i].x - landmarks2d.points[i].x;
    const double dy = reprojected.points[i].y - landmarks2d.points[i].y;
    sum_sq += dx * dx + dy * dy;
  }
  fit.rms_residual = std::sqrt(sum_sq / static_cast<double>(kLandmarkCount));
  return fit;
}

namespace {

using Mat3 = std::array<double, 9>;

Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += a[i * 3 + k] * b[k * 3 + j];
      out[i * 3 + j] = acc;
    }
  }
  return out;
}

double radians(double degrees) {
  return degrees * std::numbers::pi / 180.0;
}

}  // namespace

std::array<double, 9> rotation_matrix(const PoseSpec& pose) {
  pose.validate();
  const double cy = std::cos(radians(pose.yaw));
  const double sy = std::sin(radians(pose.yaw));
  const double cp = std::cos(radians(pose.pitch));
  const double sp = std::sin(radians(pose.pitch));
  const double cr = std::cos(radians(pose.roll));
  const double sr = std::sin(radians(pose.roll));

  const Mat3 ry = {cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy};
  const Mat3 rx = {1.0, 0.0, 0.0, 0.0, cp, -sp, 0.0, sp, cp};
  const Mat3 rz = {cr, -sr, 0.0, sr, cr, 0.0, 0.0, 0.0, 1.0};
  return mat3_mul(rz, mat3_mul(rx, ry));
}

LandmarkModel3D rotate_model(const LandmarkModel3D& model3d,
                             const PoseSpec& pose) {
  const Mat3 r = rotation_matrix(pose);
  LandmarkModel3D rotated;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point3& p = model3d.points[i];
    rotated.points[i].x = r[0] * p.x + r[1] * p.y + r[2] * p.z;
    rotated.points[i].y = r[3] * p.x + r[4] * p.y + r[5] * p.z;
    rotated.points[i].z = r[6] * p.x + r[7] * p.y + r[8] * p.z;
  }
  return rotated;
}

LandmarkSet2D project(const AffineCamera& camera,
                      const LandmarkModel3D& model3d) {
  LandmarkSet2D out;
  const auto& m = camera.matrix;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point3& p = model3d.points[i];
    out.points[i].x = m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3];
    out.points[i].y = m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7];
  }
  return out;
}

}  // namespace gradrev
