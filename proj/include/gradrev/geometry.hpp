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

#ifndef GRADREV_GEOMETRY_HPP
#define GRADREV_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <filesystem>

namespace gradrev {

inline constexpr std::size_t kLandmarkCount = 9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Nine detected facial landmarks in image pixel coordinates.
struct LandmarkSet2D {
  std::array<Point2, kLandmarkCount> points;
};

/// Nine corresponding model points, centered at their centroid.
/// Convention: x to the subject's right (viewer's left), y up, z toward the
/// viewer. Right-handed.
struct LandmarkModel3D {
  std::array<Point3, kLandmarkCount> points;

  /// Translates so the centroid sits at the origin.
  void recenter();
  /// Throws FitError when the points are collinear (no plane to fit).
  void validate() const;
};

/// Generic face-shaped 9-point model bundled with the library; the same
/// coordinates ship as a text file under data/.
LandmarkModel3D default_landmark_model();

/// Reads 9 whitespace-separated "x y z" lines and recenters.
LandmarkModel3D load_landmark_model(const std::filesystem::path& path);
void save_landmark_model(const LandmarkModel3D& model,
                         const std::filesystem::path& path);

/// Weak-perspective camera: 2x4 row-major [L | t] mapping homogeneous model
/// points to pixels, x = L*X + t.
struct AffineCamera {
  std::array<double, 8> matrix{};  // rows: [l00 l01 l02 tx], [l10 l11 l12 ty]

  double linear(std::size_t row, std::size_t col) const {
    return matrix[row * 4 + col];
  }
  double tx() const { return matrix[3]; }
  double ty() const { return matrix[7]; }
};

/// Head pose in degrees, each angle within [-90, 90].
struct PoseSpec {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  void validate() const;
};

struct CameraFit {
  AffineCamera camera;
  double rms_residual = 0.0;  // pixels
};

/// Least-squares fit of the 2x4 camera over the 9 correspondences,
/// minimizing the summed squared pixel error. Throws FitError on degenerate
/// model geometry.
CameraFit fit_camera(const LandmarkSet2D& landmarks2d,
                     const LandmarkModel3D& model3d);

/// Applies R = Rz(roll) * Rx(pitch) * Ry(yaw) to every model point.
/// Right-handed axes, y up, yaw about y.
LandmarkModel3D rotate_model(const LandmarkModel3D& model3d,
                             const PoseSpec& pose);

/// The 3x3 rotation matrix itself (row-major), for invariant checks.
std::array<double, 9> rotation_matrix(const PoseSpec& pose);

/// Projects every model point through the camera.
LandmarkSet2D project(const AffineCamera& camera,
                      const LandmarkModel3D& model3d);

}  // namespace gradrev

#endif  // GRADREV_GEOMETRY_HPP
