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

#include "gradrev/synthesis.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gradrev/errors.hpp"

namespace gradrev {

std::vector<PoseSpec> SynthesisConfig::default_pose_grid() {
  std::vector<PoseSpec> poses;
  for (double yaw : {-45.0, -30.0, -15.0, 15.0, 30.0, 45.0}) {
    poses.push_back(PoseSpec{yaw, 0.0, 0.0});
  }
  return poses;
}

namespace {

bool within_margin(const LandmarkSet2D& landmarks, std::size_t width,
                   std::size_t height, double margin) {
  const double mx = margin * static_cast<double>(width);
  const double my = margin * static_cast<double>(height);
  for (const Point2& p : landmarks.points) {
    if (p.x < -mx || p.x > static_cast<double>(width - 1) + mx) return false;
    if (p.y < -my || p.y > static_cast<double>(height - 1) + my) return false;
  }
  return true;
}

}  // namespace

std::vector<SynthesizedView> synthesize_views(const GrayImage& image,
                                              const LandmarkSet2D& landmarks2d,
                                              const LandmarkModel3D& model3d,
                                              const SynthesisConfig& config,
                                              SynthesisReport* report) {
  if (image.width < 16 || image.height < 16) {
    throw ValidationError("synthesize_views: image must be at least 16x16");
  }
  if (!within_margin(landmarks2d, image.width, image.height,
                     config.bounds_margin)) {
    throw ValidationError(
        "synthesize_views: input landmarks fall outside the image margin");
  }
  const CameraFit fit = fit_camera(landmarks2d, model3d);
  if (report != nullptr) report->rms_residual = fit.rms_residual;
  if (fit.rms_residual > config.fit_threshold_px) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "synthesize_views: fit residual %.3f px exceeds threshold %.3f px",
                  fit.rms_residual, config.fit_threshold_px);
    throw FitError(msg);
  }

  const std::vector<Point2> anchors = border_anchors(image.width, image.height);
  std::vector<Point2> src(landmarks2d.points.begin(), landmarks2d.points.end());
  src.insert(src.end(), anchors.begin(), anchors.end());

  std::vector<SynthesizedView> views;
  for (const PoseSpec& pose : config.poses) {
    pose.validate();
    const LandmarkModel3D rotated = rotate_model(model3d, pose);
    const LandmarkSet2D projected = project(fit.camera, rotated);
    if (!within_margin(projected, image.width, image.height,
                       config.bounds_margin)) {
      if (report != nullptr) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "pose (%g, %g, %g): landmarks left the image margin",
                      pose.yaw, pose.pitch, pose.roll);
        report->skipped.emplace_back(msg);
      }
      continue;
    }
    std::vector<Point2> dst(projected.points.begin(), projected.points.end());
    dst.insert(dst.end(), anchors.begin(), anchors.end());

    WarpResult warped = warp_piecewise_affine(image, src, dst);
    SynthesizedView view;
    view.image = std::move(warped.image);
    view.landmarks = projected;
    view.pose = pose;
    view.flipped_triangles = std::move(warped.flipped_triangles);
    views.push_back(std::move(view));
  }
  return views;
}

std::map<std::string, LandmarkSet2D> read_landmark_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IngestionError("read_landmark_csv: cannot open " + path.string());
  }
  std::map<std::string, LandmarkSet2D> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ',')) continue;
    const std::string name = field;
    LandmarkSet2D landmarks;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      double x = 0.0, y = 0.0;
      if (!std::getline(ss, field, ',')) {
        throw IngestionError("read_landmark_csv: row for '" + name + "' in " +
                             path.string() + " has fewer than 18 coordinates");
      }
      try {
        x = std::stod(field);
      } catch (...) {
        throw IngestionError("read_landmark_csv: bad number '" + field +
                             "' at line " + std::to_string(line_no) + " of " +
                             path.string());
      }
      if (!std::getline(ss, field, ',')) {
        throw IngestionError("read_landmark_csv: row for '" + name + "' in " +
                             path.string() + " has fewer than 18 coordinates");
      }
      try {
        y = std::stod(field);
      } catch (...) {
        throw IngestionError("read_landmark_csv: bad number '" + field +
                             "' at line " + std::to_string(line_no) + " of " +
                             path.string());
      }
      landmarks.points[i] = Point2{x, y};
    }
    result[name] = landmarks;
  }
  return result;
}

void write_landmark_csv(const std::map<std::string, LandmarkSet2D>& landmarks,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IngestionError("write_landmark_csv: cannot open " + path.string());
  }
  char buf[64];
  for (const auto& [name, set] : landmarks) {
    out << name;
    for (const Point2& p : set.points) {
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", p.x, p.y);
      out << buf;
    }
    out << "\n";
  }
}

std::string view_name(const std::string& stem, const PoseSpec& pose) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_yaw%g_pitch%g", stem.c_str(), pose.yaw,
                pose.pitch);
  return buf;
}

}  // namespace gradrev
