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

#ifndef GRADREV_SYNTHESIS_HPP
#define GRADREV_SYNTHESIS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gradrev/geometry.hpp"
#include "gradrev/image.hpp"
#include "gradrev/warp.hpp"

namespace gradrev {

struct SynthesisConfig {
  /// Views whose fit residual exceeds this many pixels are rejected.
  double fit_threshold_px = 5.0;
  /// Landmarks may drift this fraction of the image size outside it before
  /// a view is skipped.
  double bounds_margin = 0.10;
  std::vector<PoseSpec> poses = default_pose_grid();

  static std::vector<PoseSpec> default_pose_grid();
};

/// One synthesized view: the warped image and where its landmarks ended up.
struct SynthesizedView {
  GrayImage image;
  LandmarkSet2D landmarks;
  PoseSpec pose;
  std::vector<std::size_t> flipped_triangles;
};

struct SynthesisReport {
  double rms_residual = 0.0;
  std::vector<std::string> skipped;  // one entry per rejected pose
};

/// Fits the camera once, then for each pose rotates the model, reprojects,
/// and warps the image from its original landmarks to the projected ones
/// (frame anchors pinned). Views whose landmarks leave the margin are
/// skipped and noted in the report. Throws FitError when the camera fit
/// residual exceeds the threshold.
std::vector<SynthesizedView> synthesize_views(const GrayImage& image,
                                              const LandmarkSet2D& landmarks2d,
                                              const LandmarkModel3D& model3d,
                                              const SynthesisConfig& config,
                                              SynthesisReport* report = nullptr);

/// Landmark CSV: one row per image, "image_name,x1,y1,...,x9,y9".
std::map<std::string, LandmarkSet2D> read_landmark_csv(
    const std::filesystem::path& path);
void write_landmark_csv(const std::map<std::string, LandmarkSet2D>& landmarks,
                        const std::filesystem::path& path);

/// "<stem>_yaw<y>_pitch<p>" with %g-formatted angles.
std::string view_name(const std::string& stem, const PoseSpec& pose);

}  // namespace gradrev

#endif  // GRADREV_SYNTHESIS_HPP
