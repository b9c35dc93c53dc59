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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gradrev/errors.hpp"
#include "gradrev/rng.hpp"

using namespace gradrev;

namespace {

// Frontal camera dropping z: pixel = scale * (x, -y) + center.
AffineCamera frontal_camera(double scale, double cx, double cy) {
  AffineCamera camera;
  camera.matrix = {scale, 0.0, 0.0, cx, 0.0, -scale, 0.0, cy};
  return camera;
}

// Synthetic face card: smooth gradient plus dark blobs at the landmarks so
// the warp has structure to move around.
GrayImage face_card(std::size_t size, const LandmarkSet2D& landmarks) {
  GrayImage img(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      img.at(x, y) = 0.35 +
                     0.3 * static_cast<double>(x) / static_cast<double>(size) +
                     0.25 * static_cast<double>(y) / static_cast<double>(size);
    }
  }
  for (const Point2& p : landmarks.points) {
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        const long ix = std::lround(p.x) + dx;
        const long iy = std::lround(p.y) + dy;
        if (ix < 0 || iy < 0 || ix >= static_cast<long>(size) ||
            iy >= static_cast<long>(size)) {
          continue;
        }
        if (dx * dx + dy * dy <= 4) img.at(ix, iy) = 0.05;
      }
    }
  }
  return img;
}

}  // namespace

TEST_CASE("synthesize_views: zero pose reproduces the input image") {
  const LandmarkModel3D model = default_landmark_model();
  const AffineCamera camera = frontal_camera(30.0, 32.0, 34.0);
  const LandmarkSet2D landmarks = project(camera, model);
  const GrayImage img = face_card(64, landmarks);

  SynthesisConfig config;
  config.poses = {PoseSpec{0, 0, 0}};
  SynthesisReport report;
  const auto views = synthesize_views(img, landmarks, model, config, &report);
  REQUIRE(views.size() == 1);
  CHECK(report.rms_residual < 1e-9);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    max_diff = std::max(max_diff,
                        std::fabs(views[0].image.pixels[i] - img.pixels[i]));
  }
  CHECK(max_diff <= 1e-9);
}

TEST_CASE("synthesize_views: emitted landmarks equal the projected rotation") {
  const LandmarkModel3D model = default_landmark_model();
  const AffineCamera camera = frontal_camera(28.0, 32.0, 32.0);
  const LandmarkSet2D landmarks = project(camera, model);
  const GrayImage img = face_card(64, landmarks);

  SynthesisConfig config;  // default six-yaw grid
  const auto views = synthesize_views(img, landmarks, model, config);
  REQUIRE(views.size() == 6);

  const CameraFit fit = fit_camera(landmarks, model);
  for (const SynthesizedView& view : views) {
    const LandmarkSet2D expect =
        project(fit.camera, rotate_model(model, view.pose));
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      CHECK(view.landmarks.points[i].x == expect.points[i].x);
      CHECK(view.landmarks.points[i].y == expect.points[i].y);
    }
  }
}

TEST_CASE("synthesize_views: landmark asymmetry follows the yaw sign") {
  const LandmarkModel3D model = default_landmark_model();
  const AffineCamera camera = frontal_camera(30.0, 32.0, 34.0);
  const LandmarkSet2D landmarks = project(camera, model);
  const GrayImage img = face_card(64, landmarks);

  SynthesisConfig config;  // default grid: -45..45 yaw
  const auto views = synthesize_views(img, landmarks, model, config);
  REQUIRE(views.size() == 6);
  for (const SynthesizedView& view : views) {
    // Eye-to-nose horizontal gaps: index 0 left outer corner, 3 right outer
    // corner, 4 nose tip. Turning right forshortens the right gap.
    const double left_gap =
        std::fabs(view.landmarks.points[4].x - view.landmarks.points[0].x);
    const double right_gap =
        std::fabs(view.landmarks.points[3].x - view.landmarks.points[4].x);
    if (view.pose.yaw > 0) {
      CHECK(left_gap > right_gap);
    } else {
      CHECK(left_gap < right_gap);
    }
  }
}

TEST_CASE("synthesize_views: residual above threshold aborts") {
  const LandmarkModel3D model = default_landmark_model();
  const AffineCamera camera = frontal_camera(25.0, 32.0, 32.0);
  LandmarkSet2D landmarks = project(camera, model);
  Rng rng(9);
  for (Point2& p : landmarks.points) {
    p.x += rng.normal(0.0, 8.0);  // far beyond the 5 px default threshold
    p.y += rng.normal(0.0, 8.0);
  }
  const GrayImage img = face_card(64, landmarks);
  SynthesisConfig config;
  CHECK_THROWS_AS(synthesize_views(img, landmarks, model, config), FitError);

  // A generous threshold lets the same input through.
  config.fit_threshold_px = 50.0;
  CHECK_NOTHROW(synthesize_views(img, landmarks, model, config));
}

TEST_CASE("synthesize_views: poses that leave the margin are skipped") {
  const LandmarkModel3D model = default_landmark_model();
  // Face hugging the left edge under a razor-thin margin: positive yaw
  // swings the left outer eye corner outward past it.
  const AffineCamera camera = frontal_camera(30.0, 13.6, 32.0);
  const LandmarkSet2D landmarks = project(camera, model);
  GrayImage img(64, 64, 0.5);

  SynthesisConfig config;
  config.bounds_margin = 0.005;
  SynthesisReport report;
  const auto views = synthesize_views(img, landmarks, model, config, &report);
  CHECK(views.size() < config.poses.size());
  CHECK(!report.skipped.empty());
  for (const std::string& entry : report.skipped) {
    CHECK(entry.find("margin") != std::string::npos);
  }
}

TEST_CASE("synthesize_views: tiny images are rejected") {
  const LandmarkModel3D model = default_landmark_model();
  const LandmarkSet2D landmarks =
      project(frontal_camera(3.0, 6.0, 6.0), model);
  CHECK_THROWS_AS(
      synthesize_views(GrayImage(8, 8, 0.5), landmarks, model, {}),
      ValidationError);
}

TEST_CASE("synthesize_views: landmarks far outside the margin are rejected") {
  const LandmarkModel3D model = default_landmark_model();
  LandmarkSet2D landmarks = project(frontal_camera(30.0, 32.0, 32.0), model);
  landmarks.points[0].x = 500.0;  // way past 64 px + 10%
  CHECK_THROWS_AS(
      synthesize_views(GrayImage(64, 64, 0.5), landmarks, model, {}),
      ValidationError);
}

TEST_CASE("landmark csv round trip and malformed rows") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gradrev_synth_test";
  fs::create_directories(dir);

  std::map<std::string, LandmarkSet2D> rows;
  LandmarkSet2D a;
  Rng rng(10);
  for (Point2& p : a.points) p = {rng.uniform(0.0, 64.0), rng.uniform(0.0, 64.0)};
  rows["img0.pgm"] = a;
  write_landmark_csv(rows, dir / "lm.csv");
  const auto back = read_landmark_csv(dir / "lm.csv");
  REQUIRE(back.count("img0.pgm") == 1);
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    CHECK(back.at("img0.pgm").points[i].x == a.points[i].x);
    CHECK(back.at("img0.pgm").points[i].y == a.points[i].y);
  }

  std::ofstream(dir / "short.csv") << "img,1,2,3\n";
  CHECK_THROWS_AS(read_landmark_csv(dir / "short.csv"), IngestionError);
  std::ofstream(dir / "alpha.csv") << "img,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,notanumber\n";
  CHECK_THROWS_AS(read_landmark_csv(dir / "alpha.csv"), IngestionError);
}

TEST_CASE("view_name formats angles compactly") {
  CHECK(view_name("img0", PoseSpec{-30.0, 0.0, 0.0}) == "img0_yaw-30_pitch0");
  CHECK(view_name("x", PoseSpec{7.5, -2.0, 0.0}) == "x_yaw7.5_pitch-2");
}
