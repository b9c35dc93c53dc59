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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gradrev/adversarial.hpp"
#include "gradrev/cli.hpp"
#include "gradrev/dataset.hpp"
#include "gradrev/experiment.hpp"
#include "gradrev/synthesis.hpp"

using namespace gradrev;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

double mean_of(const MatrixResult& result, ExperimentMode mode) {
  for (const ModeSummary& s : result.summary) {
    if (s.mode == mode) return s.runs > 0 ? s.mean_accuracy : -1.0;
  }
  return -1.0;
}

// Criterion 1: analytic gradients of both objectives vs central finite
// differences on an F(8-16-8)/C(8-4)/D(8-8-2) bundle, lambda in {0, .5, 1}.
bool criterion_gradients(std::string& detail) {
  Rng rng(424242);
  NetConfig net;  // defaults: F 16-8, C direct, D 8-2
  const NetworkBundle bundle = build_bundle(net, 8, 4, rng);

  DenseMatrix inputs(6, 8);
  for (double& v : inputs.data()) v = rng.normal();
  const std::vector<std::size_t> label_rows = {0, 1, 2};
  const std::vector<std::size_t> labels = {0, 3, 1};
  const std::vector<Domain> domains = {Domain::kSource, Domain::kSource,
                                       Domain::kSource, Domain::kTarget,
                                       Domain::kTarget, Domain::kTarget};

  double worst = 0.0;
  for (double lambda : {0.0, 0.5, 1.0}) {
    const AdversarialGradCheckResult r = adversarial_grad_check(
        bundle, inputs, label_rows, labels, domains, lambda, 1e-5);
    worst = std::max(worst, r.worst());
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max rel err %.3e (limit 1e-4)", worst);
  detail = buf;
  return worst < 1e-4;
}

// Criterion 2: GRL forward identity bit-exact; backward == -lambda*upstream
// to the last bit for lambda in {0, 0.25, 1, 2}.
bool criterion_grl(std::string& detail) {
  Rng rng(7);
  DenseMatrix m(16, 9);
  for (double& v : m.data()) v = rng.normal();
  if (!grl_forward(m).bit_equal(m)) {
    detail = "forward not bit-identical";
    return false;
  }
  for (double lambda : {0.0, 0.25, 1.0, 2.0}) {
    const DenseMatrix back = grl_backward(m, lambda);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double expect = -lambda * m.data()[i];
      if (std::memcmp(&back.data()[i], &expect, sizeof(double)) != 0) {
        detail = "backward bits differ at lambda " + std::to_string(lambda);
        return false;
      }
    }
  }
  detail = "identity forward, exact -lambda backward";
  return true;
}

// Criterion 3: lambda=0 adversarial step leaves F and C bit-identical to a
// source-only step on the same seed and batch; D still moves.
bool criterion_decoupling(std::string& detail) {
  Rng rng(99);
  NetConfig net;
  NetworkBundle adv = build_bundle(net, 8, 4, rng);
  NetworkBundle sup = adv;
  const NetworkBundle init = adv;

  Rng data_rng(100);
  std::vector<Sample> source(8), target(8);
  for (std::size_t i = 0; i < 8; ++i) {
    source[i].id = "s" + std::to_string(i);
    source[i].label = i % 4;
    source[i].domain = Domain::kSource;
    source[i].input.resize(8);
    for (double& v : source[i].input) v = data_rng.normal();
    target[i].id = "t" + std::to_string(i);
    target[i].domain = Domain::kTarget;
    target[i].input.resize(8);
    for (double& v : target[i].input) v = data_rng.normal();
  }

  AdversarialConfig config;
  config.lambda_mode = LambdaMode::kFixed;
  config.lambda_value = 0.0;
  TrainState adv_state = zero_state(adv);
  TrainState sup_state = zero_state(sup);
  for (int step = 0; step < 5; ++step) {
    dan_train_step(adv, source, target, config, 0.0, adv_state);
    supervised_step(sup, source, config, sup_state);
  }

  const bool f_same = adv.feature_extractor.bit_equal(sup.feature_extractor);
  const bool c_same = adv.label_classifier.bit_equal(sup.label_classifier);
  const bool d_moved =
      !adv.domain_discriminator.bit_equal(init.domain_discriminator);
  detail = std::string("F bit-equal: ") + (f_same ? "yes" : "NO") +
           ", C bit-equal: " + (c_same ? "yes" : "NO") +
           ", D moved: " + (d_moved ? "yes" : "NO");
  return f_same && c_same && d_moved;
}

// Criterion 4: camera fit recovery and noise behavior over the bundled model.
bool criterion_camera_fit(std::string& detail) {
  const LandmarkModel3D model = default_landmark_model();

  double worst_entry = 0.0;
  double worst_residual = 0.0;
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    AffineCamera truth;
    for (std::size_t i = 0; i < 8; ++i) truth.matrix[i] = rng.uniform(-40.0, 40.0);
    truth.matrix[3] = rng.uniform(20.0, 100.0);
    truth.matrix[7] = rng.uniform(20.0, 100.0);
    const LandmarkSet2D lm = project(truth, model);
    const CameraFit fit = fit_camera(lm, model);
    worst_residual = std::max(worst_residual, fit.rms_residual);
    for (std::size_t i = 0; i < 8; ++i) {
      worst_entry =
          std::max(worst_entry, std::fabs(fit.camera.matrix[i] - truth.matrix[i]));
    }
  }

  std::vector<double> residuals;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng noise_rng(seed);
    AffineCamera truth;
    for (std::size_t i = 0; i < 8; ++i) {
      truth.matrix[i] = noise_rng.uniform(-40.0, 40.0);
    }
    truth.matrix[3] = noise_rng.uniform(20.0, 100.0);
    truth.matrix[7] = noise_rng.uniform(20.0, 100.0);
    LandmarkSet2D lm = project(truth, model);
    for (Point2& p : lm.points) {
      p.x += noise_rng.normal(0.0, 0.5);
      p.y += noise_rng.normal(0.0, 0.5);
    }
    residuals.push_back(fit_camera(lm, model).rms_residual);
  }
  std::sort(residuals.begin(), residuals.end());
  const double median = residuals[residuals.size() / 2];

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "entry err %.2e (<=1e-8), residual %.2e (<1e-9), median noise "
                "residual %.3f px (in [0.2, 1.5])",
                worst_entry, worst_residual, median);
  detail = buf;
  return worst_entry < 1e-8 && worst_residual < 1e-9 && median >= 0.2 &&
         median <= 1.5;
}

// Criterion 5: rotation invariants over 1000 random poses, zero-pose
// landmark identity.
bool criterion_rotation(std::string& detail) {
  Rng rng(31337);
  double worst_ortho = 0.0, worst_det = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PoseSpec pose{rng.uniform(-90.0, 90.0), rng.uniform(-90.0, 90.0),
                        rng.uniform(-90.0, 90.0)};
    const auto r = rotation_matrix(pose);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < 3; ++k) dot += r[k * 3 + i] * r[k * 3 + j];
        worst_ortho = std::max(worst_ortho,
                               std::fabs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) -
                       r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    worst_det = std::max(worst_det, std::fabs(det - 1.0));
  }

  const LandmarkModel3D model = default_landmark_model();
  const LandmarkModel3D rotated = rotate_model(model, PoseSpec{0, 0, 0});
  bool zero_ok = true;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    zero_ok = zero_ok && rotated.points[i].x == model.points[i].x &&
              rotated.points[i].y == model.points[i].y &&
              rotated.points[i].z == model.points[i].z;
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "orthonormality %.2e, |det-1| %.2e (both < 1e-12), zero pose %s",
                worst_ortho, worst_det, zero_ok ? "exact" : "NOT exact");
  detail = buf;
  return worst_ortho < 1e-12 && worst_det < 1e-12 && zero_ok;
}

// Criterion 6: synthesis round trip at zero pose; identity and translation
// warps against direct oracles.
bool criterion_synthesis_round_trip(std::string& detail) {
  const LandmarkModel3D model = default_landmark_model();
  AffineCamera camera;
  camera.matrix = {30.0, 0.0, 0.0, 32.0, 0.0, -30.0, 0.0, 34.0};
  const LandmarkSet2D landmarks = project(camera, model);

  GrayImage img(64, 64);
  Rng rng(55);
  for (double& p : img.pixels) p = rng.uniform();

  SynthesisConfig config;
  config.poses = {PoseSpec{0, 0, 0}};
  const auto views = synthesize_views(img, landmarks, model, config);
  if (views.size() != 1) {
    detail = "zero-pose synthesis did not produce one view";
    return false;
  }
  double synth_diff = 0.0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    synth_diff =
        std::max(synth_diff, std::fabs(views[0].image.pixels[i] - img.pixels[i]));
  }

  // Identity warp, bit exact.
  std::vector<Point2> pts(landmarks.points.begin(), landmarks.points.end());
  const std::vector<Point2> anchors = border_anchors(img.width, img.height);
  pts.insert(pts.end(), anchors.begin(), anchors.end());
  const WarpResult identity = warp_piecewise_affine(img, pts, pts);
  double identity_diff = 0.0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    identity_diff = std::max(
        identity_diff, std::fabs(identity.image.pixels[i] - img.pixels[i]));
  }

  // Translation warp vs direct shift on interior pixels.
  std::vector<Point2> shifted = pts;
  for (Point2& p : shifted) p.x += 3.0;
  const WarpResult translated = warp_piecewise_affine(img, pts, shifted);
  double shift_diff = 0.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 4; x < img.width; ++x) {
      shift_diff = std::max(shift_diff, std::fabs(translated.image.at(x, y) -
                                                  img.at(x - 3, y)));
    }
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "zero-pose diff %.2e (<=1e-9), identity %.2e, shift %.2e "
                "(<=1e-12)",
                synth_diff, identity_diff, shift_diff);
  detail = buf;
  return synth_diff <= 1e-9 && identity_diff <= 1e-12 && shift_diff <= 1e-12;
}

MatrixResult run_default_matrix() {
  ToyShiftConfig toy;  // 10 classes, 1 source/class, 200 target/class,
  toy.seed = 2026;     // 35 degree shift, noise 0.3, six virtual views
  toy.k_labels_per_class = 3;
  const SplitBundle bundle = gen_two_domain_toy(toy);
  AdversarialConfig adv;  // defaults: lr .01, momentum .9, 100 epochs
  return run_matrix(bundle, NetConfig{}, adv, {1, 2, 3, 4, 5});
}

// Criterion 7: adaptation trend on the default SSPP toy over 5 seeds.
bool criterion_adaptation_trend(const MatrixResult& result, std::string& detail) {
  const double source_only = mean_of(result, ExperimentMode::kSourceOnly);
  const double dan = mean_of(result, ExperimentMode::kDan);
  const double sspp = mean_of(result, ExperimentMode::kSsppDan);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean sspp-dan %.3f vs source-only %.3f (+0.10) and dan %.3f "
                "(+0.05)",
                sspp, source_only, dan);
  detail = buf;
  return sspp > source_only + 0.10 && sspp > dan + 0.05 && source_only >= 0.0 &&
         dan >= 0.0;
}

// Criterion 8: semi-supervised and bound properties on the same matrix.
bool criterion_bounds(const MatrixResult& result, std::string& detail) {
  const double sspp = mean_of(result, ExperimentMode::kSsppDan);
  const double semi_sspp = mean_of(result, ExperimentMode::kSemiSsppDan);
  const double top = mean_of(result, ExperimentMode::kTrainOnTarget);
  bool upper_bound = true;
  double best_other = 0.0;
  for (const ModeSummary& s : result.summary) {
    if (s.mode == ExperimentMode::kTrainOnTarget) continue;
    best_other = std::max(best_other, s.mean_accuracy);
    upper_bound = upper_bound && top >= s.mean_accuracy - 0.02;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "semi-sspp %.3f >= sspp %.3f - 0.02; train-on-target %.3f >= "
                "best other %.3f - 0.02",
                semi_sspp, sspp, top, best_other);
  detail = buf;
  return semi_sspp >= sspp - 0.02 && upper_bound;
}

// Criterion 9: CLI reruns with identical config and seed are byte-identical.
bool criterion_cli_determinism(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "gradrev_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);

  auto cli = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return run_cli(args, out, err);
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const fs::path data = root / "data";
  if (cli({"gen-data", "--out", data.string(), "--seed", "5", "--classes",
           "4", "--target-per-class", "40", "--labels-per-class", "2"}) != 0) {
    detail = "gen-data failed";
    return false;
  }
  const fs::path data2 = root / "data2";
  cli({"gen-data", "--out", data2.string(), "--seed", "5", "--classes", "4",
       "--target-per-class", "40", "--labels-per-class", "2"});
  if (slurp(data / "samples.csv") != slurp(data2 / "samples.csv") ||
      slurp(data / "manifest.csv") != slurp(data2 / "manifest.csv")) {
    detail = "gen-data reruns differ";
    return false;
  }

  const fs::path r1 = root / "r1", r2 = root / "r2";
  for (const fs::path& out_dir : {r1, r2}) {
    if (cli({"train", "--data", data.string(), "--mode", "sspp-dan", "--out",
             out_dir.string(), "--seed", "3", "--epochs", "15"}) != 0) {
      detail = "train failed";
      return false;
    }
  }
  if (slurp(r1 / "report.csv") != slurp(r2 / "report.csv") ||
      slurp(r1 / "model.txt") != slurp(r2 / "model.txt")) {
    detail = "train reruns differ";
    return false;
  }

  const fs::path m1 = root / "m1", m2 = root / "m2";
  for (const fs::path& out_dir : {m1, m2}) {
    if (cli({"matrix", "--data", data.string(), "--out", out_dir.string(),
             "--seeds", "1,2", "--epochs", "8"}) != 0) {
      detail = "matrix failed";
      return false;
    }
  }
  if (slurp(m1 / "report.csv") != slurp(m2 / "report.csv") ||
      slurp(m1 / "summary.txt") != slurp(m2 / "summary.txt")) {
    detail = "matrix reruns differ";
    return false;
  }
  detail = "gen-data, train and matrix reruns byte-identical";
  return true;
}

// Criterion 10: converged DAN on the zero-shift control reports domain
// confusion near chance.
bool criterion_domain_confusion(std::string& detail) {
  ToyShiftConfig toy;
  toy.samples_per_class_source = 50;
  toy.samples_per_class_target = 50;
  toy.shift_rotation_deg = 0.0;
  toy.noise_sigma = 0.0;
  toy.k_labels_per_class = 3;
  toy.seed = 77;
  const SplitBundle bundle = gen_two_domain_toy(toy);
  AdversarialConfig adv;
  const ExperimentReport report =
      run_experiment(ExperimentMode::kDan, bundle, NetConfig{}, adv, 4);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "domain confusion %.3f (in [0.45, 0.60])",
                report.domain_confusion);
  detail = buf;
  return report.domain_confusion >= 0.45 && report.domain_confusion <= 0.60;
}

}  // namespace

int main() {
  int failures = 0;
  MatrixResult matrix;

  const auto run_one = [&](int id, const std::string& name, auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %2d: %-28s [%5.1fs] %s\n", ok ? "PASS" : "FAIL",
                id, name.c_str(), seconds, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };

  run_one(1, "gradient correctness", criterion_gradients);
  run_one(2, "grl exactness", criterion_grl);
  run_one(3, "lambda=0 decoupling", criterion_decoupling);
  run_one(4, "camera-fit oracle", criterion_camera_fit);
  run_one(5, "rotation/projection", criterion_rotation);
  run_one(6, "synthesis round trip", criterion_synthesis_round_trip);
  run_one(7, "adaptation trend", [&](std::string& detail) {
    matrix = run_default_matrix();
    return criterion_adaptation_trend(matrix, detail);
  });
  run_one(8, "semi-supervised and bounds", [&](std::string& detail) {
    return criterion_bounds(matrix, detail);
  });
  run_one(9, "cli determinism", criterion_cli_determinism);
  run_one(10, "domain confusion control", criterion_domain_confusion);

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
