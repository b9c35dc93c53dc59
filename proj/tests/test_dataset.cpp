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

#include "gradrev/dataset.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gradrev/errors.hpp"
#include "gradrev/image.hpp"

using namespace gradrev;
namespace fs = std::filesystem;

namespace {

bool same_samples(const std::vector<Sample>& a, const std::vector<Sample>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].input != b[i].input ||
        a[i].label != b[i].label || a[i].domain != b[i].domain ||
        a[i].origin != b[i].origin) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("toy generator: same seed, same bundle, bit for bit") {
  ToyShiftConfig config;
  config.seed = 42;
  const SplitBundle a = gen_two_domain_toy(config);
  const SplitBundle b = gen_two_domain_toy(config);
  CHECK(same_samples(a.S, b.S));
  CHECK(same_samples(a.S_v, b.S_v));
  CHECK(same_samples(a.T, b.T));
  CHECK(same_samples(a.T_l, b.T_l));
  CHECK(same_samples(a.test, b.test));

  config.seed = 43;
  const SplitBundle c = gen_two_domain_toy(config);
  CHECK(!same_samples(a.S, c.S));
}

TEST_CASE("toy generator: counts contract") {
  ToyShiftConfig config;  // defaults: 10 classes, 1 source, 200 target, k=0
  const SplitBundle bundle = gen_two_domain_toy(config);
  CHECK(bundle.S.size() == 10);
  CHECK(bundle.S_v.size() == 60);  // six view angles per source sample
  CHECK(bundle.T_l.empty());
  CHECK(bundle.T.size() + bundle.test.size() == 2000);

  for (const Sample& s : bundle.S_v) {
    CHECK(s.origin == Origin::kVirtual);
    CHECK(s.domain == Domain::kSource);
    CHECK(!s.origin_id.empty());
  }
}

TEST_CASE("toy generator: zero shift makes the domains indistinguishable") {
  ToyShiftConfig config;
  config.num_classes = 5;
  config.samples_per_class_source = 200;
  config.samples_per_class_target = 200;
  config.shift_rotation_deg = 0.0;
  config.noise_sigma = 0.0;
  config.virtual_view_angles_deg.clear();
  config.test_fraction = 0.0;
  config.seed = 7;
  const std::vector<Sample> samples = gen_toy_samples(config);

  // Two-sample mean discrepancy per feature, against the pooled sd.
  std::vector<double> mean_s(kToyFeatureDim, 0.0), mean_t(kToyFeatureDim, 0.0);
  std::vector<double> var(kToyFeatureDim, 0.0);
  std::size_t ns = 0, nt = 0;
  for (const Sample& s : samples) {
    auto& m = s.domain == Domain::kSource ? mean_s : mean_t;
    (s.domain == Domain::kSource ? ns : nt) += 1;
    for (std::size_t i = 0; i < kToyFeatureDim; ++i) m[i] += s.input[i];
  }
  REQUIRE(ns == 1000);
  REQUIRE(nt == 1000);
  for (std::size_t i = 0; i < kToyFeatureDim; ++i) {
    mean_s[i] /= static_cast<double>(ns);
    mean_t[i] /= static_cast<double>(nt);
  }
  for (const Sample& s : samples) {
    const auto& m = s.domain == Domain::kSource ? mean_s : mean_t;
    for (std::size_t i = 0; i < kToyFeatureDim; ++i) {
      var[i] += (s.input[i] - m[i]) * (s.input[i] - m[i]);
    }
  }
  for (std::size_t i = 0; i < kToyFeatureDim; ++i) {
    const double sd = std::sqrt(var[i] / static_cast<double>(ns + nt - 2));
    const double discrepancy = std::fabs(mean_s[i] - mean_t[i]);
    // ~5 standard errors of the mean difference.
    CHECK(discrepancy < 5.0 * sd * std::sqrt(2.0 / 1000.0) + 1e-12);
  }
}

TEST_CASE("build_splits: k=0 leaves the reveal empty") {
  ToyShiftConfig config;
  config.seed = 3;
  const SplitBundle bundle =
      build_splits(gen_toy_samples(config), 0, 0.33, config.seed);
  CHECK(bundle.T_l.empty());
}

TEST_CASE("build_splits: k=3 over 10 classes reveals exactly 30") {
  ToyShiftConfig config;
  config.seed = 3;
  const std::vector<Sample> samples = gen_toy_samples(config);
  const SplitBundle bundle = build_splits(samples, 3, 0.33, 9);
  CHECK(bundle.T_l.size() == 30);

  std::map<std::size_t, std::size_t> per_class;
  for (const Sample& s : bundle.T_l) {
    REQUIRE(s.label.has_value());
    CHECK(s.domain == Domain::kTarget);
    per_class[*s.label] += 1;
  }
  for (const auto& [cls, count] : per_class) CHECK(count == 3);
}

TEST_CASE("build_splits: seeded shuffle is reproducible and seed-sensitive") {
  ToyShiftConfig config;
  config.seed = 5;
  config.samples_per_class_target = 100;
  const std::vector<Sample> samples = gen_toy_samples(config);

  auto ids_of = [](const std::vector<Sample>& set) {
    std::set<std::string> ids;
    for (const Sample& s : set) ids.insert(s.id);
    return ids;
  };

  const SplitBundle a = build_splits(samples, 3, 0.33, 100);
  const SplitBundle b = build_splits(samples, 3, 0.33, 100);
  const SplitBundle c = build_splits(samples, 3, 0.33, 101);
  CHECK(ids_of(a.T_l) == ids_of(b.T_l));
  CHECK(ids_of(a.test) == ids_of(b.test));
  CHECK(ids_of(a.T_l) != ids_of(c.T_l));
}

TEST_CASE("build_splits: label hygiene and pairwise disjointness") {
  ToyShiftConfig config;
  config.seed = 6;
  const SplitBundle bundle = build_splits(gen_toy_samples(config), 3, 0.33, 6);

  for (const Sample& s : bundle.T) CHECK(!s.label.has_value());
  for (const Sample& s : bundle.test) CHECK(s.label.has_value());

  auto ids_of = [](const std::vector<Sample>& set) {
    std::set<std::string> ids;
    for (const Sample& s : set) ids.insert(s.id);
    return ids;
  };
  const auto t = ids_of(bundle.T), tl = ids_of(bundle.T_l),
             test = ids_of(bundle.test);
  for (const std::string& id : tl) {
    CHECK(t.count(id) == 0);
    CHECK(test.count(id) == 0);
  }
  for (const std::string& id : test) CHECK(t.count(id) == 0);
}

TEST_CASE("build_splits: insufficient labels reports per-class counts") {
  ToyShiftConfig config;
  config.samples_per_class_target = 2;
  config.seed = 8;
  try {
    build_splits(gen_toy_samples(config), 3, 0.0, 8);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("class") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("attach_virtual: views inherit the origin label") {
  ToyShiftConfig config;
  config.virtual_view_angles_deg.clear();  // start with an empty S_v
  config.seed = 9;
  SplitBundle bundle = gen_two_domain_toy(config);
  REQUIRE(bundle.S_v.empty());

  const SplitBundle unchanged = attach_virtual(bundle, {});
  CHECK(unchanged.S_v.empty());

  std::vector<VirtualView> views;
  for (int i = 0; i < 6; ++i) {
    VirtualView v;
    v.origin_id = bundle.S[0].id;
    v.view.pose = PoseSpec{15.0 * (i + 1), 0, 0};
    v.view.image = GrayImage(16, 16, 0.5);
    views.push_back(v);
  }
  const SplitBundle attached = attach_virtual(bundle, views);
  CHECK(attached.S_v.size() == 6);
  for (const Sample& s : attached.S_v) {
    CHECK(s.label == bundle.S[0].label);
    CHECK(s.domain == Domain::kSource);
    CHECK(s.origin == Origin::kVirtual);
    CHECK(s.origin_id == bundle.S[0].id);
  }

  VirtualView bad;
  bad.origin_id = "nonexistent";
  bad.view.image = GrayImage(16, 16, 0.5);
  CHECK_THROWS_AS(attach_virtual(bundle, {bad}), ValidationError);
}

TEST_CASE("load_image_dataset: lexicographic layout walk") {
  const fs::path root = fs::temp_directory_path() / "gradrev_imgset";
  fs::remove_all(root);
  fs::create_directories(root / "source" / "0");
  fs::create_directories(root / "source" / "1");
  fs::create_directories(root / "target" / "0");
  fs::create_directories(root / "target" / "unlabeled");

  const GrayImage img(16, 16, 0.25);
  write_pgm(img, root / "source" / "0" / "b.pgm");
  write_pgm(img, root / "source" / "0" / "a.pgm");
  write_pgm(img, root / "source" / "1" / "c.pgm");
  write_pgm(img, root / "target" / "0" / "d.pgm");
  write_pgm(img, root / "target" / "unlabeled" / "e.pgm");

  const std::vector<Sample> samples = load_image_dataset(root);
  REQUIRE(samples.size() == 5);
  CHECK(samples[0].id == "source/0/a.pgm");
  CHECK(samples[1].id == "source/0/b.pgm");
  CHECK(samples[2].id == "source/1/c.pgm");
  CHECK(samples[2].label == 1);
  CHECK(samples[3].domain == Domain::kTarget);
  CHECK(samples[3].label == 0);
  CHECK(!samples[4].label.has_value());
  CHECK(samples[0].input.size() == 256);
}

TEST_CASE("load_image_dataset: empty and malformed trees") {
  const fs::path root = fs::temp_directory_path() / "gradrev_imgset_empty";
  fs::remove_all(root);
  fs::create_directories(root);
  CHECK(load_image_dataset(root).empty());

  fs::create_directories(root / "source" / "notaclass");
  const GrayImage img(16, 16, 0.5);
  write_pgm(img, root / "source" / "notaclass" / "a.pgm");
  try {
    load_image_dataset(root);
    FAIL("expected IngestionError");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("notaclass") != std::string::npos);
  }

  const fs::path root2 = fs::temp_directory_path() / "gradrev_imgset_corrupt";
  fs::remove_all(root2);
  fs::create_directories(root2 / "source" / "0");
  std::ofstream(root2 / "source" / "0" / "bad.pgm", std::ios::binary)
      << "NOTAPGM";
  try {
    load_image_dataset(root2);
    FAIL("expected IngestionError");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("bad.pgm") != std::string::npos);
  }
}

TEST_CASE("split bundle csv round trip") {
  ToyShiftConfig config;
  config.num_classes = 3;
  config.samples_per_class_target = 10;
  config.k_labels_per_class = 2;
  config.seed = 12;
  const SplitBundle bundle = gen_two_domain_toy(config);

  const fs::path dir = fs::temp_directory_path() / "gradrev_bundle_rt";
  fs::remove_all(dir);
  write_split_bundle(bundle, dir);
  const SplitBundle back = read_split_bundle(dir);
  CHECK(same_samples(bundle.S, back.S));
  CHECK(same_samples(bundle.S_v, back.S_v));
  CHECK(same_samples(bundle.T, back.T));
  CHECK(same_samples(bundle.T_l, back.T_l));
  CHECK(same_samples(bundle.test, back.test));
}
