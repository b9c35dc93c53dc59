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

#ifndef GRADREV_DATASET_HPP
#define GRADREV_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gradrev/sample.hpp"
#include "gradrev/synthesis.hpp"

namespace gradrev {

/// The split algebra every experiment mode draws from:
///   S    labeled source set
///   S_v  virtual set synthesized from S (domain source, origin virtual)
///   T    unlabeled target training set
///   T_l  small labeled target subset (the semi-supervised reveal)
///   test labeled target evaluation set
/// T, T_l and test are pairwise disjoint by sample identity.
struct SplitBundle {
  std::vector<Sample> S;
  std::vector<Sample> S_v;
  std::vector<Sample> T;
  std::vector<Sample> T_l;
  std::vector<Sample> test;
};

/// Two-domain toy generator: class-conditional 2-D Gaussian clusters pushed
/// through a fixed nonlinearity into an 8-D feature space. The target domain
/// runs the same generators composed with a latent rotation, additive noise
/// and feature smoothing, mirroring a stable-vs-unstable capture gap.
struct ToyShiftConfig {
  std::size_t num_classes = 10;
  std::size_t samples_per_class_source = 1;
  std::size_t samples_per_class_target = 200;
  double shift_rotation_deg = 35.0;
  double noise_sigma = 0.3;
  std::size_t blur_kernel_width = 1;  // feature smoothing window; 1 = off
  std::uint64_t seed = 1;

  // Virtual views: each source sample re-emitted at these latent rotations,
  // the feature-space analogue of re-rendering a gallery face across yaw.
  std::vector<double> virtual_view_angles_deg = {-45.0, -30.0, -15.0,
                                                 15.0,  30.0,  45.0};
  // Split knobs applied by gen_two_domain_toy.
  std::size_t k_labels_per_class = 0;
  double test_fraction = 0.33;

  void validate() const;
};

inline constexpr std::size_t kToyFeatureDim = 8;

/// Raw labeled sample pool (source + virtual + target, labels everywhere);
/// feed it to build_splits to strip and partition.
std::vector<Sample> gen_toy_samples(const ToyShiftConfig& config);

/// gen_toy_samples followed by build_splits with the config's split knobs.
SplitBundle gen_two_domain_toy(const ToyShiftConfig& config);

/// Partitions a sample pool: source samples pass through to S/S_v, labeled
/// target samples are carved into T_l (exactly k per class, seeded shuffle),
/// test (test_fraction of the rest, stratified per class) and T (labels
/// stripped). Pre-unlabeled target samples go straight to T.
SplitBundle build_splits(const std::vector<Sample>& samples,
                         std::size_t k_labels_per_class, double test_fraction,
                         std::uint64_t seed);

/// Loads root/<domain>/<class_id>/<name>.pgm with unlabeled target images
/// under root/target/unlabeled/ and optional virtual source images under
/// root/virtual/<class_id>/. Deterministic lexicographic ordering.
std::vector<Sample> load_image_dataset(const std::filesystem::path& root);

/// A synthesized view tied back to the gallery sample it came from.
struct VirtualView {
  std::string origin_id;
  SynthesizedView view;
};

/// Populates S_v from synthesized views; each virtual sample inherits the
/// class label of its origin gallery sample. Views whose origin is not in S
/// are a validation error.
SplitBundle attach_virtual(SplitBundle bundle,
                           const std::vector<VirtualView>& views);

/// samples.csv + manifest.csv (sample_id, role) in `dir`; byte-stable for a
/// given bundle.
void write_split_bundle(const SplitBundle& bundle,
                        const std::filesystem::path& dir);
SplitBundle read_split_bundle(const std::filesystem::path& dir);

}  // namespace gradrev

#endif  // GRADREV_DATASET_HPP
