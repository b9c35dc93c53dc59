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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "gradrev/errors.hpp"
#include "gradrev/image.hpp"
#include "gradrev/rng.hpp"

namespace gradrev {

namespace fs = std::filesystem;

void ToyShiftConfig::validate() const {
  if (num_classes < 1 || samples_per_class_source < 1 ||
      samples_per_class_target < 1) {
    throw ValidationError("ToyShiftConfig: all counts must be >= 1");
  }
  if (noise_sigma < 0.0) {
    throw ValidationError("ToyShiftConfig: noise_sigma must be >= 0");
  }
  if (blur_kernel_width < 1) {
    throw ValidationError("ToyShiftConfig: blur_kernel_width must be >= 1");
  }
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ValidationError("ToyShiftConfig: test_fraction must be in [0, 1)");
  }
}

namespace {

// Class identity lives on the radius (spacing 3x the default target noise),
// while the domain shift rotates the angle. Virtual views sweep the angle
// axis the way posed renders sweep yaw, so they bridge the shift without
// colliding with other classes' rings.
constexpr double kBaseRadius = 2.0;
constexpr double kRadiusStep = 0.9;
constexpr double kClusterSigma = 0.1;

struct Latent {
  double x = 0.0;
  double y = 0.0;
};

Latent rotate_latent(const Latent& z, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  return {c * z.x - s * z.y, s * z.x + c * z.y};
}

// Fixed nonlinearity from the 2-D latent into feature space. Keeps scaled
// raw coordinates so the map stays invertible in principle, plus smooth
// components that react to the feature-smoothing corruption.
std::vector<double> feature_map(const Latent& z) {
  const double r2 = z.x * z.x + z.y * z.y;
  return {0.3 * z.x,
          0.3 * z.y,
          std::sin(0.5 * z.x),
          std::sin(0.5 * z.y),
          std::cos(0.5 * z.x),
          std::cos(0.5 * z.y),
          std::tanh(0.1 * z.x * z.y),
          (z.x * z.x - z.y * z.y) / (1.0 + r2)};
}

std::vector<double> smooth_features(const std::vector<double>& f,
                                    std::size_t width) {
  if (width <= 1) return f;
  std::vector<double> out(f.size(), 0.0);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width) / 2;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::ptrdiff_t j = i - half; j <= i + half; ++j) {
      const std::ptrdiff_t k = std::clamp<std::ptrdiff_t>(j, 0, n - 1);
      acc += f[static_cast<std::size_t>(k)];
      ++count;
    }
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(count);
  }
  return out;
}

Latent class_center(std::size_t c, std::size_t num_classes) {
  const double angle =
      2.0 * std::numbers::pi * static_cast<double>(c) /
      static_cast<double>(num_classes);
  const double radius = kBaseRadius + kRadiusStep * static_cast<double>(c);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

std::vector<Sample> gen_toy_samples(const ToyShiftConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<Sample> samples;

  // Source pool first, with its virtual views right after each draw.
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    const Latent center = class_center(c, config.num_classes);
    for (std::size_t i = 0; i < config.samples_per_class_source; ++i) {
      const Latent z{rng.normal(center.x, kClusterSigma),
                     rng.normal(center.y, kClusterSigma)};
      Sample s;
      s.id = "src_c" + std::to_string(c) + "_i" + std::to_string(i);
      s.input = feature_map(z);
      s.label = c;
      s.domain = Domain::kSource;
      s.origin = Origin::kReal;
      samples.push_back(std::move(s));

      for (std::size_t v = 0; v < config.virtual_view_angles_deg.size(); ++v) {
        const Latent zv = rotate_latent(z, config.virtual_view_angles_deg[v]);
        Sample sv;
        sv.id = "virt_c" + std::to_string(c) + "_i" + std::to_string(i) +
                "_v" + std::to_string(v);
        sv.input = feature_map(zv);
        sv.label = c;
        sv.domain = Domain::kSource;
        sv.origin = Origin::kVirtual;
        sv.origin_id = "src_c" + std::to_string(c) + "_i" + std::to_string(i);
        samples.push_back(std::move(sv));
      }
    }
  }

  // Target pool: same generators, then the domain shift.
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    const Latent center = class_center(c, config.num_classes);
    for (std::size_t i = 0; i < config.samples_per_class_target; ++i) {
      Latent z{rng.normal(center.x, kClusterSigma),
               rng.normal(center.y, kClusterSigma)};
      z = rotate_latent(z, config.shift_rotation_deg);
      z.x += rng.normal(0.0, config.noise_sigma);
      z.y += rng.normal(0.0, config.noise_sigma);
      Sample s;
      s.id = "tgt_c" + std::to_string(c) + "_i" + std::to_string(i);
      s.input = smooth_features(feature_map(z), config.blur_kernel_width);
      s.label = c;
      s.domain = Domain::kTarget;
      s.origin = Origin::kReal;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

SplitBundle gen_two_domain_toy(const ToyShiftConfig& config) {
  return build_splits(gen_toy_samples(config), config.k_labels_per_class,
                      config.test_fraction, config.seed);
}

SplitBundle build_splits(const std::vector<Sample>& samples,
                         std::size_t k_labels_per_class, double test_fraction,
                         std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ValidationError("build_splits: test_fraction must be in [0, 1)");
  }
  SplitBundle bundle;
  std::map<std::size_t, std::vector<std::size_t>> labeled_target_by_class;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.domain == Domain::kSource) {
      if (!s.label.has_value()) {
        throw ValidationError("build_splits: source sample '" + s.id +
                              "' has no label");
      }
      (s.origin == Origin::kVirtual ? bundle.S_v : bundle.S).push_back(s);
    } else if (s.label.has_value()) {
      labeled_target_by_class[*s.label].push_back(i);
    } else {
      bundle.T.push_back(s);
    }
  }

  // Enough labels for the reveal?
  if (k_labels_per_class > 0) {
    std::string shortfall;
    for (const auto& [cls, members] : labeled_target_by_class) {
      if (members.size() < k_labels_per_class) {
        shortfall += " class " + std::to_string(cls) + " has " +
                     std::to_string(members.size());
      }
    }
    if (labeled_target_by_class.empty()) shortfall = " no labeled target samples";
    if (!shortfall.empty()) {
      throw ValidationError("build_splits: need " +
                            std::to_string(k_labels_per_class) +
                            " labeled target samples per class;" + shortfall);
    }
  }

  Rng rng(seed);
  for (auto& [cls, members] : labeled_target_by_class) {
    rng.shuffle(members);
    std::size_t idx = 0;
    for (; idx < k_labels_per_class; ++idx) {
      bundle.T_l.push_back(samples[members[idx]]);
    }
    const std::size_t remaining = members.size() - idx;
    const std::size_t test_count = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(remaining)));
    for (std::size_t j = 0; j < remaining; ++j) {
      Sample s = samples[members[idx + j]];
      if (j < test_count) {
        bundle.test.push_back(std::move(s));
      } else {
        s.label.reset();  // label hygiene: T is unlabeled
        bundle.T.push_back(std::move(s));
      }
    }
  }
  return bundle;
}

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  return entries;
}

bool parse_class_id(const std::string& name, std::size_t& out) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c < '0' || c > '9') return false;
  }
  out = static_cast<std::size_t>(std::stoull(name));
  return true;
}

void load_image_tree(const fs::path& domain_dir, Domain domain, Origin origin,
                     const fs::path& root, std::vector<Sample>& out,
                     std::size_t& dim) {
  if (!fs::exists(domain_dir)) return;
  for (const fs::path& class_dir : sorted_entries(domain_dir)) {
    if (!fs::is_directory(class_dir)) {
      throw IngestionError("load_image_dataset: unexpected file " +
                           class_dir.string());
    }
    const std::string class_name = class_dir.filename().string();
    std::size_t class_id = 0;
    const bool unlabeled =
        domain == Domain::kTarget && class_name == "unlabeled";
    if (!unlabeled && !parse_class_id(class_name, class_id)) {
      throw IngestionError(
          "load_image_dataset: class directory is not an integer: " +
          class_dir.string());
    }
    for (const fs::path& file : sorted_entries(class_dir)) {
      if (file.extension() != ".pgm") {
        throw IngestionError("load_image_dataset: non-PGM file " +
                             file.string());
      }
      const GrayImage image = read_pgm(file);
      Sample s;
      s.id = fs::relative(file, root).string();
      s.input = image.pixels;
      if (dim == 0) dim = s.input.size();
      if (s.input.size() != dim) {
        throw IngestionError("load_image_dataset: image " + file.string() +
                             " has " + std::to_string(s.input.size()) +
                             " pixels, expected " + std::to_string(dim));
      }
      if (!unlabeled) s.label = class_id;
      s.domain = domain;
      s.origin = origin;
      if (origin == Origin::kVirtual) {
        // Virtual files are named <origin-stem>_yaw<y>_pitch<p>.pgm.
        const std::string stem = file.stem().string();
        const auto pos = stem.rfind("_yaw");
        if (pos != std::string::npos) s.origin_id = stem.substr(0, pos);
      }
      out.push_back(std::move(s));
    }
  }
}

}  // namespace

std::vector<Sample> load_image_dataset(const fs::path& root) {
  if (!fs::exists(root)) {
    throw IngestionError("load_image_dataset: no such directory " +
                         root.string());
  }
  std::vector<Sample> samples;
  std::size_t dim = 0;
  load_image_tree(root / "source", Domain::kSource, Origin::kReal, root,
                  samples, dim);
  load_image_tree(root / "virtual", Domain::kSource, Origin::kVirtual, root,
                  samples, dim);
  load_image_tree(root / "target", Domain::kTarget, Origin::kReal, root,
                  samples, dim);
  return samples;
}

SplitBundle attach_virtual(SplitBundle bundle,
                           const std::vector<VirtualView>& views) {
  std::map<std::string, const Sample*> gallery;
  for (const Sample& s : bundle.S) gallery[s.id] = &s;

  for (const VirtualView& v : views) {
    const auto it = gallery.find(v.origin_id);
    if (it == gallery.end()) {
      throw ValidationError("attach_virtual: view origin '" + v.origin_id +
                            "' is not a gallery (S) sample");
    }
    Sample s;
    s.id = view_name(v.origin_id, v.view.pose);
    s.input = v.view.image.pixels;
    s.label = it->second->label;
    s.domain = Domain::kSource;
    s.origin = Origin::kVirtual;
    s.origin_id = v.origin_id;
    bundle.S_v.push_back(std::move(s));
  }
  return bundle;
}

namespace {

const char* role_name(std::size_t role) {
  static const char* names[] = {"S", "S_v", "T", "T_l", "test"};
  return names[role];
}

const std::vector<Sample>& role_samples(const SplitBundle& b, std::size_t role) {
  switch (role) {
    case 0: return b.S;
    case 1: return b.S_v;
    case 2: return b.T;
    case 3: return b.T_l;
    default: return b.test;
  }
}

std::vector<Sample>& role_samples(SplitBundle& b, std::size_t role) {
  switch (role) {
    case 0: return b.S;
    case 1: return b.S_v;
    case 2: return b.T;
    case 3: return b.T_l;
    default: return b.test;
  }
}

}  // namespace

void write_split_bundle(const SplitBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream samples_out(dir / "samples.csv");
  std::ofstream manifest_out(dir / "manifest.csv");
  if (!samples_out || !manifest_out) {
    throw IngestionError("write_split_bundle: cannot write into " +
                         dir.string());
  }
  samples_out << "id,domain,origin,label,origin_id,features\n";
  manifest_out << "sample_id,role\n";
  char buf[32];
  for (std::size_t role = 0; role < 5; ++role) {
    for (const Sample& s : role_samples(bundle, role)) {
      samples_out << s.id << "," << domain_name(s.domain) << ","
                  << origin_name(s.origin) << ",";
      if (s.label.has_value()) samples_out << *s.label;
      samples_out << "," << s.origin_id;
      for (double f : s.input) {
        std::snprintf(buf, sizeof(buf), ",%.17g", f);
        samples_out << buf;
      }
      samples_out << "\n";
      manifest_out << s.id << "," << role_name(role) << "\n";
    }
  }
}

SplitBundle read_split_bundle(const fs::path& dir) {
  std::ifstream samples_in(dir / "samples.csv");
  if (!samples_in) {
    throw IngestionError("read_split_bundle: cannot open " +
                         (dir / "samples.csv").string());
  }
  std::ifstream manifest_in(dir / "manifest.csv");
  if (!manifest_in) {
    throw IngestionError("read_split_bundle: cannot open " +
                         (dir / "manifest.csv").string());
  }

  std::map<std::string, std::size_t> role_by_id;
  std::string line;
  std::getline(manifest_in, line);  // header
  while (std::getline(manifest_in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IngestionError("read_split_bundle: malformed manifest line '" +
                           line + "'");
    }
    const std::string id = line.substr(0, comma);
    const std::string role = line.substr(comma + 1);
    std::size_t role_idx = 5;
    for (std::size_t r = 0; r < 5; ++r) {
      if (role == role_name(r)) role_idx = r;
    }
    if (role_idx == 5) {
      throw IngestionError("read_split_bundle: unknown role '" + role + "'");
    }
    role_by_id[id] = role_idx;
  }

  SplitBundle bundle;
  std::getline(samples_in, line);  // header
  while (std::getline(samples_in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Sample s;
    std::getline(ss, s.id, ',');
    std::getline(ss, field, ',');
    if (field == "source") {
      s.domain = Domain::kSource;
    } else if (field == "target") {
      s.domain = Domain::kTarget;
    } else {
      throw IngestionError("read_split_bundle: unknown domain '" + field + "'");
    }
    std::getline(ss, field, ',');
    s.origin = field == "virtual" ? Origin::kVirtual : Origin::kReal;
    std::getline(ss, field, ',');
    if (!field.empty()) s.label = std::stoull(field);
    std::getline(ss, s.origin_id, ',');
    while (std::getline(ss, field, ',')) {
      s.input.push_back(std::stod(field));
    }
    const auto it = role_by_id.find(s.id);
    if (it == role_by_id.end()) {
      throw IngestionError("read_split_bundle: sample '" + s.id +
                           "' missing from manifest");
    }
    role_samples(bundle, it->second).push_back(std::move(s));
  }
  return bundle;
}

}  // namespace gradrev
