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

#include "gradrev/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gradrev/errors.hpp"

namespace gradrev {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" +
                      value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw ConfigError("config: key '" + key +
                      "' expects a non-negative integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" +
                    value + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<std::size_t> parse_dim_list(const std::string& key,
                                        const std::string& value) {
  std::vector<std::size_t> out;
  for (double v : parse_double_list(key, value)) {
    if (v < 1) throw ConfigError("config: key '" + key + "' expects dims >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Semicolon-separated "yaw,pitch,roll" triples; bare "yaw" is accepted.
std::vector<PoseSpec> parse_poses(const std::string& key,
                                  const std::string& value) {
  std::vector<PoseSpec> out;
  std::stringstream ss(value);
  std::string triple;
  while (std::getline(ss, triple, ';')) {
    triple = trim(triple);
    if (triple.empty()) continue;
    const std::vector<double> parts = parse_double_list(key, triple);
    if (parts.empty() || parts.size() > 3) {
      throw ConfigError("config: key '" + key +
                        "' expects 'yaw[,pitch[,roll]]' triples, got '" +
                        triple + "'");
    }
    PoseSpec pose;
    pose.yaw = parts[0];
    if (parts.size() > 1) pose.pitch = parts[1];
    if (parts.size() > 2) pose.roll = parts[2];
    out.push_back(pose);
  }
  if (out.empty()) {
    throw ConfigError("config: key '" + key + "' names no poses");
  }
  return out;
}

std::string render_list(const std::vector<double>& values) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), i > 0 ? ",%g" : "%g", values[i]);
    out += buf;
  }
  return out;
}

std::string render_dims(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string render_poses(const std::vector<PoseSpec>& poses) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < poses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), i > 0 ? ";%g,%g,%g" : "%g,%g,%g",
                  poses[i].yaw, poses[i].pitch, poses[i].roll);
    out += buf;
  }
  return out;
}

}  // namespace

void apply_config_entry(CliConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "general.seed") {
    config.seed = parse_u64(key, value);
  } else if (key == "general.verbose") {
    config.verbose = parse_bool(key, value);
  } else if (key == "toy.classes") {
    config.toy.num_classes = parse_u64(key, value);
  } else if (key == "toy.source_per_class") {
    config.toy.samples_per_class_source = parse_u64(key, value);
  } else if (key == "toy.target_per_class") {
    config.toy.samples_per_class_target = parse_u64(key, value);
  } else if (key == "toy.shift_deg") {
    config.toy.shift_rotation_deg = parse_double(key, value);
  } else if (key == "toy.noise_sigma") {
    config.toy.noise_sigma = parse_double(key, value);
  } else if (key == "toy.blur_width") {
    config.toy.blur_kernel_width = parse_u64(key, value);
  } else if (key == "toy.labels_per_class") {
    config.toy.k_labels_per_class = parse_u64(key, value);
  } else if (key == "toy.test_fraction") {
    config.toy.test_fraction = parse_double(key, value);
  } else if (key == "toy.virtual_view_angles") {
    config.toy.virtual_view_angles_deg = parse_double_list(key, value);
  } else if (key == "net.feature") {
    config.net.feature_dims = parse_dim_list(key, value);
  } else if (key == "net.classifier_hidden") {
    config.net.classifier_hidden =
        value.empty() ? std::vector<std::size_t>{} : parse_dim_list(key, value);
  } else if (key == "net.discriminator_hidden") {
    config.net.discriminator_hidden =
        value.empty() ? std::vector<std::size_t>{} : parse_dim_list(key, value);
  } else if (key == "adv.lambda_mode") {
    if (value == "fixed") {
      config.adv.lambda_mode = LambdaMode::kFixed;
    } else if (value == "scheduled") {
      config.adv.lambda_mode = LambdaMode::kScheduled;
    } else {
      throw ConfigError("config: adv.lambda_mode must be fixed|scheduled");
    }
  } else if (key == "adv.lambda") {
    config.adv.lambda_value = parse_double(key, value);
  } else if (key == "adv.gamma") {
    config.adv.schedule_gamma = parse_double(key, value);
  } else if (key == "adv.lr") {
    config.adv.lr = parse_double(key, value);
  } else if (key == "adv.momentum") {
    config.adv.momentum = parse_double(key, value);
  } else if (key == "adv.clip_norm") {
    config.adv.clip_norm = parse_double(key, value);
  } else if (key == "adv.batch") {
    config.adv.batch_size = parse_u64(key, value);
  } else if (key == "adv.epochs") {
    config.adv.epochs = parse_u64(key, value);
  } else if (key == "adv.update_rule") {
    if (value == "single-pass") {
      config.adv.update_rule = UpdateRule::kSinglePass;
    } else if (value == "alternating") {
      config.adv.update_rule = UpdateRule::kAlternating;
    } else {
      throw ConfigError("config: adv.update_rule must be single-pass|alternating");
    }
  } else if (key == "adv.semi_domain_loss") {
    config.adv.semi_keep_target_domain_loss = parse_bool(key, value);
  } else if (key == "synth.fit_threshold") {
    config.synth.fit_threshold_px = parse_double(key, value);
  } else if (key == "synth.margin") {
    config.synth.bounds_margin = parse_double(key, value);
  } else if (key == "synth.poses") {
    config.synth.poses = parse_poses(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void apply_config_file(CliConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config: malformed section at line " +
                          std::to_string(line_no) + " of " + path.string());
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(line_no) + " of " + path.string());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("config: key '" + key + "' outside any section in " +
                        path.string());
    }
    apply_config_entry(config, section + "." + key, value);
  }
}

std::string render_config(const CliConfig& config) {
  std::ostringstream out;
  char buf[64];
  out << "[general]\n";
  out << "seed = " << config.seed << "\n";
  out << "verbose = " << (config.verbose ? "true" : "false") << "\n";
  out << "\n[toy]\n";
  out << "classes = " << config.toy.num_classes << "\n";
  out << "source_per_class = " << config.toy.samples_per_class_source << "\n";
  out << "target_per_class = " << config.toy.samples_per_class_target << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.toy.shift_rotation_deg);
  out << "shift_deg = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.toy.noise_sigma);
  out << "noise_sigma = " << buf << "\n";
  out << "blur_width = " << config.toy.blur_kernel_width << "\n";
  out << "labels_per_class = " << config.toy.k_labels_per_class << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.toy.test_fraction);
  out << "test_fraction = " << buf << "\n";
  out << "virtual_view_angles = "
      << render_list(config.toy.virtual_view_angles_deg) << "\n";
  out << "\n[net]\n";
  out << "feature = " << render_dims(config.net.feature_dims) << "\n";
  out << "classifier_hidden = " << render_dims(config.net.classifier_hidden)
      << "\n";
  out << "discriminator_hidden = "
      << render_dims(config.net.discriminator_hidden) << "\n";
  out << "\n[adv]\n";
  out << "lambda_mode = "
      << (config.adv.lambda_mode == LambdaMode::kFixed ? "fixed" : "scheduled")
      << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.adv.lambda_value);
  out << "lambda = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.adv.schedule_gamma);
  out << "gamma = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.adv.lr);
  out << "lr = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.adv.momentum);
  out << "momentum = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.adv.clip_norm);
  out << "clip_norm = " << buf << "\n";
  out << "batch = " << config.adv.batch_size << "\n";
  out << "epochs = " << config.adv.epochs << "\n";
  out << "update_rule = "
      << (config.adv.update_rule == UpdateRule::kSinglePass ? "single-pass"
                                                            : "alternating")
      << "\n";
  out << "semi_domain_loss = "
      << (config.adv.semi_keep_target_domain_loss ? "true" : "false") << "\n";
  out << "\n[synth]\n";
  std::snprintf(buf, sizeof(buf), "%g", config.synth.fit_threshold_px);
  out << "fit_threshold = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.synth.bounds_margin);
  out << "margin = " << buf << "\n";
  out << "poses = " << render_poses(config.synth.poses) << "\n";
  return out.str();
}

void echo_config(const CliConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "effective_config.ini");
  if (!out) {
    throw ConfigError("echo_config: cannot write into " + dir.string());
  }
  out << render_config(config);
}

}  // namespace gradrev
