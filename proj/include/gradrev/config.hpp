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

#ifndef GRADREV_CONFIG_HPP
#define GRADREV_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "gradrev/adversarial.hpp"
#include "gradrev/dataset.hpp"
#include "gradrev/experiment.hpp"
#include "gradrev/synthesis.hpp"

namespace gradrev {

/// Every run-affecting knob with its documented default. Values merge from
/// a sectioned key = value config file, then command-line overrides; the
/// effective result is echoed into each output directory so a run can be
/// reproduced from its artifacts alone.
struct CliConfig {
  std::uint64_t seed = 1;
  bool verbose = false;
  ToyShiftConfig toy = default_toy();
  NetConfig net;
  AdversarialConfig adv;
  SynthesisConfig synth;

  /// CLI-facing toy defaults keep 3 revealed labels per class so the
  /// semi-supervised rows have a T_l to train on.
  static ToyShiftConfig default_toy() {
    ToyShiftConfig toy;
    toy.k_labels_per_class = 3;
    return toy;
  }
};

/// Parses a sectioned "key = value" file into `config`. Unknown sections or
/// keys and malformed values raise ConfigError naming the offender.
void apply_config_file(CliConfig& config, const std::filesystem::path& path);

/// Applies one "section.key" assignment (the config-file grammar shared by
/// command-line overrides).
void apply_config_entry(CliConfig& config, const std::string& key,
                        const std::string& value);

/// Serializes the effective configuration in config-file form.
std::string render_config(const CliConfig& config);

/// Writes render_config(config) as <dir>/effective_config.ini.
void echo_config(const CliConfig& config, const std::filesystem::path& dir);

}  // namespace gradrev

#endif  // GRADREV_CONFIG_HPP
