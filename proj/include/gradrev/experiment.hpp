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

#ifndef GRADREV_EXPERIMENT_HPP
#define GRADREV_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradrev/adversarial.hpp"
#include "gradrev/dataset.hpp"

namespace gradrev {

/// Ablation rows, in report order. Each mode trains on exactly the sets its
/// formula names:
///   SourceOnly            S
///   SourceOnlyPlusVirtual S + S_v
///   DAN                   S + T
///   SSPP_DAN              S + S_v + T
///   SemiDAN               S + T + T_l
///   SemiSSPP_DAN          S + S_v + T + T_l
///   TrainOnTarget         T_l
enum class ExperimentMode {
  kSourceOnly,
  kSourceOnlyPlusVirtual,
  kDan,
  kSsppDan,
  kSemiDan,
  kSemiSsppDan,
  kTrainOnTarget,
};

inline constexpr std::size_t kExperimentModeCount = 7;

const std::vector<ExperimentMode>& all_experiment_modes();
std::string mode_name(ExperimentMode mode);
ExperimentMode parse_mode(const std::string& name);
std::string mode_training_set_formula(ExperimentMode mode);

/// Published EK-LFH recognition rate (percent) for the corresponding model
/// row, attached to reports as a non-reproducible reference.
std::optional<double> published_reference_pct(ExperimentMode mode);
inline constexpr const char* kReferenceTag = "EK-LFH";

/// Head layouts. Hidden chains only; the data supplies the input dim and
/// class count, and the discriminator always ends in 2 logits.
struct NetConfig {
  std::vector<std::size_t> feature_dims = {16, 8};  // last = feature width
  std::vector<std::size_t> classifier_hidden = {};
  std::vector<std::size_t> discriminator_hidden = {8};
};

NetworkBundle build_bundle(const NetConfig& net, std::size_t input_dim,
                           std::size_t num_classes, Rng& rng);

struct ExperimentReport {
  ExperimentMode mode = ExperimentMode::kSourceOnly;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double target_test_accuracy = 0.0;
  double domain_confusion = 0.0;
  std::vector<LossBreakdown> loss_history;
  std::optional<double> reference_accuracy_pct;
  std::string error;  // non-empty when a matrix cell failed

  NetworkBundle trained;
};

/// Trains one ablation row on its split formula and evaluates on
/// bundle.test. Adversarial loss is active only in the DAN-family modes;
/// elsewhere the discriminator is left untouched. Throws ConfigError naming
/// the first split the mode requires but the bundle lacks.
ExperimentReport run_experiment(ExperimentMode mode, const SplitBundle& bundle,
                                const NetConfig& net_config,
                                const AdversarialConfig& adv_config,
                                std::uint64_t seed);

/// Fraction of test samples whose argmax prediction matches the true label.
double evaluate(const NetworkBundle& net, const std::vector<Sample>& test);

struct ModeSummary {
  ExperimentMode mode = ExperimentMode::kSourceOnly;
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;
  std::size_t runs = 0;
};

struct MatrixResult {
  std::vector<ExperimentReport> reports;  // mode-major, seed-minor
  std::vector<ModeSummary> summary;       // one row per mode, report order
};

/// Runs every (mode, seed) cell; a failing cell records its error and the
/// matrix continues. Cells fan out over worker threads, capped by the
/// GRADREV_THREADS environment variable when set.
MatrixResult run_matrix(const SplitBundle& bundle, const NetConfig& net_config,
                        const AdversarialConfig& adv_config,
                        const std::vector<std::uint64_t>& seeds);

/// report.csv rows: mode,seed,accuracy,domain_confusion,reference_pct.
void write_report_csv(const std::vector<ExperimentReport>& reports,
                      const std::filesystem::path& path);
/// Aligned text table mirroring the ablation layout.
std::string format_summary_table(const MatrixResult& result);
/// JSON-lines dump of per-step loss breakdowns.
void write_loss_jsonl(const ExperimentReport& report,
                      const std::filesystem::path& path);

void save_bundle_params(const NetworkBundle& net,
                        const std::filesystem::path& path);
NetworkBundle load_bundle_params(const std::filesystem::path& path);

}  // namespace gradrev

#endif  // GRADREV_EXPERIMENT_HPP
