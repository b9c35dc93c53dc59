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

#include "gradrev/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "gradrev/errors.hpp"

namespace gradrev {

const std::vector<ExperimentMode>& all_experiment_modes() {
  static const std::vector<ExperimentMode> modes = {
      ExperimentMode::kSourceOnly,  ExperimentMode::kSourceOnlyPlusVirtual,
      ExperimentMode::kDan,         ExperimentMode::kSsppDan,
      ExperimentMode::kSemiDan,     ExperimentMode::kSemiSsppDan,
      ExperimentMode::kTrainOnTarget};
  return modes;
}

std::string mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSourceOnly: return "source-only";
    case ExperimentMode::kSourceOnlyPlusVirtual: return "source-only+virtual";
    case ExperimentMode::kDan: return "dan";
    case ExperimentMode::kSsppDan: return "sspp-dan";
    case ExperimentMode::kSemiDan: return "semi-dan";
    case ExperimentMode::kSemiSsppDan: return "semi-sspp-dan";
    case ExperimentMode::kTrainOnTarget: return "train-on-target";
  }
  return "unknown";
}

ExperimentMode parse_mode(const std::string& name) {
  for (ExperimentMode mode : all_experiment_modes()) {
    if (mode_name(mode) == name) return mode;
  }
  std::string valid;
  for (ExperimentMode mode : all_experiment_modes()) {
    if (!valid.empty()) valid += ", ";
    valid += mode_name(mode);
  }
  throw ConfigError("unknown mode '" + name + "'; valid modes: " + valid);
}

std::string mode_training_set_formula(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSourceOnly: return "S";
    case ExperimentMode::kSourceOnlyPlusVirtual: return "S+S_v";
    case ExperimentMode::kDan: return "S+T";
    case ExperimentMode::kSsppDan: return "S+S_v+T";
    case ExperimentMode::kSemiDan: return "S+T+T_l";
    case ExperimentMode::kSemiSsppDan: return "S+S_v+T+T_l";
    case ExperimentMode::kTrainOnTarget: return "T_l";
  }
  return "";
}

std::optional<double> published_reference_pct(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSourceOnly: return 39.22;
    case ExperimentMode::kSourceOnlyPlusVirtual: return 37.15;
    case ExperimentMode::kDan: return 31.11;
    case ExperimentMode::kSsppDan: return 58.53;
    case ExperimentMode::kSemiDan: return 67.28;
    case ExperimentMode::kSemiSsppDan: return 72.08;
    case ExperimentMode::kTrainOnTarget: return 88.31;
  }
  return std::nullopt;
}

NetworkBundle build_bundle(const NetConfig& net, std::size_t input_dim,
                           std::size_t num_classes, Rng& rng) {
  if (net.feature_dims.empty()) {
    throw ConfigError("build_bundle: feature_dims must name at least one layer");
  }
  std::vector<std::size_t> f_chain = {input_dim};
  f_chain.insert(f_chain.end(), net.feature_dims.begin(), net.feature_dims.end());
  const std::size_t feat = f_chain.back();

  std::vector<std::size_t> c_chain = {feat};
  c_chain.insert(c_chain.end(), net.classifier_hidden.begin(),
                 net.classifier_hidden.end());
  c_chain.push_back(num_classes);

  std::vector<std::size_t> d_chain = {feat};
  d_chain.insert(d_chain.end(), net.discriminator_hidden.begin(),
                 net.discriminator_hidden.end());
  d_chain.push_back(2);

  NetworkBundle bundle;
  bundle.feature_extractor = init_params(make_specs(f_chain), rng);
  bundle.label_classifier = init_params(make_specs(c_chain), rng);
  bundle.domain_discriminator = init_params(make_specs(d_chain), rng);
  bundle.validate();
  return bundle;
}

double evaluate(const NetworkBundle& net, const std::vector<Sample>& test) {
  if (test.empty()) throw ValidationError("evaluate: test set is empty");
  for (const Sample& s : test) {
    if (!s.label.has_value()) {
      throw ValidationError("evaluate: unlabeled sample '" + s.id +
                            "' in test set");
    }
  }
  const std::vector<std::size_t> predictions =
      predict_labels(net, stack_inputs(test));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (predictions[i] == *test[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

namespace {

bool is_adversarial(ExperimentMode mode) {
  return mode == ExperimentMode::kDan || mode == ExperimentMode::kSsppDan ||
         mode == ExperimentMode::kSemiDan ||
         mode == ExperimentMode::kSemiSsppDan;
}

bool uses_virtual(ExperimentMode mode) {
  return mode == ExperimentMode::kSourceOnlyPlusVirtual ||
         mode == ExperimentMode::kSsppDan ||
         mode == ExperimentMode::kSemiSsppDan;
}

bool uses_reveal(ExperimentMode mode) {
  return mode == ExperimentMode::kSemiDan ||
         mode == ExperimentMode::kSemiSsppDan ||
         mode == ExperimentMode::kTrainOnTarget;
}

void require_split(bool present, ExperimentMode mode, const std::string& name) {
  if (!present) {
    throw ConfigError("run_experiment: mode " + mode_name(mode) +
                      " requires the " + name + " set, which is empty");
  }
}

/// Evenly strided subsample of n indices out of `size`.
std::vector<std::size_t> strided_indices(std::size_t size, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i * size / n;
  return idx;
}

std::size_t infer_num_classes(const std::vector<const std::vector<Sample>*>& sets) {
  std::size_t max_label = 0;
  bool any = false;
  for (const auto* set : sets) {
    for (const Sample& s : *set) {
      if (s.label.has_value()) {
        max_label = std::max(max_label, *s.label);
        any = true;
      }
    }
  }
  if (!any) throw ConfigError("run_experiment: no labeled samples anywhere");
  return max_label + 1;
}

}  // namespace

ExperimentReport run_experiment(ExperimentMode mode, const SplitBundle& bundle,
                                const NetConfig& net_config,
                                const AdversarialConfig& adv_config,
                                std::uint64_t seed) {
  // Assemble pools strictly from the mode's training-set formula.
  std::vector<Sample> labeled;
  const bool adversarial = is_adversarial(mode);

  if (mode == ExperimentMode::kTrainOnTarget) {
    require_split(!bundle.T_l.empty(), mode, "T_l");
    labeled = bundle.T_l;
  } else {
    require_split(!bundle.S.empty(), mode, "S");
    labeled = bundle.S;
    if (uses_virtual(mode)) {
      require_split(!bundle.S_v.empty(), mode, "S_v");
      labeled.insert(labeled.end(), bundle.S_v.begin(), bundle.S_v.end());
    }
    if (uses_reveal(mode)) {
      require_split(!bundle.T_l.empty(), mode, "T_l");
      labeled.insert(labeled.end(), bundle.T_l.begin(), bundle.T_l.end());
    }
  }
  if (adversarial) require_split(!bundle.T.empty(), mode, "T");
  require_split(!bundle.test.empty(), mode, "test");

  const std::size_t input_dim = labeled.front().input.size();
  const std::size_t num_classes = infer_num_classes({&labeled, &bundle.test});

  Rng rng(seed);
  ExperimentReport report;
  report.mode = mode;
  report.seed = seed;
  report.epochs = adv_config.epochs;
  report.reference_accuracy_pct = published_reference_pct(mode);
  report.trained = build_bundle(net_config, input_dim, num_classes, rng);

  TrainState state = zero_state(report.trained);

  if (adv_config.batch_size < 2 || adv_config.batch_size % 2 != 0) {
    throw ConfigError("run_experiment: batch_size must be even and >= 2");
  }

  std::vector<std::size_t> labeled_idx(labeled.size());
  for (std::size_t i = 0; i < labeled_idx.size(); ++i) labeled_idx[i] = i;
  std::size_t labeled_cursor = labeled.size();  // forces initial shuffle

  auto next_labeled = [&](std::size_t count) {
    std::vector<Sample> batch;
    batch.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (labeled_cursor >= labeled_idx.size()) {
        rng.shuffle(labeled_idx);
        labeled_cursor = 0;
      }
      batch.push_back(labeled[labeled_idx[labeled_cursor++]]);
    }
    return batch;
  };

  if (adversarial) {
    const std::size_t half = adv_config.batch_size / 2;
    const std::size_t steps_per_epoch =
        (bundle.T.size() + half - 1) / half;
    const std::size_t total_steps = adv_config.epochs * steps_per_epoch;

    std::vector<std::size_t> target_idx(bundle.T.size());
    for (std::size_t i = 0; i < target_idx.size(); ++i) target_idx[i] = i;

    std::size_t global_step = 0;
    for (std::size_t epoch = 0; epoch < adv_config.epochs; ++epoch) {
      rng.shuffle(target_idx);
      std::size_t cursor = 0;
      for (std::size_t step = 0; step < steps_per_epoch; ++step) {
        const std::size_t take = std::min(half, bundle.T.size() - cursor);
        std::vector<Sample> target_batch;
        target_batch.reserve(take);
        for (std::size_t i = 0; i < take; ++i) {
          target_batch.push_back(bundle.T[target_idx[cursor++]]);
        }
        const std::vector<Sample> source_batch = next_labeled(take);
        const double progress =
            total_steps > 1 ? static_cast<double>(global_step) /
                                  static_cast<double>(total_steps - 1)
                            : 1.0;
        report.loss_history.push_back(dan_train_step(
            report.trained, source_batch, target_batch, adv_config, progress,
            state));
        ++global_step;
      }
    }
  } else {
    const std::size_t batch = std::min(adv_config.batch_size, labeled.size());
    const std::size_t steps_per_epoch = (labeled.size() + batch - 1) / batch;
    for (std::size_t epoch = 0; epoch < adv_config.epochs; ++epoch) {
      for (std::size_t step = 0; step < steps_per_epoch; ++step) {
        report.loss_history.push_back(supervised_step(
            report.trained, next_labeled(batch), adv_config, state));
      }
    }
  }

  report.target_test_accuracy = evaluate(report.trained, bundle.test);

  // Domain-confusion diagnostic over balanced source/target inputs, only
  // when the mode's formula spans both domains.
  if (adversarial) {
    std::vector<Sample> source_side;
    for (const Sample& s : labeled) {
      if (s.domain == Domain::kSource) source_side.push_back(s);
    }
    const std::size_t n = std::min(source_side.size(), bundle.T.size());
    if (n > 0) {
      DenseMatrix src_inputs =
          stack_inputs(source_side).gather_rows(strided_indices(source_side.size(), n));
      DenseMatrix tgt_inputs =
          stack_inputs(bundle.T).gather_rows(strided_indices(bundle.T.size(), n));
      report.domain_confusion =
          domain_confusion(report.trained, src_inputs, tgt_inputs);
    }
  }
  return report;
}

namespace {

std::size_t matrix_thread_cap(std::size_t cells) {
  std::size_t cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("GRADREV_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) cap = static_cast<std::size_t>(parsed);
  }
  return std::max<std::size_t>(1, std::min(cap, cells));
}

}  // namespace

MatrixResult run_matrix(const SplitBundle& bundle, const NetConfig& net_config,
                        const AdversarialConfig& adv_config,
                        const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("run_matrix: need at least one seed");

  struct Cell {
    ExperimentMode mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (ExperimentMode mode : all_experiment_modes()) {
    for (std::uint64_t seed : seeds) cells.push_back({mode, seed});
  }

  MatrixResult result;
  result.reports.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      ExperimentReport& report = result.reports[i];
      report.mode = cells[i].mode;
      report.seed = cells[i].seed;
      try {
        report = run_experiment(cells[i].mode, bundle, net_config, adv_config,
                                cells[i].seed);
      } catch (const std::exception& e) {
        report.error = e.what();
        report.reference_accuracy_pct = published_reference_pct(cells[i].mode);
      }
    }
  };

  const std::size_t thread_count = matrix_thread_cap(cells.size());
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (ExperimentMode mode : all_experiment_modes()) {
    ModeSummary summary;
    summary.mode = mode;
    double sum = 0.0, sum_sq = 0.0;
    for (const ExperimentReport& r : result.reports) {
      if (r.mode != mode || !r.error.empty()) continue;
      sum += r.target_test_accuracy;
      sum_sq += r.target_test_accuracy * r.target_test_accuracy;
      ++summary.runs;
    }
    if (summary.runs > 0) {
      const double n = static_cast<double>(summary.runs);
      summary.mean_accuracy = sum / n;
      const double var = std::max(0.0, sum_sq / n - summary.mean_accuracy *
                                                        summary.mean_accuracy);
      summary.stddev_accuracy = std::sqrt(var);
    }
    result.summary.push_back(summary);
  }
  return result;
}

void write_report_csv(const std::vector<ExperimentReport>& reports,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("write_report_csv: cannot open " + path.string());
  out << "mode,seed,accuracy,domain_confusion,reference_" << kReferenceTag
      << "_pct,error\n";
  char buf[64];
  for (const ExperimentReport& r : reports) {
    out << mode_name(r.mode) << "," << r.seed << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.target_test_accuracy);
    out << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.domain_confusion);
    out << buf << ",";
    if (r.reference_accuracy_pct.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.2f", *r.reference_accuracy_pct);
      out << buf;
    }
    out << "," << r.error << "\n";
  }
}

std::string format_summary_table(const MatrixResult& result) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-21s %-13s %-9s %-9s %-5s %s\n", "Model",
                "Training set", "Mean acc", "Std", "Runs",
                "Reference (EK-LFH %)");
  out << line;
  for (const ModeSummary& s : result.summary) {
    const auto ref = published_reference_pct(s.mode);
    std::snprintf(line, sizeof(line), "%-21s %-13s %-9.4f %-9.4f %-5zu %.2f\n",
                  mode_name(s.mode).c_str(),
                  mode_training_set_formula(s.mode).c_str(), s.mean_accuracy,
                  s.stddev_accuracy, s.runs, ref.value_or(0.0));
    out << line;
  }
  return out.str();
}

void write_loss_jsonl(const ExperimentReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("write_loss_jsonl: cannot open " + path.string());
  char buf[256];
  for (std::size_t i = 0; i < report.loss_history.size(); ++i) {
    const LossBreakdown& l = report.loss_history[i];
    std::snprintf(buf, sizeof(buf),
                  "{\"step\":%zu,\"label_loss\":%.17g,\"domain_loss\":%.17g,"
                  "\"combined_fc_objective\":%.17g,\"lambda\":%.17g}\n",
                  i, l.label_loss, l.domain_loss, l.combined_fc_objective,
                  l.lambda_used);
    out << buf;
  }
}

namespace {

void save_params(std::ofstream& out, const char* head,
                 const ParameterSet& params) {
  out << "head " << head << " layers " << params.layers.size() << "\n";
  char buf[40];
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerSpec& spec = params.specs[l];
    out << "layer " << spec.input_dim << " " << spec.output_dim << " "
        << (spec.activation == Activation::kRelu ? "relu" : "linear") << "\n";
    const LayerParams& layer = params.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      std::snprintf(buf, sizeof(buf), i + 1 < layer.weights.size() ? "%.17g " : "%.17g\n",
                    layer.weights.data()[i]);
      out << buf;
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
      std::snprintf(buf, sizeof(buf), i + 1 < layer.biases.size() ? "%.17g " : "%.17g\n",
                    layer.biases[i]);
      out << buf;
    }
  }
}

ParameterSet load_params(std::ifstream& in, const std::string& expect_head) {
  std::string word;
  std::size_t layer_count = 0;
  in >> word;  // "head"
  std::string head;
  in >> head;
  in >> word;  // "layers"
  in >> layer_count;
  if (word != "layers" || head != expect_head || !in) {
    throw IngestionError("load_bundle_params: malformed model file at head '" +
                         head + "'");
  }
  ParameterSet params;
  for (std::size_t l = 0; l < layer_count; ++l) {
    LayerSpec spec;
    std::string activation;
    in >> word >> spec.input_dim >> spec.output_dim >> activation;
    if (word != "layer" || !in) {
      throw IngestionError("load_bundle_params: malformed layer header");
    }
    spec.activation =
        activation == "relu" ? Activation::kRelu : Activation::kLinear;
    LayerParams layer;
    layer.weights = DenseMatrix(spec.input_dim, spec.output_dim);
    for (double& w : layer.weights.data()) in >> w;
    layer.biases.assign(spec.output_dim, 0.0);
    for (double& b : layer.biases) in >> b;
    if (!in) throw IngestionError("load_bundle_params: truncated parameters");
    params.specs.push_back(spec);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

}  // namespace

void save_bundle_params(const NetworkBundle& net,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("save_bundle_params: cannot open " + path.string());
  out << "gradrev-model 1\n";
  save_params(out, "F", net.feature_extractor);
  save_params(out, "C", net.label_classifier);
  save_params(out, "D", net.domain_discriminator);
}

NetworkBundle load_bundle_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("load_bundle_params: cannot open " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "gradrev-model" || version != 1) {
    throw IngestionError("load_bundle_params: not a model file: " + path.string());
  }
  NetworkBundle bundle;
  bundle.feature_extractor = load_params(in, "F");
  bundle.label_classifier = load_params(in, "C");
  bundle.domain_discriminator = load_params(in, "D");
  bundle.validate();
  return bundle;
}

}  // namespace gradrev
