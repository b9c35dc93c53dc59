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

#include "gradrev/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "gradrev/config.hpp"
#include "gradrev/errors.hpp"

namespace gradrev {

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool verbose = false;
  std::vector<std::string> set_entries;  // raw "section.key=value" overrides
};

void add_common(CLI::App* cmd, CommonArgs& common, bool out_required) {
  cmd->add_option("--config", common.config_path,
                  "Config file (sectioned key = value)");
  cmd->add_option("--seed", common.seed, "Seed for every random choice");
  auto* out =
      cmd->add_option("--out", common.out_dir, "Output directory for reports");
  if (out_required) out->required();
  cmd->add_flag("--verbose", common.verbose, "Also dump per-step loss logs");
  cmd->add_option("--set", common.set_entries,
                  "Override any config key, e.g. --set adv.lr=0.05");
}

CliConfig merge_config(const CommonArgs& common) {
  CliConfig config;
  if (!common.config_path.empty()) {
    apply_config_file(config, common.config_path);
  }
  for (const std::string& entry : common.set_entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + entry + "'");
    }
    apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (common.seed.has_value()) config.seed = *common.seed;
  if (common.verbose) config.verbose = true;
  config.toy.seed = config.seed;
  return config;
}

SplitBundle load_training_data(const fs::path& data_dir,
                               const CliConfig& config) {
  if (fs::exists(data_dir / "samples.csv")) {
    return read_split_bundle(data_dir);
  }
  if (fs::exists(data_dir / "source") || fs::exists(data_dir / "target")) {
    return build_splits(load_image_dataset(data_dir),
                        config.toy.k_labels_per_class,
                        config.toy.test_fraction, config.seed);
  }
  throw ConfigError("no dataset at " + data_dir.string() +
                    " (expected samples.csv or source/, target/ image dirs)");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("--seeds names no seeds");
  return seeds;
}

int cmd_gen_data(const CommonArgs& common, std::ostream& out) {
  CliConfig config = merge_config(common);
  const SplitBundle bundle = gen_two_domain_toy(config.toy);
  write_split_bundle(bundle, common.out_dir);
  echo_config(config, common.out_dir);
  out << "gen-data: seed " << config.seed << ", |S|=" << bundle.S.size()
      << " |S_v|=" << bundle.S_v.size() << " |T|=" << bundle.T.size()
      << " |T_l|=" << bundle.T_l.size() << " |test|=" << bundle.test.size()
      << "\n";
  return 0;
}

int cmd_synth(const CommonArgs& common, const std::string& gallery,
              const std::string& landmarks_csv, const std::string& model_path,
              std::ostream& out, std::ostream& err) {
  CliConfig config = merge_config(common);
  const LandmarkModel3D model = model_path.empty()
                                    ? default_landmark_model()
                                    : load_landmark_model(model_path);
  const auto landmark_rows = read_landmark_csv(landmarks_csv);

  std::vector<fs::path> images;
  for (const auto& entry : fs::recursive_directory_iterator(gallery)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      images.push_back(entry.path());
    }
  }
  std::sort(images.begin(), images.end());

  fs::create_directories(common.out_dir);
  std::map<std::string, LandmarkSet2D> out_landmarks;
  std::size_t warnings = 0;
  std::size_t errors = 0;
  std::size_t written = 0;

  for (const fs::path& image_path : images) {
    const std::string rel = fs::relative(image_path, gallery).string();
    const auto row = landmark_rows.find(rel);
    if (row == landmark_rows.end()) {
      err << "synth: no landmark row for " << rel << "\n";
      ++errors;
      continue;
    }
    try {
      const GrayImage image = read_pgm(image_path);
      SynthesisReport report;
      const std::vector<SynthesizedView> views =
          synthesize_views(image, row->second, model, config.synth, &report);
      warnings += report.skipped.size();
      for (const std::string& skip : report.skipped) {
        err << "synth: " << rel << ": " << skip << "\n";
      }
      const fs::path rel_dir = fs::path(rel).parent_path();
      fs::create_directories(fs::path(common.out_dir) / rel_dir);
      for (const SynthesizedView& view : views) {
        const std::string name =
            view_name(fs::path(rel).stem().string(), view.pose) + ".pgm";
        const fs::path out_path = fs::path(common.out_dir) / rel_dir / name;
        write_pgm(view.image, out_path);
        out_landmarks[(rel_dir / name).string()] = view.landmarks;
        ++written;
      }
    } catch (const FitError& e) {
      err << "synth: skipping " << rel << ": " << e.what() << "\n";
      ++warnings;
    } catch (const IngestionError& e) {
      err << "synth: " << e.what() << "\n";
      ++errors;
    }
  }

  write_landmark_csv(out_landmarks, fs::path(common.out_dir) / "landmarks.csv");
  echo_config(config, common.out_dir);
  out << "synth: wrote " << written << " views, " << warnings << " warnings, "
      << errors << " errors\n";
  return errors > 0 ? 1 : 0;
}

int cmd_train(const CommonArgs& common, const std::string& data_dir,
              const std::string& mode_str, std::ostream& out) {
  CliConfig config = merge_config(common);
  const ExperimentMode mode = parse_mode(mode_str);
  const SplitBundle bundle = load_training_data(data_dir, config);
  const ExperimentReport report =
      run_experiment(mode, bundle, config.net, config.adv, config.seed);

  fs::create_directories(common.out_dir);
  write_report_csv({report}, fs::path(common.out_dir) / "report.csv");
  save_bundle_params(report.trained, fs::path(common.out_dir) / "model.txt");
  if (config.verbose) {
    write_loss_jsonl(report, fs::path(common.out_dir) / "losses.jsonl");
  }
  echo_config(config, common.out_dir);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "train: mode %s seed %llu accuracy %.4f domain_confusion %.4f\n",
                mode_name(mode).c_str(),
                static_cast<unsigned long long>(config.seed),
                report.target_test_accuracy, report.domain_confusion);
  out << buf;
  return 0;
}

int cmd_matrix(const CommonArgs& common, const std::string& data_dir,
               const std::string& seeds_str, std::ostream& out) {
  CliConfig config = merge_config(common);
  const std::vector<std::uint64_t> seeds =
      seeds_str.empty() ? std::vector<std::uint64_t>{config.seed}
                        : parse_seed_list(seeds_str);
  const SplitBundle bundle = load_training_data(data_dir, config);
  const MatrixResult result = run_matrix(bundle, config.net, config.adv, seeds);

  fs::create_directories(common.out_dir);
  write_report_csv(result.reports, fs::path(common.out_dir) / "report.csv");
  const std::string table = format_summary_table(result);
  std::ofstream(fs::path(common.out_dir) / "summary.txt") << table;
  if (config.verbose) {
    for (const ExperimentReport& r : result.reports) {
      if (!r.error.empty()) continue;
      write_loss_jsonl(r, fs::path(common.out_dir) /
                              ("losses_" + mode_name(r.mode) + "_" +
                               std::to_string(r.seed) + ".jsonl"));
    }
  }
  echo_config(config, common.out_dir);
  out << table;
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& data_dir,
             const std::string& model_path, std::ostream& out) {
  CliConfig config = merge_config(common);
  const SplitBundle bundle = load_training_data(data_dir, config);
  const NetworkBundle net = load_bundle_params(model_path);
  const double accuracy = evaluate(net, bundle.test);
  if (!common.out_dir.empty()) {
    fs::create_directories(common.out_dir);
    std::ofstream csv(fs::path(common.out_dir) / "eval.csv");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy\n%.17g\n", accuracy);
    csv << buf;
    echo_config(config, common.out_dir);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "eval: accuracy %.4f\n", accuracy);
  out << buf;
  return 0;
}

int cmd_gradcheck(const CommonArgs& common, const std::string& corrupt,
                  double lambda, std::ostream& out) {
  CliConfig config = merge_config(common);
  GrlFault fault = GrlFault::kNone;
  if (corrupt == "grl-sign") {
    fault = GrlFault::kFlipSign;
  } else if (!corrupt.empty()) {
    throw ConfigError("gradcheck: unknown --corrupt value '" + corrupt +
                      "' (expected grl-sign)");
  }

  // Small default bundle: F 8-16-8, C 8-4, D 8-8-2, mixed-domain batch.
  Rng rng(config.seed);
  const NetworkBundle bundle = build_bundle(config.net, 8, 4, rng);
  DenseMatrix inputs(6, 8);
  for (double& v : inputs.data()) v = rng.normal();
  const std::vector<std::size_t> label_rows = {0, 1, 2};
  const std::vector<std::size_t> labels = {0, 1, 3};
  const std::vector<Domain> domains = {Domain::kSource, Domain::kSource,
                                       Domain::kSource, Domain::kTarget,
                                       Domain::kTarget, Domain::kTarget};

  const AdversarialGradCheckResult result = adversarial_grad_check(
      bundle, inputs, label_rows, labels, domains, lambda, 1e-5, fault);

  char buf[96];
  std::snprintf(buf, sizeof(buf), "label-path    max rel err %.3e\n",
                result.label_path_error);
  out << buf;
  std::snprintf(buf, sizeof(buf), "domain-path   max rel err %.3e\n",
                result.domain_path_error);
  out << buf;
  std::snprintf(buf, sizeof(buf), "grl-path      max rel err %.3e\n",
                result.grl_path_error);
  out << buf;

  const bool ok = result.worst() < 1e-4;
  out << (ok ? "gradcheck: PASS\n" : "gradcheck: FAIL\n");
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Domain-adversarial training with virtual pose synthesis"};
  app.require_subcommand(1);

  CommonArgs gen_common, synth_common, train_common, matrix_common,
      eval_common, check_common;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "Generate the two-domain toy dataset and split manifest");
  add_common(gen, gen_common, true);
  std::map<std::string, std::string> gen_keys = {
      {"--classes", "toy.classes"},
      {"--source-per-class", "toy.source_per_class"},
      {"--target-per-class", "toy.target_per_class"},
      {"--shift-deg", "toy.shift_deg"},
      {"--noise-sigma", "toy.noise_sigma"},
      {"--blur-width", "toy.blur_width"},
      {"--labels-per-class", "toy.labels_per_class"},
      {"--test-fraction", "toy.test_fraction"}};
  for (const auto& [flag, key] : gen_keys) {
    const std::string key_copy = key;
    gen->add_option_function<std::string>(
        flag,
        [&gen_common, key_copy](const std::string& v) {
          gen_common.set_entries.push_back(key_copy + "=" + v);
        },
        "Sets " + key);
  }

  CLI::App* synth = app.add_subcommand(
      "synth", "Synthesize posed views for every gallery image");
  std::string gallery, landmarks_csv, model_path, poses_arg;
  add_common(synth, synth_common, true);
  synth->add_option("--gallery", gallery, "Gallery image directory")->required();
  synth->add_option("--landmarks", landmarks_csv, "Landmark CSV")->required();
  synth->add_option("--model3d", model_path,
                    "9-point 3D model file (bundled model when omitted)");
  synth->add_option_function<std::string>(
      "--poses",
      [&synth_common](const std::string& v) {
        synth_common.set_entries.push_back("synth.poses=" + v);
      },
      "Pose grid, e.g. '-30,0,0;30,0,0'");
  synth->add_option_function<std::string>(
      "--fit-threshold",
      [&synth_common](const std::string& v) {
        synth_common.set_entries.push_back("synth.fit_threshold=" + v);
      },
      "Max camera-fit residual in pixels");

  const std::map<std::string, std::string> adv_keys = {
      {"--epochs", "adv.epochs"},         {"--batch", "adv.batch"},
      {"--lr", "adv.lr"},                 {"--momentum", "adv.momentum"},
      {"--lambda-mode", "adv.lambda_mode"}, {"--lambda", "adv.lambda"},
      {"--gamma", "adv.gamma"},           {"--update-rule", "adv.update_rule"}};
  auto add_adv_overrides = [&adv_keys](CLI::App* cmd, CommonArgs& common) {
    for (const auto& [flag, key] : adv_keys) {
      const std::string key_copy = key;
      cmd->add_option_function<std::string>(
          flag,
          [&common, key_copy](const std::string& v) {
            common.set_entries.push_back(key_copy + "=" + v);
          },
          "Sets " + key);
    }
  };

  CLI::App* train =
      app.add_subcommand("train", "Train one experiment mode and report");
  std::string train_data, train_mode, matrix_data, matrix_seeds;
  add_common(train, train_common, true);
  train->add_option("--data", train_data, "Dataset directory")->required();
  train->add_option("--mode", train_mode, "Experiment mode")
      ->required()
      ->check([](const std::string& v) -> std::string {
        try {
          parse_mode(v);
          return {};
        } catch (const ConfigError& e) {
          return e.what();
        }
      });
  add_adv_overrides(train, train_common);

  CLI::App* matrix = app.add_subcommand(
      "matrix", "Run the full mode-by-seed ablation matrix");
  add_common(matrix, matrix_common, true);
  matrix->add_option("--data", matrix_data, "Dataset directory")->required();
  matrix->add_option("--seeds", matrix_seeds, "Comma-separated seed list");
  add_adv_overrides(matrix, matrix_common);

  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  std::string eval_data, eval_model;
  add_common(eval, eval_common, false);
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--model", eval_model, "model.txt from train")->required();

  CLI::App* check = app.add_subcommand(
      "gradcheck", "Finite-difference audit of all gradient paths");
  std::string corrupt;
  double check_lambda = 1.0;
  add_common(check, check_common, false);
  check->add_option("--corrupt", corrupt, "Fault injection: grl-sign");
  check->add_option("--lambda", check_lambda, "Reversal strength to audit");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_common, out);
    if (synth->parsed()) {
      return cmd_synth(synth_common, gallery, landmarks_csv, model_path, out,
                       err);
    }
    if (train->parsed()) {
      return cmd_train(train_common, train_data, train_mode, out);
    }
    if (matrix->parsed()) {
      return cmd_matrix(matrix_common, matrix_data, matrix_seeds, out);
    }
    if (eval->parsed()) return cmd_eval(eval_common, eval_data, eval_model, out);
    if (check->parsed()) {
      return cmd_gradcheck(check_common, corrupt, check_lambda, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gradrev
