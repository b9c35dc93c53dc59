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

#include "gradrev/adversarial.hpp"

#include <algorithm>
#include <cmath>

#include "gradrev/errors.hpp"

namespace gradrev {

void NetworkBundle::validate() const {
  const std::size_t feat_dim = feature_extractor.output_dim();
  if (label_classifier.input_dim() != feat_dim) {
    throw DimensionError("NetworkBundle: classifier input dim " +
                         std::to_string(label_classifier.input_dim()) +
                         " != feature dim " + std::to_string(feat_dim));
  }
  if (domain_discriminator.input_dim() != feat_dim) {
    throw DimensionError("NetworkBundle: discriminator input dim " +
                         std::to_string(domain_discriminator.input_dim()) +
                         " != feature dim " + std::to_string(feat_dim));
  }
  if (domain_discriminator.output_dim() != 2) {
    throw DimensionError("NetworkBundle: discriminator must emit 2 logits, has " +
                         std::to_string(domain_discriminator.output_dim()));
  }
}

double AdversarialConfig::effective_lambda(double progress) const {
  if (lambda_mode == LambdaMode::kFixed) {
    if (lambda_value < 0.0) {
      throw ValidationError("AdversarialConfig: lambda_value must be >= 0");
    }
    return lambda_value;
  }
  return lambda_schedule(progress, schedule_gamma);
}

TrainState zero_state(const NetworkBundle& bundle) {
  TrainState state;
  state.feature = zero_velocity(bundle.feature_extractor);
  state.classifier = zero_velocity(bundle.label_classifier);
  state.discriminator = zero_velocity(bundle.domain_discriminator);
  return state;
}

DenseMatrix grl_forward(const DenseMatrix& features) { return features; }

DenseMatrix grl_backward(const DenseMatrix& upstream_grad, double lambda) {
  if (lambda < 0.0) throw ValidationError("grl_backward: lambda must be >= 0");
  DenseMatrix out = upstream_grad;
  for (double& v : out.data()) v = -lambda * v;
  return out;
}

double lambda_schedule(double progress, double gamma) {
  if (progress < 0.0 || progress > 1.0) {
    throw ValidationError("lambda_schedule: progress " +
                          std::to_string(progress) + " outside [0, 1]");
  }
  return 2.0 / (1.0 + std::exp(-gamma * progress)) - 1.0;
}

BundleGradients compute_gradients(const NetworkBundle& bundle,
                                  const DenseMatrix& inputs,
                                  const std::vector<std::size_t>& label_rows,
                                  const std::vector<std::size_t>& labels,
                                  const std::vector<std::size_t>& domain_rows,
                                  const std::vector<Domain>& domains,
                                  double lambda, GrlFault fault) {
  bundle.validate();
  if (inputs.rows() == 0) {
    throw ValidationError("compute_gradients: empty batch");
  }
  if (label_rows.empty() || domain_rows.empty()) {
    throw ValidationError("compute_gradients: label and domain row sets must be non-empty");
  }
  if (labels.size() != label_rows.size()) {
    throw ValidationError("compute_gradients: label_rows/labels length mismatch");
  }
  if (domains.size() != inputs.rows()) {
    throw ValidationError("compute_gradients: need one domain tag per row");
  }

  const ForwardTrace trace_f = forward(bundle.feature_extractor, inputs);
  const DenseMatrix& features = trace_f.output();

  // Label head over the labeled rows only.
  const DenseMatrix labeled_features = features.gather_rows(label_rows);
  const ForwardTrace trace_c = forward(bundle.label_classifier, labeled_features);
  const SoftmaxXentResult sx_c = softmax_xent(trace_c.output(), labels);

  // Domain head over the selected rows, behind the reversal layer.
  std::vector<std::size_t> domain_labels(domain_rows.size());
  for (std::size_t i = 0; i < domain_rows.size(); ++i) {
    domain_labels[i] = domains[domain_rows[i]] == Domain::kSource ? 0 : 1;
  }
  const DenseMatrix grl_out = grl_forward(features.gather_rows(domain_rows));
  const ForwardTrace trace_d = forward(bundle.domain_discriminator, grl_out);
  const SoftmaxXentResult sx_d = softmax_xent(trace_d.output(), domain_labels);

  if (!std::isfinite(sx_c.loss) || !std::isfinite(sx_d.loss)) {
    throw TrainingError("compute_gradients: non-finite loss (label " +
                        std::to_string(sx_c.loss) + ", domain " +
                        std::to_string(sx_d.loss) + ")");
  }

  BundleGradients out;
  out.breakdown.label_loss = sx_c.loss;
  out.breakdown.domain_loss = sx_d.loss;
  out.breakdown.lambda_used = lambda;
  out.breakdown.combined_fc_objective = sx_c.loss - lambda * sx_d.loss;

  const BackwardResult bw_c =
      backward(bundle.label_classifier, trace_c, sx_c.logit_grad);
  const BackwardResult bw_d =
      backward(bundle.domain_discriminator, trace_d, sx_d.logit_grad);
  out.classifier = bw_c.param_grads;
  out.discriminator = bw_d.param_grads;

  // Extractor gradient, label path: backprop through the rows that fed C.
  const ForwardTrace labeled_trace_f = trace_f.gather_rows(label_rows);
  const BackwardResult bw_f_label =
      backward(bundle.feature_extractor, labeled_trace_f, bw_c.input_grad);
  out.feature = bw_f_label.param_grads;

  // Extractor gradient, domain path: reversed and scaled by lambda. Skipped
  // entirely at lambda == 0 so the decoupled case stays bit-identical to a
  // plain supervised step.
  if (lambda != 0.0) {
    DenseMatrix reversed = grl_backward(bw_d.input_grad, lambda);
    if (fault == GrlFault::kFlipSign) scale_in_place(reversed, -1.0);
    const ForwardTrace domain_trace_f = trace_f.gather_rows(domain_rows);
    const BackwardResult bw_f_domain =
        backward(bundle.feature_extractor, domain_trace_f, reversed);
    accumulate(out.feature, bw_f_domain.param_grads);
  }
  return out;
}

namespace {

struct AssembledBatch {
  DenseMatrix inputs;
  std::vector<std::size_t> label_rows;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> domain_rows;
  std::vector<Domain> domains;
};

AssembledBatch assemble(const std::vector<Sample>& first,
                        const std::vector<Sample>& second,
                        bool keep_labeled_target_domain_loss) {
  std::vector<Sample> all;
  all.reserve(first.size() + second.size());
  all.insert(all.end(), first.begin(), first.end());
  all.insert(all.end(), second.begin(), second.end());

  AssembledBatch batch;
  batch.inputs = stack_inputs(all);
  batch.domains.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    batch.domains.push_back(all[i].domain);
    const bool labeled = all[i].label.has_value();
    if (labeled) {
      batch.label_rows.push_back(i);
      batch.labels.push_back(*all[i].label);
    } else if (i < first.size()) {
      throw ValidationError("dan_train_step: unlabeled sample '" + all[i].id +
                            "' in the labeled half of the batch");
    }
    // Revealed target samples can optionally be withheld from the domain
    // term; everything else always contributes.
    const bool revealed_target = labeled && all[i].domain == Domain::kTarget;
    if (!revealed_target || keep_labeled_target_domain_loss) {
      batch.domain_rows.push_back(i);
    }
  }
  return batch;
}

}  // namespace

LossBreakdown dan_train_step(NetworkBundle& bundle,
                             const std::vector<Sample>& source_batch,
                             const std::vector<Sample>& target_batch,
                             const AdversarialConfig& config, double progress,
                             TrainState& state) {
  if (source_batch.empty() || target_batch.empty()) {
    throw ValidationError("dan_train_step: empty batch");
  }
  const double lambda = config.effective_lambda(progress);
  const AssembledBatch batch = assemble(source_batch, target_batch,
                                        config.semi_keep_target_domain_loss);

  if (config.update_rule == UpdateRule::kAlternating) {
    // Two-phase reading: first move D on the domain loss, then move F and C
    // against the updated discriminator.
    BundleGradients phase1 =
        compute_gradients(bundle, batch.inputs, batch.label_rows, batch.labels,
                          batch.domain_rows, batch.domains, lambda);
    clip_gradients(phase1.discriminator, config.clip_norm);
    sgd_step(bundle.domain_discriminator, phase1.discriminator, config.lr,
             config.momentum, state.discriminator, "dan_train_step[D]");
    BundleGradients phase2 =
        compute_gradients(bundle, batch.inputs, batch.label_rows, batch.labels,
                          batch.domain_rows, batch.domains, lambda);
    clip_gradients(phase2.classifier, config.clip_norm);
    clip_gradients(phase2.feature, config.clip_norm);
    sgd_step(bundle.label_classifier, phase2.classifier, config.lr,
             config.momentum, state.classifier, "dan_train_step[C]");
    sgd_step(bundle.feature_extractor, phase2.feature, config.lr,
             config.momentum, state.feature, "dan_train_step[F]");
    return phase2.breakdown;
  }

  BundleGradients grads =
      compute_gradients(bundle, batch.inputs, batch.label_rows, batch.labels,
                        batch.domain_rows, batch.domains, lambda);
  clip_gradients(grads.discriminator, config.clip_norm);
  clip_gradients(grads.classifier, config.clip_norm);
  clip_gradients(grads.feature, config.clip_norm);
  sgd_step(bundle.domain_discriminator, grads.discriminator, config.lr,
           config.momentum, state.discriminator, "dan_train_step[D]");
  sgd_step(bundle.label_classifier, grads.classifier, config.lr,
           config.momentum, state.classifier, "dan_train_step[C]");
  sgd_step(bundle.feature_extractor, grads.feature, config.lr, config.momentum,
           state.feature, "dan_train_step[F]");
  return grads.breakdown;
}

LossBreakdown supervised_step(NetworkBundle& bundle,
                              const std::vector<Sample>& batch,
                              const AdversarialConfig& config,
                              TrainState& state) {
  if (batch.empty()) throw ValidationError("supervised_step: empty batch");

  std::vector<std::size_t> labels;
  labels.reserve(batch.size());
  for (const Sample& s : batch) {
    if (!s.label.has_value()) {
      throw ValidationError("supervised_step: unlabeled sample '" + s.id + "'");
    }
    labels.push_back(*s.label);
  }

  const DenseMatrix inputs = stack_inputs(batch);
  const ForwardTrace trace_f = forward(bundle.feature_extractor, inputs);
  const ForwardTrace trace_c =
      forward(bundle.label_classifier, trace_f.output());
  const SoftmaxXentResult sx = softmax_xent(trace_c.output(), labels);
  if (!std::isfinite(sx.loss)) {
    throw TrainingError("supervised_step: non-finite label loss");
  }

  BackwardResult bw_c =
      backward(bundle.label_classifier, trace_c, sx.logit_grad);
  BackwardResult bw_f =
      backward(bundle.feature_extractor, trace_f, bw_c.input_grad);

  clip_gradients(bw_c.param_grads, config.clip_norm);
  clip_gradients(bw_f.param_grads, config.clip_norm);
  sgd_step(bundle.label_classifier, bw_c.param_grads, config.lr,
           config.momentum, state.classifier, "supervised_step[C]");
  sgd_step(bundle.feature_extractor, bw_f.param_grads, config.lr,
           config.momentum, state.feature, "supervised_step[F]");

  LossBreakdown breakdown;
  breakdown.label_loss = sx.loss;
  breakdown.domain_loss = 0.0;
  breakdown.lambda_used = 0.0;
  breakdown.combined_fc_objective = sx.loss;
  return breakdown;
}

std::vector<std::size_t> predict_labels(const NetworkBundle& bundle,
                                        const DenseMatrix& inputs) {
  bundle.validate();
  const ForwardTrace trace_f = forward(bundle.feature_extractor, inputs);
  const ForwardTrace trace_c =
      forward(bundle.label_classifier, trace_f.output());
  const DenseMatrix& logits = trace_c.output();
  std::vector<std::size_t> predictions(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.row_ptr(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (row[j] > row[best]) best = j;
    }
    predictions[i] = best;
  }
  return predictions;
}

namespace {

std::size_t count_domain_hits(const NetworkBundle& bundle,
                              const DenseMatrix& inputs, std::size_t expected) {
  const ForwardTrace trace_f = forward(bundle.feature_extractor, inputs);
  const ForwardTrace trace_d =
      forward(bundle.domain_discriminator, grl_forward(trace_f.output()));
  const DenseMatrix& logits = trace_d.output();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const std::size_t pred = logits.at(i, 1) > logits.at(i, 0) ? 1 : 0;
    if (pred == expected) ++hits;
  }
  return hits;
}

}  // namespace

double domain_confusion(const NetworkBundle& bundle,
                        const DenseMatrix& source_inputs,
                        const DenseMatrix& target_inputs) {
  if (source_inputs.rows() == 0 || target_inputs.rows() == 0) {
    throw ValidationError("domain_confusion: both input sets must be non-empty");
  }
  const std::size_t hits = count_domain_hits(bundle, source_inputs, 0) +
                           count_domain_hits(bundle, target_inputs, 1);
  return static_cast<double>(hits) /
         static_cast<double>(source_inputs.rows() + target_inputs.rows());
}

double AdversarialGradCheckResult::worst() const {
  return std::max({label_path_error, domain_path_error, grl_path_error});
}

AdversarialGradCheckResult adversarial_grad_check(
    const NetworkBundle& bundle, const DenseMatrix& inputs,
    const std::vector<std::size_t>& label_rows,
    const std::vector<std::size_t>& labels, const std::vector<Domain>& domains,
    double lambda, double step, GrlFault fault) {
  std::vector<std::size_t> all_rows(inputs.rows());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const BundleGradients analytic = compute_gradients(
      bundle, inputs, label_rows, labels, all_rows, domains, lambda, fault);

  std::vector<std::size_t> domain_labels(domains.size());
  for (std::size_t i = 0; i < domains.size(); ++i) {
    domain_labels[i] = domains[i] == Domain::kSource ? 0 : 1;
  }

  // Loss terms recomputed from scratch for the finite-difference probes.
  auto label_loss_of = [&](const NetworkBundle& b) {
    const ForwardTrace tf = forward(b.feature_extractor, inputs);
    const ForwardTrace tc =
        forward(b.label_classifier, tf.output().gather_rows(label_rows));
    return softmax_xent(tc.output(), labels).loss;
  };
  auto domain_loss_of = [&](const NetworkBundle& b) {
    const ForwardTrace tf = forward(b.feature_extractor, inputs);
    const ForwardTrace td =
        forward(b.domain_discriminator, grl_forward(tf.output()));
    return softmax_xent(td.output(), domain_labels).loss;
  };

  NetworkBundle probe = bundle;
  AdversarialGradCheckResult result;

  auto sweep = [&](ParameterSet& target_params, const ParameterSet& grads,
                   auto objective, double& worst) {
    for (std::size_t l = 0; l < target_params.layers.size(); ++l) {
      auto probe_slot = [&](double& slot, double analytic_grad) {
        const double saved = slot;
        slot = saved + step;
        const double up = objective();
        slot = saved - step;
        const double down = objective();
        slot = saved;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, relative_error(analytic_grad, numeric));
      };
      for (std::size_t i = 0; i < target_params.layers[l].weights.size(); ++i) {
        probe_slot(target_params.layers[l].weights.data()[i],
                   grads.layers[l].weights.data()[i]);
      }
      for (std::size_t i = 0; i < target_params.layers[l].biases.size(); ++i) {
        probe_slot(target_params.layers[l].biases[i], grads.layers[l].biases[i]);
      }
    }
  };

  // theta_C against d(L_C): the classifier never sees the domain term.
  sweep(probe.label_classifier, analytic.classifier,
        [&] { return label_loss_of(probe); }, result.label_path_error);

  // theta_D against d(L_C + L_D): the label term is constant in theta_D,
  // so its finite difference contributes exactly zero.
  sweep(probe.domain_discriminator, analytic.discriminator,
        [&] { return label_loss_of(probe) + domain_loss_of(probe); },
        result.domain_path_error);

  // theta_F against d(L_C - lambda*L_D): the reversed flow.
  sweep(probe.feature_extractor, analytic.feature,
        [&] { return label_loss_of(probe) - lambda * domain_loss_of(probe); },
        result.grl_path_error);

  return result;
}

}  // namespace gradrev
