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

#ifndef GRADREV_ADVERSARIAL_HPP
#define GRADREV_ADVERSARIAL_HPP

#include <cstddef>
#include <vector>

#include "gradrev/matrix.hpp"
#include "gradrev/network.hpp"
#include "gradrev/sample.hpp"

namespace gradrev {

// Three-headed network: a feature extractor feeding a label classifier and,
// through the gradient reversal layer, a domain discriminator. The
// discriminator is trained to tell source from target while the reversed
// gradient pushes the extractor toward features it cannot tell apart.

struct NetworkBundle {
  ParameterSet feature_extractor;     // F
  ParameterSet label_classifier;      // C
  ParameterSet domain_discriminator;  // D

  /// Head input dims must equal the extractor output dim; the discriminator
  /// must end in exactly 2 logits (source vs target).
  void validate() const;
};

enum class LambdaMode { kFixed, kScheduled };
enum class UpdateRule { kSinglePass, kAlternating };

struct AdversarialConfig {
  LambdaMode lambda_mode = LambdaMode::kScheduled;
  double lambda_value = 1.0;    // used in fixed mode
  double schedule_gamma = 10.0;
  double lr = 0.01;
  double momentum = 0.9;
  double clip_norm = 5.0;  // per-head gradient L2 cap; <= 0 disables
  std::size_t batch_size = 32;  // even: half source, half target
  std::size_t epochs = 100;
  UpdateRule update_rule = UpdateRule::kSinglePass;
  // Labeled target samples keep contributing to the domain term as targets.
  bool semi_keep_target_domain_loss = true;

  double effective_lambda(double progress) const;
};

struct LossBreakdown {
  double label_loss = 0.0;
  double domain_loss = 0.0;
  double combined_fc_objective = 0.0;  // label_loss - lambda_used*domain_loss
  double lambda_used = 0.0;
};

/// Momentum state for the three heads, carried across steps.
struct TrainState {
  Velocity feature;
  Velocity classifier;
  Velocity discriminator;
};

TrainState zero_state(const NetworkBundle& bundle);

/// Identity in the forward direction, bit for bit.
DenseMatrix grl_forward(const DenseMatrix& features);

/// -lambda * upstream_grad, elementwise. lambda must be >= 0.
DenseMatrix grl_backward(const DenseMatrix& upstream_grad, double lambda);

/// 2/(1+exp(-gamma*p)) - 1: ramps lambda from 0 toward 1 as training
/// progresses, so the discriminator sees easy gradients early on.
double lambda_schedule(double progress, double gamma);

/// Gradients of the two objectives in one backward pass: the discriminator
/// minimizes the domain loss, the extractor and classifier minimize
/// label_loss - lambda*domain_loss (the reversal supplies the minus).
struct BundleGradients {
  ParameterSet feature;
  ParameterSet classifier;
  ParameterSet discriminator;
  LossBreakdown breakdown;
};

enum class GrlFault { kNone, kFlipSign };

/// Core gradient computation over an assembled batch. `label_rows` selects
/// the rows that enter the label loss (they must carry `labels`, in the same
/// order); `domains` tags every row, and `domain_rows` selects which rows
/// enter the domain loss (normally all of them).
BundleGradients compute_gradients(const NetworkBundle& bundle,
                                  const DenseMatrix& inputs,
                                  const std::vector<std::size_t>& label_rows,
                                  const std::vector<std::size_t>& labels,
                                  const std::vector<std::size_t>& domain_rows,
                                  const std::vector<Domain>& domains,
                                  double lambda,
                                  GrlFault fault = GrlFault::kNone);

/// One adversarial step over half-source/half-target batches. Source samples
/// must be labeled; labeled samples in `target_batch` join the label loss
/// (the semi-supervised reveal). Updates the bundle in place.
LossBreakdown dan_train_step(NetworkBundle& bundle,
                             const std::vector<Sample>& source_batch,
                             const std::vector<Sample>& target_batch,
                             const AdversarialConfig& config, double progress,
                             TrainState& state);

/// Supervised step on a labeled batch: F and C move, D is untouched.
LossBreakdown supervised_step(NetworkBundle& bundle,
                              const std::vector<Sample>& batch,
                              const AdversarialConfig& config,
                              TrainState& state);

/// argmax over C(F(x)) per row.
std::vector<std::size_t> predict_labels(const NetworkBundle& bundle,
                                        const DenseMatrix& inputs);

/// Accuracy of the discriminator over the union of both sets, scored
/// against the true domain tags. Near 0.5 means domain-invariant features.
double domain_confusion(const NetworkBundle& bundle,
                        const DenseMatrix& source_inputs,
                        const DenseMatrix& target_inputs);

/// Finite-difference audit of all three gradient flows.
struct AdversarialGradCheckResult {
  double label_path_error = 0.0;   // d(L_C)/d(theta_C) and the C-side of F
  double domain_path_error = 0.0;  // d(L_C + L_D)/d(theta_D)
  double grl_path_error = 0.0;     // d(L_C - lambda*L_D)/d(theta_F)
  double worst() const;
};

/// Audits the full-batch configuration: every row enters the domain loss.
AdversarialGradCheckResult adversarial_grad_check(
    const NetworkBundle& bundle, const DenseMatrix& inputs,
    const std::vector<std::size_t>& label_rows,
    const std::vector<std::size_t>& labels, const std::vector<Domain>& domains,
    double lambda, double step = 1e-5, GrlFault fault = GrlFault::kNone);

}  // namespace gradrev

#endif  // GRADREV_ADVERSARIAL_HPP
