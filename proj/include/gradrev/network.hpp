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

#ifndef GRADREV_NETWORK_HPP
#define GRADREV_NETWORK_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gradrev/matrix.hpp"
#include "gradrev/rng.hpp"

namespace gradrev {

enum class Activation { kRelu, kLinear };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kLinear;
};

/// One fully connected layer: y = act(x W + b). W is input_dim x output_dim.
struct LayerParams {
  DenseMatrix weights;
  std::vector<double> biases;
};

/// Parameters of a feed-forward stack, one entry per LayerSpec.
struct ParameterSet {
  std::vector<LayerSpec> specs;
  std::vector<LayerParams> layers;

  std::size_t input_dim() const { return specs.front().input_dim; }
  std::size_t output_dim() const { return specs.back().output_dim; }
  std::size_t parameter_count() const;

  /// Zero-filled gradients/velocity mirror with identical shapes.
  ParameterSet zeros_like() const;
  bool same_shape(const ParameterSet& other) const;
  bool bit_equal(const ParameterSet& other) const;
};

/// Stack builder from a dim chain, e.g. {8, 16, 8}: relu on hidden layers,
/// linear on the last.
std::vector<LayerSpec> make_specs(const std::vector<std::size_t>& dims);

/// Seeded init: He-uniform for relu layers, Xavier-uniform for linear ones.
ParameterSet init_params(const std::vector<LayerSpec>& specs, Rng& rng);

/// Per-layer pre-activations and activations retained for backward.
struct ForwardTrace {
  DenseMatrix input;
  std::vector<DenseMatrix> pre_activations;
  std::vector<DenseMatrix> activations;

  std::size_t depth() const { return pre_activations.size(); }
  const DenseMatrix& output() const { return activations.back(); }
  /// Trace restricted to a subset of batch rows, in the given order.
  ForwardTrace gather_rows(const std::vector<std::size_t>& idx) const;
};

/// Batch forward pass; rows are samples.
ForwardTrace forward(const ParameterSet& params, const DenseMatrix& input);

struct BackwardResult {
  ParameterSet param_grads;  // same shapes as the parameters
  DenseMatrix input_grad;    // d(loss)/d(input), same shape as trace.input
};

/// Exact analytic backpropagation of `output_grad` through the trace.
BackwardResult backward(const ParameterSet& params, const ForwardTrace& trace,
                        const DenseMatrix& output_grad);

struct SoftmaxXentResult {
  double loss = 0.0;        // mean over the batch
  DenseMatrix logit_grad;   // d(loss)/d(logits)
  DenseMatrix probabilities;
};

/// Mean softmax cross-entropy over the batch, log-sum-exp stabilized.
SoftmaxXentResult softmax_xent(const DenseMatrix& logits,
                               const std::vector<std::size_t>& labels);

/// Momentum buffers matching a ParameterSet.
struct Velocity {
  std::vector<LayerParams> layers;
};

Velocity zero_velocity(const ParameterSet& params);

/// v <- momentum*v - lr*g; theta <- theta + v. Throws TrainingError naming
/// the first layer whose gradient is non-finite.
void sgd_step(ParameterSet& params, const ParameterSet& grads, double lr,
              double momentum, Velocity& velocity,
              const std::string& context = "sgd_step");

void accumulate(ParameterSet& into, const ParameterSet& grads);
void scale_grads(ParameterSet& grads, double s);

/// Scales the whole gradient set down to L2 norm `max_norm` when it is
/// larger. max_norm <= 0 disables clipping. Applied at update time only, so
/// raw gradients stay exact for the finite-difference checkers.
void clip_gradients(ParameterSet& grads, double max_norm);

/// Test-only fault injection hooks for the gradient checker.
enum class GradCheckFault { kNone, kFlipSign };

/// Max over all parameters of the relative error between analytic gradients
/// and central finite differences of the softmax cross-entropy loss.
double grad_check(const ParameterSet& params, const DenseMatrix& input,
                  const std::vector<std::size_t>& labels,
                  double step = 1e-5,
                  GradCheckFault fault = GradCheckFault::kNone);

/// |a - n| / max(|a|, |n|, 1e-8), the comparison used by all checkers here.
double relative_error(double analytic, double numeric);

}  // namespace gradrev

#endif  // GRADREV_NETWORK_HPP
