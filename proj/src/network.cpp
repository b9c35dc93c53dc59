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

#include "gradrev/network.hpp"

#include <algorithm>
#include <cmath>

#include "gradrev/errors.hpp"

namespace gradrev {

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += layer.weights.size() + layer.biases.size();
  }
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.specs = specs;
  out.layers.reserve(layers.size());
  for (const auto& layer : layers) {
    LayerParams z;
    z.weights = DenseMatrix(layer.weights.rows(), layer.weights.cols());
    z.biases.assign(layer.biases.size(), 0.0);
    out.layers.push_back(std::move(z));
  }
  return out;
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!layers[l].weights.same_shape(other.layers[l].weights)) return false;
    if (layers[l].biases.size() != other.layers[l].biases.size()) return false;
  }
  return true;
}

bool ParameterSet::bit_equal(const ParameterSet& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!layers[l].weights.bit_equal(other.layers[l].weights)) return false;
    for (std::size_t i = 0; i < layers[l].biases.size(); ++i) {
      if (layers[l].biases[i] != other.layers[l].biases[i]) return false;
    }
  }
  return true;
}

std::vector<LayerSpec> make_specs(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) {
    throw ValidationError("make_specs: need at least input and output dims");
  }
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] < 1 || dims[i + 1] < 1) {
      throw ValidationError("make_specs: layer dims must be >= 1");
    }
    const bool last = (i + 2 == dims.size());
    specs.push_back(LayerSpec{dims[i], dims[i + 1],
                              last ? Activation::kLinear : Activation::kRelu});
  }
  return specs;
}

ParameterSet init_params(const std::vector<LayerSpec>& specs, Rng& rng) {
  ParameterSet params;
  params.specs = specs;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto& spec = specs[l];
    if (spec.input_dim < 1 || spec.output_dim < 1) {
      throw ValidationError("init_params: layer " + std::to_string(l) +
                            " has a zero dimension");
    }
    if (l > 0 && specs[l - 1].output_dim != spec.input_dim) {
      throw DimensionError("init_params: layer " + std::to_string(l) +
                           " input_dim " + std::to_string(spec.input_dim) +
                           " != previous output_dim " +
                           std::to_string(specs[l - 1].output_dim));
    }
    const double fan_in = static_cast<double>(spec.input_dim);
    const double fan_out = static_cast<double>(spec.output_dim);
    const double limit = spec.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    LayerParams layer;
    layer.weights = DenseMatrix(spec.input_dim, spec.output_dim);
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
    layer.biases.assign(spec.output_dim, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardTrace ForwardTrace::gather_rows(const std::vector<std::size_t>& idx) const {
  ForwardTrace out;
  out.input = input.gather_rows(idx);
  out.pre_activations.reserve(pre_activations.size());
  out.activations.reserve(activations.size());
  for (const auto& z : pre_activations) out.pre_activations.push_back(z.gather_rows(idx));
  for (const auto& a : activations) out.activations.push_back(a.gather_rows(idx));
  return out;
}

ForwardTrace forward(const ParameterSet& params, const DenseMatrix& input) {
  if (input.cols() != params.input_dim()) {
    throw DimensionError("forward: input has " + std::to_string(input.cols()) +
                         " columns, layer 0 expects " +
                         std::to_string(params.input_dim()));
  }
  ForwardTrace trace;
  trace.input = input;
  const DenseMatrix* x = &trace.input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    DenseMatrix z = matmul(*x, layer.weights, "forward layer " + std::to_string(l));
    add_row_broadcast(z, layer.biases);
    DenseMatrix a = z;
    if (params.specs[l].activation == Activation::kRelu) {
      for (double& v : a.data()) v = std::max(0.0, v);
    }
    trace.pre_activations.push_back(std::move(z));
    trace.activations.push_back(std::move(a));
    x = &trace.activations.back();
  }
  return trace;
}

BackwardResult backward(const ParameterSet& params, const ForwardTrace& trace,
                        const DenseMatrix& output_grad) {
  if (trace.depth() != params.layers.size()) {
    throw DimensionError("backward: trace depth " +
                         std::to_string(trace.depth()) + " != layer count " +
                         std::to_string(params.layers.size()));
  }
  if (!output_grad.same_shape(trace.output())) {
    throw DimensionError("backward: output_grad is " +
                         std::to_string(output_grad.rows()) + "x" +
                         std::to_string(output_grad.cols()) +
                         ", forward output was " +
                         std::to_string(trace.output().rows()) + "x" +
                         std::to_string(trace.output().cols()));
  }

  BackwardResult result;
  result.param_grads = params.zeros_like();

  DenseMatrix grad = output_grad;  // d(loss)/d(activation of layer l)
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    // Through the activation: relu gates the gradient on z > 0.
    if (params.specs[l].activation == Activation::kRelu) {
      const DenseMatrix& z = trace.pre_activations[l];
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (z.data()[i] <= 0.0) grad.data()[i] = 0.0;
      }
    }
    const DenseMatrix& layer_input =
        (l == 0) ? trace.input : trace.activations[l - 1];
    result.param_grads.layers[l].weights =
        matmul_at_b(layer_input, grad, "backward layer " + std::to_string(l));
    result.param_grads.layers[l].biases = column_sums(grad);
    grad = matmul_a_bt(grad, params.layers[l].weights,
                       "backward layer " + std::to_string(l));
  }
  result.input_grad = std::move(grad);
  return result;
}

SoftmaxXentResult softmax_xent(const DenseMatrix& logits,
                               const std::vector<std::size_t>& labels) {
  if (labels.size() != logits.rows()) {
    throw ValidationError("softmax_xent: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(logits.rows()) +
                          " rows");
  }
  if (logits.rows() == 0) {
    throw ValidationError("softmax_xent: empty batch");
  }
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();

  SoftmaxXentResult result;
  result.probabilities = DenseMatrix(batch, classes);
  result.logit_grad = DenseMatrix(batch, classes);

  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    if (labels[i] >= classes) {
      throw ValidationError("softmax_xent: label " +
                            std::to_string(labels[i]) + " out of range [0, " +
                            std::to_string(classes) + ") at row " +
                            std::to_string(i));
    }
    const double* row = logits.row_ptr(i);
    double max_logit = row[0];
    for (std::size_t j = 1; j < classes; ++j) max_logit = std::max(max_logit, row[j]);
    double sum_exp = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum_exp += std::exp(row[j] - max_logit);
    const double log_sum = max_logit + std::log(sum_exp);
    total += log_sum - row[labels[i]];
    for (std::size_t j = 0; j < classes; ++j) {
      result.probabilities.at(i, j) = std::exp(row[j] - log_sum);
    }
  }
  result.loss = total / static_cast<double>(batch);

  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < classes; ++j) {
      const double indicator = (j == labels[i]) ? 1.0 : 0.0;
      result.logit_grad.at(i, j) =
          (result.probabilities.at(i, j) - indicator) * inv_batch;
    }
  }
  return result;
}

Velocity zero_velocity(const ParameterSet& params) {
  Velocity v;
  const ParameterSet z = params.zeros_like();
  v.layers = z.layers;
  return v;
}

void sgd_step(ParameterSet& params, const ParameterSet& grads, double lr,
              double momentum, Velocity& velocity, const std::string& context) {
  if (lr <= 0.0) throw ValidationError(context + ": lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ValidationError(context + ": momentum must be in [0, 1)");
  }
  if (!params.same_shape(grads) || velocity.layers.size() != params.layers.size()) {
    throw DimensionError(context + ": gradient/velocity shapes do not match parameters");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& g = grads.layers[l];
    if (!g.weights.all_finite()) {
      throw TrainingError(context + ": non-finite weight gradient in layer " +
                          std::to_string(l));
    }
    for (double b : g.biases) {
      if (!std::isfinite(b)) {
        throw TrainingError(context + ": non-finite bias gradient in layer " +
                            std::to_string(l));
      }
    }
    auto& v = velocity.layers[l];
    auto& p = params.layers[l];
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      double& vel = v.weights.data()[i];
      vel = momentum * vel - lr * g.weights.data()[i];
      p.weights.data()[i] += vel;
    }
    for (std::size_t i = 0; i < p.biases.size(); ++i) {
      double& vel = v.biases[i];
      vel = momentum * vel - lr * g.biases[i];
      p.biases[i] += vel;
    }
  }
}

void accumulate(ParameterSet& into, const ParameterSet& grads) {
  if (!into.same_shape(grads)) {
    throw DimensionError("accumulate: shapes do not match");
  }
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    add_in_place(into.layers[l].weights, grads.layers[l].weights);
    for (std::size_t i = 0; i < into.layers[l].biases.size(); ++i) {
      into.layers[l].biases[i] += grads.layers[l].biases[i];
    }
  }
}

void scale_grads(ParameterSet& grads, double s) {
  for (auto& layer : grads.layers) {
    scale_in_place(layer.weights, s);
    for (double& b : layer.biases) b *= s;
  }
}

void clip_gradients(ParameterSet& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double norm_sq = 0.0;
  for (const auto& layer : grads.layers) {
    for (double w : layer.weights.data()) norm_sq += w * w;
    for (double b : layer.biases) norm_sq += b * b;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > max_norm) scale_grads(grads, max_norm / norm);
}

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

double grad_check(const ParameterSet& params, const DenseMatrix& input,
                  const std::vector<std::size_t>& labels, double step,
                  GradCheckFault fault) {
  auto loss_of = [&](const ParameterSet& p) {
    const ForwardTrace trace = forward(p, input);
    return softmax_xent(trace.output(), labels).loss;
  };

  const ForwardTrace trace = forward(params, input);
  const SoftmaxXentResult sx = softmax_xent(trace.output(), labels);
  BackwardResult analytic = backward(params, trace, sx.logit_grad);
  if (fault == GradCheckFault::kFlipSign) {
    scale_grads(analytic.param_grads, -1.0);
  }

  double worst = 0.0;
  ParameterSet probe = params;
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto perturb = [&](double& slot, double analytic_grad) {
      const double saved = slot;
      slot = saved + step;
      const double up = loss_of(probe);
      slot = saved - step;
      const double down = loss_of(probe);
      slot = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, relative_error(analytic_grad, numeric));
    };
    for (std::size_t i = 0; i < probe.layers[l].weights.size(); ++i) {
      perturb(probe.layers[l].weights.data()[i],
              analytic.param_grads.layers[l].weights.data()[i]);
    }
    for (std::size_t i = 0; i < probe.layers[l].biases.size(); ++i) {
      perturb(probe.layers[l].biases[i],
              analytic.param_grads.layers[l].biases[i]);
    }
  }
  return worst;
}

}  // namespace gradrev
