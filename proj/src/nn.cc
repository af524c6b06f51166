//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpaudit/nn.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dpaudit/errors.h"
#include "dpaudit/rng.h"

namespace dpaudit {
namespace {

void CheckShapes(const ModelSpec& spec, const ParamVector& params,
                 const Sample& sample) {
  ValidateModelSpec(spec);
  if (params.size() != ParamCount(spec)) {
    throw std::invalid_argument("parameter vector has " +
                                std::to_string(params.size()) + " entries, model needs " +
                                std::to_string(ParamCount(spec)));
  }
  if (static_cast<int>(sample.features.size()) != spec.input_dim()) {
    throw std::invalid_argument("sample dimension " +
                                std::to_string(sample.features.size()) +
                                " does not match model input " +
                                std::to_string(spec.input_dim()));
  }
  if (sample.label < 0 || sample.label >= spec.num_classes()) {
    throw std::invalid_argument("label " + std::to_string(sample.label) +
                                " outside [0, " + std::to_string(spec.num_classes()) + ")");
  }
}

// Per-thread scratch so the per-example gradient loop does not allocate.
struct ForwardScratch {
  std::vector<std::vector<double>> activations;  // activations[0] = input
  std::vector<double> probs;
  std::vector<double> delta;
  std::vector<double> delta_prev;
};

thread_local ForwardScratch tls_scratch;

// Runs the forward pass, storing post-activation values per layer. Returns the
// loss; fills `probs` with the softmax distribution over the logits.
double RunForward(const ModelSpec& spec, const ParamVector& params,
                  const Sample& sample, ForwardScratch& ws) {
  const auto layout = LayoutOf(spec);
  const int transitions = spec.num_transitions();
  ws.activations.resize(transitions + 1);
  ws.activations[0].assign(sample.features.begin(), sample.features.end());
  for (int l = 0; l < transitions; ++l) {
    const LayerLayout& ll = layout[l];
    const std::vector<double>& in = ws.activations[l];
    std::vector<double>& out = ws.activations[l + 1];
    out.assign(ll.fan_out, 0.0);
    const bool hidden = l + 1 < transitions;
    for (int o = 0; o < ll.fan_out; ++o) {
      const double* row = params.data() + ll.weight_offset +
                          static_cast<size_t>(o) * ll.fan_in;
      double z = params[ll.bias_offset + o];
      for (int i = 0; i < ll.fan_in; ++i) {
        z += row[i] * in[i];
      }
      out[o] = hidden ? std::tanh(z) : z;
    }
  }
  const std::vector<double>& logits = ws.activations[transitions];
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(max_logit)) {
    throw DivergenceError("forward pass produced non-finite logits");
  }
  double sum_exp = 0.0;
  for (double z : logits) sum_exp += std::exp(z - max_logit);
  const double lse = max_logit + std::log(sum_exp);
  ws.probs.resize(logits.size());
  for (size_t k = 0; k < logits.size(); ++k) {
    ws.probs[k] = std::exp(logits[k] - lse);
  }
  const double loss = lse - logits[sample.label];
  if (!std::isfinite(loss)) {
    throw DivergenceError("forward pass produced non-finite loss");
  }
  return loss;
}

}  // namespace

void ValidateModelSpec(const ModelSpec& spec) {
  if (spec.widths.size() < 2) {
    throw std::invalid_argument("model needs at least input and output widths");
  }
  for (int w : spec.widths) {
    if (w < 1) throw std::invalid_argument("model widths must be positive");
  }
}

std::vector<LayerLayout> LayoutOf(const ModelSpec& spec) {
  ValidateModelSpec(spec);
  std::vector<LayerLayout> layout(spec.num_transitions());
  size_t offset = 0;
  for (int l = 0; l < spec.num_transitions(); ++l) {
    layout[l].fan_in = spec.widths[l];
    layout[l].fan_out = spec.widths[l + 1];
    layout[l].weight_offset = offset;
    offset += static_cast<size_t>(layout[l].fan_in) * layout[l].fan_out;
    layout[l].bias_offset = offset;
    offset += layout[l].fan_out;
  }
  return layout;
}

size_t ParamCount(const ModelSpec& spec) {
  ValidateModelSpec(spec);
  size_t count = 0;
  for (int l = 0; l < spec.num_transitions(); ++l) {
    count += static_cast<size_t>(spec.widths[l]) * spec.widths[l + 1] + spec.widths[l + 1];
  }
  return count;
}

double L2Norm(const ParamVector& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double ForwardLoss(const ModelSpec& spec, const ParamVector& params,
                   const Sample& sample) {
  CheckShapes(spec, params, sample);
  return RunForward(spec, params, sample, tls_scratch);
}

double PerExampleGradient(const ModelSpec& spec, const ParamVector& params,
                          const Sample& sample, ParamVector& grad) {
  CheckShapes(spec, params, sample);
  ForwardScratch& ws = tls_scratch;
  const double loss = RunForward(spec, params, sample, ws);
  const auto layout = LayoutOf(spec);
  const int transitions = spec.num_transitions();

  grad.assign(params.size(), 0.0);
  // dLoss/dlogits = softmax - onehot(label).
  ws.delta = ws.probs;
  ws.delta[sample.label] -= 1.0;

  for (int l = transitions - 1; l >= 0; --l) {
    const LayerLayout& ll = layout[l];
    const std::vector<double>& in = ws.activations[l];
    for (int o = 0; o < ll.fan_out; ++o) {
      const double d = ws.delta[o];
      double* grow = grad.data() + ll.weight_offset + static_cast<size_t>(o) * ll.fan_in;
      for (int i = 0; i < ll.fan_in; ++i) {
        grow[i] = d * in[i];
      }
      grad[ll.bias_offset + o] = d;
    }
    if (l > 0) {
      ws.delta_prev.assign(ll.fan_in, 0.0);
      for (int o = 0; o < ll.fan_out; ++o) {
        const double d = ws.delta[o];
        const double* row = params.data() + ll.weight_offset +
                            static_cast<size_t>(o) * ll.fan_in;
        for (int i = 0; i < ll.fan_in; ++i) {
          ws.delta_prev[i] += row[i] * d;
        }
      }
      // Backward through tanh: in[i] already holds tanh(z).
      for (int i = 0; i < ll.fan_in; ++i) {
        ws.delta_prev[i] *= 1.0 - in[i] * in[i];
      }
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  return loss;
}

ParamVector PerExampleGradient(const ModelSpec& spec, const ParamVector& params,
                               const Sample& sample) {
  ParamVector grad;
  PerExampleGradient(spec, params, sample, grad);
  return grad;
}

std::vector<double> Logits(const ModelSpec& spec, const ParamVector& params,
                           const std::vector<double>& features) {
  Sample probe{features, 0};
  CheckShapes(spec, params, probe);
  RunForward(spec, params, probe, tls_scratch);
  return tls_scratch.activations[spec.num_transitions()];
}

double Accuracy(const ModelSpec& spec, const ParamVector& params,
                const Dataset& dataset) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("Accuracy: empty dataset");
  }
  int64_t correct = 0;
  for (const Sample& s : dataset.samples) {
    const std::vector<double> z = Logits(spec, params, s.features);
    const int predicted =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (predicted == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

ParamVector XavierInit(const ModelSpec& spec, uint64_t seed) {
  const auto layout = LayoutOf(spec);
  ParamVector params(ParamCount(spec), 0.0);
  Rng rng(DeriveSeed(seed, kSeedXavier));
  for (const LayerLayout& ll : layout) {
    const double bound = std::sqrt(6.0 / (ll.fan_in + ll.fan_out));
    const size_t weights = static_cast<size_t>(ll.fan_in) * ll.fan_out;
    for (size_t j = 0; j < weights; ++j) {
      params[ll.weight_offset + j] = bound * (2.0 * rng.NextUnit() - 1.0);
    }
    // Biases stay zero.
  }
  return params;
}

ParamVector SgdPretrain(const ModelSpec& spec, const Dataset& aux, int epochs,
                        double learning_rate, int batch_size, uint64_t seed) {
  ValidateModelSpec(spec);
  if (aux.samples.empty()) {
    throw std::invalid_argument("SgdPretrain: empty auxiliary dataset");
  }
  if (epochs < 0) throw std::invalid_argument("SgdPretrain: negative epochs");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("SgdPretrain: learning rate must be > 0");
  }
  if (batch_size < 1) throw std::invalid_argument("SgdPretrain: batch size must be >= 1");

  ParamVector params = XavierInit(spec, seed);
  if (epochs == 0) return params;

  Rng shuffle_rng(DeriveSeed(seed, kSeedShuffle));
  const int64_t n = aux.size();
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  ParamVector grad;
  ParamVector batch_sum(params.size());

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int64_t i = n - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(shuffle_rng.NextBelow(static_cast<uint64_t>(i + 1)));
      std::swap(order[i], order[j]);
    }
    for (int64_t start = 0; start < n; start += batch_size) {
      const int64_t end = std::min(n, start + batch_size);
      std::fill(batch_sum.begin(), batch_sum.end(), 0.0);
      for (int64_t k = start; k < end; ++k) {
        PerExampleGradient(spec, params, aux.samples[order[k]], grad);
        for (size_t j = 0; j < params.size(); ++j) batch_sum[j] += grad[j];
      }
      const double scale = learning_rate / static_cast<double>(end - start);
      for (size_t j = 0; j < params.size(); ++j) params[j] -= scale * batch_sum[j];
    }
    for (double p : params) {
      if (!std::isfinite(p)) {
        throw DivergenceError("pre-training diverged at epoch " + std::to_string(epoch));
      }
    }
  }
  return params;
}

}  // namespace dpaudit
