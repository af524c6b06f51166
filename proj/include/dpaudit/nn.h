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

#ifndef DPAUDIT_NN_H_
#define DPAUDIT_NN_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dpaudit {

struct Sample {
  std::vector<double> features;
  int label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  int dimension() const {
    return samples.empty() ? 0 : static_cast<int>(samples[0].features.size());
  }
};

// Dense network with tanh hidden activations, identity output, and softmax
// cross-entropy loss. widths = {input, hidden..., num_classes}; logistic
// regression is the zero-hidden-layer case {input, num_classes}.
struct ModelSpec {
  std::vector<int> widths;

  int input_dim() const { return widths.front(); }
  int num_classes() const { return widths.back(); }
  int num_transitions() const { return static_cast<int>(widths.size()) - 1; }
};

// All weights and biases flattened into one vector. Within each layer
// transition the fan_out x fan_in weight matrix comes first (row-major, one
// row per output unit), followed by the fan_out biases.
using ParamVector = std::vector<double>;

struct LayerLayout {
  int fan_in = 0;
  int fan_out = 0;
  size_t weight_offset = 0;
  size_t bias_offset = 0;
};

// Throws std::invalid_argument when widths are empty, too short, or
// non-positive.
void ValidateModelSpec(const ModelSpec& spec);

std::vector<LayerLayout> LayoutOf(const ModelSpec& spec);
size_t ParamCount(const ModelSpec& spec);

double L2Norm(const ParamVector& v);

// Softmax cross-entropy -log softmax(logits)[label], with log-sum-exp
// stabilization. Throws DivergenceError when activations go non-finite.
double ForwardLoss(const ModelSpec& spec, const ParamVector& params,
                   const Sample& sample);

// Reverse-mode gradient of ForwardLoss with respect to every parameter.
// The overload writing into `grad` reuses its storage and returns the loss.
ParamVector PerExampleGradient(const ModelSpec& spec, const ParamVector& params,
                               const Sample& sample);
double PerExampleGradient(const ModelSpec& spec, const ParamVector& params,
                          const Sample& sample, ParamVector& grad);

std::vector<double> Logits(const ModelSpec& spec, const ParamVector& params,
                           const std::vector<double>& features);

// Fraction of samples whose argmax logit matches the label (first index wins
// ties).
double Accuracy(const ModelSpec& spec, const ParamVector& params,
                const Dataset& dataset);

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, biases zero.
ParamVector XavierInit(const ModelSpec& spec, uint64_t seed);

// Plain mini-batch SGD (no clipping, no noise) from XavierInit(spec, seed).
// Shuffling draws from a dedicated stream forked off `seed`, so epochs = 0
// returns the Xavier initialization unchanged.
ParamVector SgdPretrain(const ModelSpec& spec, const Dataset& aux, int epochs,
                        double learning_rate, int batch_size, uint64_t seed);

}  // namespace dpaudit

#endif  // DPAUDIT_NN_H_
