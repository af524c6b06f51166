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

#ifndef DPAUDIT_DPSGD_H_
#define DPAUDIT_DPSGD_H_

#include <cstdint>
#include <functional>

#include "dpaudit/nn.h"

namespace dpaudit {

struct HyperParams {
  int64_t iterations = 1;        // T
  double learning_rate = 1.0;    // eta
  int64_t batch_size = 1;        // B; must equal the dataset size (full batch)
  double clip_norm = 1.0;        // C
  double noise_multiplier = 0.0; // sigma
};

void ValidateHyperParams(const HyperParams& hp);

// g / max(1, ||g||_2 / clip_norm): direction preserved, output norm <= C.
// The zero vector maps to itself.
ParamVector ClipGradient(ParamVector g, double clip_norm);

// Instrumentation for property tests and gradient-norm diagnostics. Called
// once per iteration with the post-clipping per-example gradient norms, in
// dataset order.
struct TrainHooks {
  std::function<void(int64_t iteration, const std::vector<double>& clipped_norms)>
      on_iteration;
};

// Full-batch DP-SGD: per-example gradients, clip at C, sum, add spherical
// Gaussian noise with per-coordinate std C * sigma, divide by B, descend with
// rate eta. Deterministic given `seed`; the noise for iteration t comes from a
// substream derived from (seed, t), independent of thread scheduling.
//
// The batch size must equal |dataset|: sub-sampled configurations are
// rejected, there is no Poisson-sampling path. Throws DivergenceError (with
// the iteration index) when parameters go non-finite.
ParamVector DpsgdTrain(const Dataset& dataset, const ModelSpec& spec,
                       const ParamVector& theta0, const HyperParams& hp,
                       uint64_t seed, const TrainHooks* hooks = nullptr);

}  // namespace dpaudit

#endif  // DPAUDIT_DPSGD_H_
