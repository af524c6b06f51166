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

#include "dpaudit/dpsgd.h"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpaudit/errors.h"
#include "dpaudit/rng.h"

namespace dpaudit {

void ValidateHyperParams(const HyperParams& hp) {
  if (hp.iterations < 1) {
    throw std::invalid_argument("HyperParams: iterations must be >= 1");
  }
  if (!(hp.learning_rate > 0.0) || !std::isfinite(hp.learning_rate)) {
    throw std::invalid_argument("HyperParams: learning rate must be finite and > 0");
  }
  if (hp.batch_size < 1) {
    throw std::invalid_argument("HyperParams: batch size must be >= 1");
  }
  if (!(hp.clip_norm > 0.0)) {
    throw std::invalid_argument("HyperParams: clip norm must be > 0");
  }
  if (!(hp.noise_multiplier >= 0.0) || !std::isfinite(hp.noise_multiplier)) {
    throw std::invalid_argument("HyperParams: noise multiplier must be finite and >= 0");
  }
}

ParamVector ClipGradient(ParamVector g, double clip_norm) {
  if (!(clip_norm > 0.0)) {
    throw std::invalid_argument("ClipGradient: clip norm must be > 0");
  }
  const double norm = L2Norm(g);
  const double scale = 1.0 / std::max(1.0, norm / clip_norm);
  if (scale != 1.0) {
    for (double& x : g) x *= scale;
  }
  return g;
}

ParamVector DpsgdTrain(const Dataset& dataset, const ModelSpec& spec,
                       const ParamVector& theta0, const HyperParams& hp,
                       uint64_t seed, const TrainHooks* hooks) {
  ValidateHyperParams(hp);
  ValidateModelSpec(spec);
  if (dataset.samples.empty()) {
    throw std::invalid_argument("DpsgdTrain: empty dataset");
  }
  if (hp.batch_size != dataset.size()) {
    throw std::invalid_argument(
        "DpsgdTrain: audit mode is full-batch only; batch_size " +
        std::to_string(hp.batch_size) + " != dataset size " +
        std::to_string(dataset.size()));
  }
  if (theta0.size() != ParamCount(spec)) {
    throw std::invalid_argument("DpsgdTrain: theta0 does not match the model spec");
  }

  const double inv_batch = 1.0 / static_cast<double>(hp.batch_size);
  const double noise_std = hp.clip_norm * hp.noise_multiplier;
  const uint64_t noise_base = DeriveSeed(seed, kSeedNoise);

  ParamVector theta = theta0;
  ParamVector grad;
  ParamVector update_sum(theta.size());
  std::vector<double> clipped_norms;

  for (int64_t t = 0; t < hp.iterations; ++t) {
    std::fill(update_sum.begin(), update_sum.end(), 0.0);
    clipped_norms.clear();
    for (const Sample& sample : dataset.samples) {
      try {
        PerExampleGradient(spec, theta, sample, grad);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (iteration " +
                                  std::to_string(t) + ")",
                              t);
      }
      const double norm = L2Norm(grad);
      const double scale = 1.0 / std::max(1.0, norm / hp.clip_norm);
      for (size_t j = 0; j < grad.size(); ++j) {
        update_sum[j] += scale * grad[j];
      }
      assert(norm * scale <= hp.clip_norm * (1.0 + 1e-9));
      clipped_norms.push_back(norm * scale);
    }
    if (noise_std > 0.0) {
      Rng noise(DeriveSeed(noise_base, static_cast<uint64_t>(t)));
      for (double& s : update_sum) {
        s += noise_std * noise.NextGaussian();
      }
    }
    const double step = hp.learning_rate * inv_batch;
    bool finite = true;
    for (size_t j = 0; j < theta.size(); ++j) {
      theta[j] -= step * update_sum[j];
      finite = finite && std::isfinite(theta[j]);
    }
    if (!finite) {
      throw DivergenceError("DP-SGD diverged at iteration " + std::to_string(t), t);
    }
    if (hooks != nullptr && hooks->on_iteration) {
      hooks->on_iteration(t, clipped_norms);
    }
  }
  return theta;
}

}  // namespace dpaudit
