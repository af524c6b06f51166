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

#include "dpaudit/canary.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpaudit {
namespace {

// Cyclic Jacobi eigendecomposition of a symmetric d x d matrix (row-major,
// destroyed). Eigenvectors end up in the columns of v. Fine at desk scale;
// the Gram matrices here are small.
void JacobiEigenSymmetric(std::vector<double>& a, int d,
                          std::vector<double>& eigenvalues,
                          std::vector<double>& v) {
  v.assign(static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) v[static_cast<size_t>(i) * d + i] = 1.0;

  const auto at = [&](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<size_t>(r) * d + c];
  };

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);
  const double tol = 1e-12 * std::max(frob, 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        off += at(a, p, q) * at(a, p, q);
      }
    }
    if (std::sqrt(2.0 * off) < tol) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(a, p, q);
        if (std::abs(apq) <= tol * 1e-4) continue;
        const double tau = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  eigenvalues.resize(d);
  for (int i = 0; i < d; ++i) eigenvalues[i] = at(a, i, i);
}

}  // namespace

Sample MakeBlankCanary(int dim, int label) {
  if (dim < 1) throw std::invalid_argument("MakeBlankCanary: dim must be >= 1");
  if (label < 0) throw std::invalid_argument("MakeBlankCanary: negative label");
  Sample canary;
  canary.features.assign(dim, 0.0);
  canary.label = label;
  return canary;
}

Sample MakeClipBkdCanary(const Dataset& dataset, int label, double scale) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("MakeClipBkdCanary: empty dataset");
  }
  const int d = dataset.dimension();
  if (d < 2) {
    throw std::invalid_argument("MakeClipBkdCanary: feature dimension must be >= 2");
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("MakeClipBkdCanary: scale must be > 0");
  }
  if (label < 0) throw std::invalid_argument("MakeClipBkdCanary: negative label");

  // Gram matrix A^T A; its smallest eigenvector is the least singular
  // direction of A.
  std::vector<double> gram(static_cast<size_t>(d) * d, 0.0);
  for (const Sample& s : dataset.samples) {
    if (static_cast<int>(s.features.size()) != d) {
      throw std::invalid_argument("MakeClipBkdCanary: inconsistent feature dimensions");
    }
    for (int i = 0; i < d; ++i) {
      const double xi = s.features[i];
      for (int j = i; j < d; ++j) {
        gram[static_cast<size_t>(i) * d + j] += xi * s.features[j];
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      gram[static_cast<size_t>(i) * d + j] = gram[static_cast<size_t>(j) * d + i];
    }
  }

  std::vector<double> eigenvalues;
  std::vector<double> vectors;
  JacobiEigenSymmetric(gram, d, eigenvalues, vectors);

  int min_index = 0;
  for (int i = 1; i < d; ++i) {
    if (eigenvalues[i] < eigenvalues[min_index]) min_index = i;
  }

  std::vector<double> direction(d);
  for (int i = 0; i < d; ++i) {
    direction[i] = vectors[static_cast<size_t>(i) * d + min_index];
  }
  double norm = 0.0;
  for (double x : direction) norm += x * x;
  norm = std::sqrt(norm);
  double sign = 1.0;
  for (double x : direction) {
    if (std::abs(x) > 1e-12) {
      sign = x > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  Sample canary;
  canary.features.resize(d);
  for (int i = 0; i < d; ++i) {
    canary.features[i] = direction[i] / norm * sign * scale;
  }
  canary.label = label;
  return canary;
}

int LeastFavoredLabel(const ModelSpec& spec, const ParamVector& params,
                      const std::vector<double>& features) {
  const std::vector<double> z = Logits(spec, params, features);
  return static_cast<int>(std::min_element(z.begin(), z.end()) - z.begin());
}

Sample CraftCanary(const CanarySpec& canary, const Dataset& dataset,
                   const ModelSpec& spec, const ParamVector& theta0) {
  ValidateModelSpec(spec);
  const int dim = spec.input_dim();
  const int num_classes = spec.num_classes();

  Sample crafted;
  switch (canary.strategy) {
    case CanaryStrategy::kBlank:
      crafted = MakeBlankCanary(dim, canary.label.value_or(0));
      break;
    case CanaryStrategy::kClipBkd: {
      if (dataset.dimension() != dim) {
        throw std::invalid_argument(
            "CraftCanary: dataset dimension does not match model input");
      }
      Sample direction = MakeClipBkdCanary(dataset, 0, canary.scale);
      direction.label = canary.label.value_or(
          LeastFavoredLabel(spec, theta0, direction.features));
      crafted = std::move(direction);
      break;
    }
    case CanaryStrategy::kFixed:
      crafted.features = canary.fixed_features;
      crafted.label = canary.label.value_or(0);
      break;
  }
  if (static_cast<int>(crafted.features.size()) != dim) {
    throw std::invalid_argument("CraftCanary: canary dimension " +
                                std::to_string(crafted.features.size()) +
                                " does not match model input " + std::to_string(dim));
  }
  if (crafted.label < 0 || crafted.label >= num_classes) {
    throw std::invalid_argument("CraftCanary: label " + std::to_string(crafted.label) +
                                " outside [0, " + std::to_string(num_classes) + ")");
  }
  return crafted;
}

std::string ToString(CanaryStrategy strategy) {
  switch (strategy) {
    case CanaryStrategy::kBlank:
      return "blank";
    case CanaryStrategy::kClipBkd:
      return "clipbkd";
    case CanaryStrategy::kFixed:
      return "fixed";
  }
  return "unknown";
}

CanaryStrategy CanaryStrategyFromString(const std::string& name) {
  if (name == "blank") return CanaryStrategy::kBlank;
  if (name == "clipbkd") return CanaryStrategy::kClipBkd;
  if (name == "fixed") return CanaryStrategy::kFixed;
  throw std::invalid_argument("unknown canary strategy: " + name);
}

}  // namespace dpaudit
