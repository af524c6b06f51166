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

#ifndef DPAUDIT_DATA_H_
#define DPAUDIT_DATA_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "dpaudit/nn.h"

namespace dpaudit {

// IDX image + label pair (the MNIST distribution format). Pixels are scaled
// to [0, 1] and flattened row-major; the magic numbers are 0x00000803 for
// images and 0x00000801 for labels, big-endian. Gzip-compressed files are
// accepted transparently. Throws ParseError naming the file and byte offset
// on malformed input.
Dataset LoadIdx(const std::string& images_path, const std::string& labels_path);

// One row per sample: comma-separated feature values followed by an integer
// label. Covers the frozen-feature-extractor fine-tuning mode, where the
// audit runs logistic regression over externally extracted feature vectors.
Dataset LoadFeatureCsv(const std::string& path);

// Gaussian blobs with unit covariance. Class means sit at mutually distant
// points scaled by `separation` (axis-aligned unit vectors when classes <=
// dim, random unit directions otherwise). Deterministic given `seed`.
Dataset SynthBlobs(int classes, int dim, int per_class, double separation,
                   uint64_t seed);

struct SplitSpec {
  double fraction = 0.5;  // private share of the full dataset
  uint64_t seed = 0;
  std::optional<int64_t> subsample;  // optional further cut of the private half
};

// Seeded shuffle, then split: the first round(fraction * N) samples become the
// private half, the rest the auxiliary half. With `subsample`, the private
// half is further reduced to that many samples, still drawn from the private
// half only. Halves are disjoint.
std::pair<Dataset, Dataset> SplitPrivateAux(const Dataset& full, const SplitSpec& spec);

}  // namespace dpaudit

#endif  // DPAUDIT_DATA_H_
