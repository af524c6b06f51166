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

#include "dpaudit/data.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dpaudit/errors.h"
#include "dpaudit/rng.h"

namespace dpaudit {
namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;

// gzread decompresses gzip streams and passes plain files through unchanged,
// which gives the transparent-decompression behavior for free.
class GzReader {
 public:
  explicit GzReader(const std::string& path) : path_(path), file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) {
      throw ParseError(path + ": cannot open");
    }
  }
  ~GzReader() {
    if (file_ != nullptr) gzclose(file_);
  }
  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  // Reads exactly `size` bytes or throws, naming the current offset.
  void ReadExact(void* out, size_t size, const char* what) {
    size_t got = 0;
    auto* bytes = static_cast<unsigned char*>(out);
    while (got < size) {
      const unsigned chunk = static_cast<unsigned>(
          std::min<size_t>(size - got, 1u << 20));
      const int n = gzread(file_, bytes + got, chunk);
      if (n <= 0) break;
      got += static_cast<size_t>(n);
    }
    if (got != size) {
      throw ParseError(path_ + ": truncated " + what + " at offset " +
                       std::to_string(offset_) + ": expected " + std::to_string(size) +
                       " bytes, got " + std::to_string(got));
    }
    offset_ += size;
  }

  uint32_t ReadBe32(const char* what) {
    unsigned char b[4];
    ReadExact(b, 4, what);
    return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
           (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
  }

  size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  gzFile file_;
  size_t offset_ = 0;
};

std::string HexMagic(uint32_t magic) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", magic);
  return buf;
}

}  // namespace

Dataset LoadIdx(const std::string& images_path, const std::string& labels_path) {
  GzReader images(images_path);
  const uint32_t image_magic = images.ReadBe32("magic");
  if (image_magic != kImageMagic) {
    throw ParseError(images_path + ": bad magic " + HexMagic(image_magic) +
                     " at offset 0, expected " + HexMagic(kImageMagic));
  }
  const uint32_t image_count = images.ReadBe32("image count");
  const uint32_t rows = images.ReadBe32("row count");
  const uint32_t cols = images.ReadBe32("column count");
  if (rows == 0 || cols == 0) {
    throw ParseError(images_path + ": zero image dimensions at offset 8");
  }
  const size_t dim = static_cast<size_t>(rows) * cols;
  std::vector<unsigned char> pixels(static_cast<size_t>(image_count) * dim);
  images.ReadExact(pixels.data(), pixels.size(), "pixel data");

  GzReader labels(labels_path);
  const uint32_t label_magic = labels.ReadBe32("magic");
  if (label_magic != kLabelMagic) {
    throw ParseError(labels_path + ": bad magic " + HexMagic(label_magic) +
                     " at offset 0, expected " + HexMagic(kLabelMagic));
  }
  const uint32_t label_count = labels.ReadBe32("label count");
  if (label_count != image_count) {
    throw ParseError(labels_path + ": label count " + std::to_string(label_count) +
                     " does not match image count " + std::to_string(image_count));
  }
  std::vector<unsigned char> raw_labels(label_count);
  labels.ReadExact(raw_labels.data(), raw_labels.size(), "label data");

  Dataset dataset;
  dataset.samples.resize(image_count);
  int max_label = 0;
  for (uint32_t i = 0; i < image_count; ++i) {
    Sample& s = dataset.samples[i];
    s.features.resize(dim);
    const unsigned char* src = pixels.data() + static_cast<size_t>(i) * dim;
    for (size_t j = 0; j < dim; ++j) {
      s.features[j] = static_cast<double>(src[j]) / 255.0;
    }
    s.label = raw_labels[i];
    max_label = std::max(max_label, s.label);
  }
  dataset.num_classes = max_label + 1;
  return dataset;
}

Dataset LoadFeatureCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open");
  }
  Dataset dataset;
  int max_label = 0;
  std::string line;
  size_t line_number = 0;
  size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) {
      throw ParseError(path + ": line " + std::to_string(line_number) +
                       ": expected features and a label");
    }
    Sample s;
    s.features.reserve(fields.size() - 1);
    for (size_t i = 0; i + 1 < fields.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(fields[i].c_str(), &end);
      if (end == fields[i].c_str() || !std::isfinite(v)) {
        throw ParseError(path + ": line " + std::to_string(line_number) + ": field " +
                         std::to_string(i + 1) + " is not a finite number");
      }
      s.features.push_back(v);
    }
    char* end = nullptr;
    const long label = std::strtol(fields.back().c_str(), &end, 10);
    if (end == fields.back().c_str() || label < 0) {
      throw ParseError(path + ": line " + std::to_string(line_number) +
                       ": last field must be a non-negative integer label");
    }
    s.label = static_cast<int>(label);
    if (dim == 0) {
      dim = s.features.size();
    } else if (s.features.size() != dim) {
      throw ParseError(path + ": line " + std::to_string(line_number) + ": expected " +
                       std::to_string(dim) + " features, got " +
                       std::to_string(s.features.size()));
    }
    max_label = std::max(max_label, s.label);
    dataset.samples.push_back(std::move(s));
  }
  if (dataset.samples.empty()) {
    throw ParseError(path + ": no samples");
  }
  dataset.num_classes = max_label + 1;
  return dataset;
}

Dataset SynthBlobs(int classes, int dim, int per_class, double separation,
                   uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("SynthBlobs: classes must be >= 2");
  if (dim < 1) throw std::invalid_argument("SynthBlobs: dim must be >= 1");
  if (per_class < 1) throw std::invalid_argument("SynthBlobs: per_class must be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("SynthBlobs: separation must be finite and >= 0");
  }

  std::vector<std::vector<double>> means(classes, std::vector<double>(dim, 0.0));
  if (classes <= dim) {
    for (int k = 0; k < classes; ++k) means[k][k] = separation;
  } else {
    Rng mean_rng(DeriveSeed(seed, kSeedBlobMeans));
    for (int k = 0; k < classes; ++k) {
      double norm = 0.0;
      for (int j = 0; j < dim; ++j) {
        means[k][j] = mean_rng.NextGaussian();
        norm += means[k][j] * means[k][j];
      }
      norm = std::sqrt(norm);
      for (int j = 0; j < dim; ++j) {
        means[k][j] = norm > 0 ? means[k][j] / norm * separation : separation;
      }
    }
  }

  Rng rng(DeriveSeed(seed, kSeedBlobNoise));
  Dataset dataset;
  dataset.num_classes = classes;
  dataset.samples.reserve(static_cast<size_t>(classes) * per_class);
  for (int k = 0; k < classes; ++k) {
    for (int m = 0; m < per_class; ++m) {
      Sample s;
      s.label = k;
      s.features.resize(dim);
      for (int j = 0; j < dim; ++j) {
        s.features[j] = means[k][j] + rng.NextGaussian();
      }
      dataset.samples.push_back(std::move(s));
    }
  }
  return dataset;
}

std::pair<Dataset, Dataset> SplitPrivateAux(const Dataset& full, const SplitSpec& spec) {
  if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
    throw std::invalid_argument("SplitPrivateAux: fraction outside (0, 1)");
  }
  const int64_t n = full.size();
  if (n < 2) {
    throw std::invalid_argument("SplitPrivateAux: need at least 2 samples");
  }
  const int64_t private_count = std::llround(spec.fraction * static_cast<double>(n));
  if (private_count < 1 || private_count >= n) {
    throw std::invalid_argument("SplitPrivateAux: fraction leaves an empty half");
  }
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(spec.seed, kSeedSplit));
  for (int64_t i = n - 1; i > 0; --i) {
    const int64_t j = static_cast<int64_t>(rng.NextBelow(static_cast<uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }

  int64_t take = private_count;
  if (spec.subsample.has_value()) {
    if (*spec.subsample < 1 || *spec.subsample > private_count) {
      throw std::invalid_argument(
          "SplitPrivateAux: subsample must be in [1, private half size = " +
          std::to_string(private_count) + "]");
    }
    take = *spec.subsample;
  }

  Dataset private_half;
  Dataset aux_half;
  private_half.num_classes = full.num_classes;
  aux_half.num_classes = full.num_classes;
  private_half.samples.reserve(take);
  aux_half.samples.reserve(n - private_count);
  for (int64_t i = 0; i < take; ++i) {
    private_half.samples.push_back(full.samples[order[i]]);
  }
  for (int64_t i = private_count; i < n; ++i) {
    aux_half.samples.push_back(full.samples[order[i]]);
  }
  return {std::move(private_half), std::move(aux_half)};
}

}  // namespace dpaudit
