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

// Independent oracles for the numerical paths under test. Everything here is
// deliberately written against first principles (quadrature, summation, plain
// bisection) rather than reusing the library's own algorithms, so a bug in the
// implementation cannot hide in its oracle.

#ifndef DPAUDIT_TESTS_TESTING_ORACLES_H_
#define DPAUDIT_TESTS_TESTING_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dpaudit/stats.h"

namespace dpaudit::testing {

// Phi(x) by Simpson quadrature of the density from 0 to x. Good to ~1e-13 for
// |x| <= 8.
inline double QuadratureNormalCdf(double x) {
  const int steps = 200000;  // even
  const double h = x / steps;
  const auto density = [](double t) {
    return std::exp(-0.5 * t * t) * 0.39894228040143267794;
  };
  double sum = density(0.0) + density(x);
  for (int i = 1; i < steps; ++i) {
    sum += density(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return 0.5 + sum * h / 3.0;
}

// Inverse of an increasing function by plain bisection.
inline double InvertIncreasing(const std::function<double(double)>& f, double target,
                               double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Quantile by bisection on the library CDF.
inline double QuantileByBisection(double p) {
  return InvertIncreasing([](double x) { return dpaudit::StdNormalCdf(x); }, p, -40.0,
                          40.0);
}

// Binomial CDF by direct log-space summation of pmf terms.
inline double BinomialCdfBySummation(int64_t k, int64_t n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  double sum = 0.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  for (int64_t i = 0; i <= k; ++i) {
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                              std::lgamma(static_cast<double>(i) + 1.0) -
                              std::lgamma(static_cast<double>(n - i) + 1.0);
    sum += std::exp(log_choose + i * log_p + (n - i) * log_q);
  }
  return std::min(sum, 1.0);
}

// One-sided Clopper-Pearson upper bound via bisection on the summed CDF.
inline double CpUpperByBisection(int64_t successes, int64_t trials, double level) {
  if (successes == trials) return 1.0;
  const double tail = 1.0 - level;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (BinomialCdfBySummation(successes, trials, mid) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Closed form for the zero-success upper bound: (1 - p)^n = 1 - level.
inline double CpUpperZeroSuccesses(int64_t trials, double level) {
  return 1.0 - std::pow(1.0 - level, 1.0 / static_cast<double>(trials));
}

// The GDP trade-off delta(eps), written directly against erfc.
inline double GdpDeltaOracle(double mu, double eps) {
  const auto phi = [](double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); };
  return phi(-eps / mu + mu / 2.0) - std::exp(eps) * phi(-eps / mu - mu / 2.0);
}

// Inverse of GdpDeltaOracle in eps by bisection.
inline double GdpEpsilonOracle(double mu, double delta) {
  if (GdpDeltaOracle(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0;
  double hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (GdpDeltaOracle(mu, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
inline double TwoSampleKsPValue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    p += sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    sign = -sign;
  }
  return std::clamp(p, 0.0, 1.0);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd SampleMeanStd(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace dpaudit::testing

#endif  // DPAUDIT_TESTS_TESTING_ORACLES_H_
