/**
 * Copyright 2026 The FedReID-Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "numcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace fedreid {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kEmptyAggregation: return "empty-aggregation";
    case ErrorCode::kDegenerateVector: return "degenerate-vector";
    case ErrorCode::kSelection: return "selection";
    case ErrorCode::kLabel: return "label";
    case ErrorCode::kDivergence: return "training-divergence";
    case ErrorCode::kBatchSize: return "batch-size";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kPartition: return "partition";
    case ErrorCode::kDistillation: return "distillation";
    case ErrorCode::kAggregation: return "aggregation";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kRuntime: return "runtime";
  }
  return "unknown";
}

bool AllFinite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
  if (!AllFinite(values_)) {
    Fail(ErrorCode::kInvalidArgument, "ParamVector: non-finite value");
  }
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(std::vector<double>(values)) {}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(SplitMix64(seed)) {}

Rng Rng::Derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(SplitMix64(seed ^ SplitMix64(stream + 0x632be59bd9b4e019ULL)));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n == 0) {
    Fail(ErrorCode::kInvalidArgument, "UniformInt: empty range");
  }
  // Rejection sampling over the largest multiple of n below 2^64.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = engine_();
  while (draw >= limit) {
    draw = engine_();
  }
  return draw % n;
}

double Rng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_normal_ = true;
  return u * scale;
}

ParamVector WeightedSum(std::span<const ParamVector> vectors, std::span<const double> weights) {
  if (vectors.empty()) {
    Fail(ErrorCode::kEmptyAggregation, "weighted sum over zero vectors");
  }
  if (vectors.size() != weights.size()) {
    Fail(ErrorCode::kDimension, "weighted sum: " + std::to_string(vectors.size()) +
                                    " vectors but " + std::to_string(weights.size()) + " weights");
  }
  const std::size_t n = vectors.front().size();
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != n) {
      Fail(ErrorCode::kDimension, "weighted sum: vector " + std::to_string(k) + " has length " +
                                      std::to_string(vectors[k].size()) + ", expected " +
                                      std::to_string(n));
    }
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      Fail(ErrorCode::kInvalidArgument, "weighted sum: weight " + std::to_string(k) +
                                            " is negative or non-finite");
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const double w = weights[k];
    const auto v = vectors[k].values();
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += w * v[i];
    }
  }
  return ParamVector(std::move(out));
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kDimension, "dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

double CosineDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kDimension, "cosine distance: lengths " + std::to_string(a.size()) +
                                    " and " + std::to_string(b.size()));
  }
  const double na2 = Dot(a, a);
  const double nb2 = Dot(b, b);
  if (na2 == 0.0 || nb2 == 0.0) {
    Fail(ErrorCode::kDegenerateVector, "cosine distance of a zero-norm vector");
  }
  // sqrt of the product keeps d(a, a) == 0 exactly.
  const double cosine = Dot(a, b) / std::sqrt(na2 * nb2);
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

std::vector<std::size_t> ChooseK(Rng &rng, std::size_t n, std::size_t k) {
  if (k > n) {
    Fail(ErrorCode::kSelection, "cannot select " + std::to_string(k) + " of " +
                                    std::to_string(n) + " clients");
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.UniformInt(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace fedreid
