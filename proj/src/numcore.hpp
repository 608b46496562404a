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

#ifndef FEDREID_NUMCORE_HPP_
#define FEDREID_NUMCORE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fedreid {

/// Flat, fixed-length container of finite doubles. Holds one model part
/// (backbone or classifier) in serialized form.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);
  ParamVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const ParamVector &other) const = default;

 private:
  std::vector<double> values_;
};

/// Seeded random stream. Only the engine comes from <random>; the
/// distributions are implemented here because the standard ones are not
/// specified bit-for-bit across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for a (seed, stream id) pair.
  static Rng Derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t NextU64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double Uniform();
  /// Uniform integer on [0, n), unbiased. n must be > 0.
  std::uint64_t UniformInt(std::uint64_t n);
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t x);

/// result[i] = sum_k weights[k] * vectors[k][i], one accumulation pass.
ParamVector WeightedSum(std::span<const ParamVector> vectors, std::span<const double> weights);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

/// 1 - cos(a, b), clamped to [0, 2]. Throws kDegenerateVector when either
/// input has zero norm.
double CosineDistance(std::span<const double> a, std::span<const double> b);
inline double CosineDistance(const ParamVector &a, const ParamVector &b) {
  return CosineDistance(a.values(), b.values());
}

/// k distinct indices drawn uniformly from [0, n), in draw order.
std::vector<std::size_t> ChooseK(Rng &rng, std::size_t n, std::size_t k);

bool AllFinite(std::span<const double> values);

}  // namespace fedreid

#endif  // FEDREID_NUMCORE_HPP_
