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

#ifndef FEDREID_TESTS_SUPPORT_HPP_
#define FEDREID_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <unistd.h>

#include "datagen.hpp"
#include "errors.hpp"
#include "numcore.hpp"

namespace fedreid::testing {

/// Code of the fedreid::Error thrown by `fn`, or nullopt if it returned.
inline std::optional<ErrorCode> CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::vector<double> RandomVector(Rng &rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double &x : v) {
    x = scale * rng.Normal();
  }
  return v;
}

inline double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

/// Three small clients, enough shared data for every strategy; builds in
/// well under a millisecond.
inline WorldConfig TinyWorldConfig(std::uint64_t seed) {
  WorldConfig c;
  c.volume_ratios = {3.0, 2.0, 1.0};
  c.train_identities = {6, 4, 3};
  c.cameras = {3, 2, 2};
  c.groups = {0, 0, 1};
  c.group_count = 2;
  c.total_train_samples = 120;
  c.test_identities = 10;
  c.shared_size = 40;
  c.seed = seed;
  return c;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fedreid_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const noexcept { return path_; }
  std::string operator/(const std::string &name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fedreid::testing

#endif  // FEDREID_TESTS_SUPPORT_HPP_
