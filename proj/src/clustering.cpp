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

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "fedsim.hpp"
#include "logging.hpp"

namespace fedreid {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) {
      parent_[std::max(a, b)] = std::min(a, b);
    }
  }

 private:
  std::vector<std::size_t> parent_;
};

// One first-neighbor merge over `points`; returns a group index per point.
// Points flagged degenerate never link.
std::vector<std::size_t> FirstNeighborStep(const std::vector<std::vector<double>> &points,
                                           const std::vector<bool> &degenerate) {
  const std::size_t n = points.size();
  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) {
      continue;
    }
    std::size_t nearest = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || degenerate[j]) {
        continue;
      }
      const double d = CosineDistance(points[i], points[j]);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    // i -- fn(i) edges; clients sharing a first neighbor meet through it.
    if (nearest < n) {
      sets.Union(i, nearest);
    }
  }
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) {
    root[i] = sets.Find(i);
  }
  // Relabel roots densely in order of first appearance.
  std::vector<std::size_t> label(n, n);
  std::vector<std::size_t> out(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[root[i]] == n) {
      label[root[i]] = next++;
    }
    out[i] = label[root[i]];
  }
  return out;
}

}  // namespace

ClusterAssignment ClusterClients(std::span<const ClientFeatures> features, int merge_steps) {
  if (features.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "clustering needs at least 2 clients, got " + std::to_string(features.size()));
  }
  if (merge_steps < 1) {
    Fail(ErrorCode::kInvalidArgument, "clustering needs at least one merge step");
  }
  const std::size_t dim = features.front().features.size();
  std::vector<std::vector<double>> points;
  std::vector<bool> degenerate;
  for (const ClientFeatures &f : features) {
    if (f.features.size() != dim) {
      Fail(ErrorCode::kDimension, "client " + std::to_string(f.client_id) + " feature length " +
                                      std::to_string(f.features.size()) + " differs from " + std::to_string(dim));
    }
    const bool zero = Norm(f.features) == 0.0;
    if (zero) {
      LogWarning("client " + std::to_string(f.client_id) + " produced zero features; kept as a singleton cluster");
    }
    points.push_back(f.features);
    degenerate.push_back(zero);
  }

  // membership[i] = current group of client i
  std::vector<std::size_t> membership(features.size());
  std::iota(membership.begin(), membership.end(), std::size_t{0});
  for (int step = 0; step < merge_steps; ++step) {
    const std::vector<std::size_t> merged = FirstNeighborStep(points, degenerate);
    const std::size_t groups = *std::max_element(merged.begin(), merged.end()) + 1;
    for (std::size_t &m : membership) {
      m = merged[m];
    }
    if (groups == points.size() || groups == 1) {
      break;
    }
    // Next level works on group means; a group is degenerate only if its mean is.
    std::vector<std::vector<double>> means(groups, std::vector<double>(dim, 0.0));
    std::vector<double> counts(groups, 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
      const std::size_t g = membership[i];
      counts[g] += 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        means[g][d] += features[i].features[d];
      }
    }
    std::vector<bool> next_degenerate(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      for (double &v : means[g]) {
        v /= counts[g];
      }
      next_degenerate[g] = Norm(means[g]) == 0.0;
    }
    points = std::move(means);
    degenerate = std::move(next_degenerate);
  }

  ClusterAssignment out;
  const std::size_t groups = *std::max_element(membership.begin(), membership.end()) + 1;
  out.clusters.resize(groups);
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.clusters[membership[i]].push_back(features[i].client_id);
  }
  for (auto &members : out.clusters) {
    std::sort(members.begin(), members.end());
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto &a, const auto &b) { return a.front() < b.front(); });
  return out;
}

}  // namespace fedreid
