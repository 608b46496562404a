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
#include <cmath>
#include <string>

#include "errors.hpp"
#include "fedsim.hpp"
#include "logging.hpp"

namespace fedreid {

std::vector<double> VolumeWeights(std::span<const RoundUpdate> updates) {
  if (updates.empty()) {
    Fail(ErrorCode::kEmptyAggregation, "no updates to aggregate");
  }
  double total = 0.0;
  for (const RoundUpdate &u : updates) {
    total += static_cast<double>(u.volume);
  }
  if (total == 0.0) {
    Fail(ErrorCode::kAggregation, "every selected client reported zero data volume");
  }
  std::vector<double> weights;
  weights.reserve(updates.size());
  for (const RoundUpdate &u : updates) {
    weights.push_back(static_cast<double>(u.volume) / total);
  }
  return weights;
}

std::vector<double> CdwWeights(std::span<const double> distances) {
  if (distances.empty()) {
    Fail(ErrorCode::kEmptyAggregation, "no distances to weight");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    if (!(distances[k] >= 0.0) || !std::isfinite(distances[k])) {
      Fail(ErrorCode::kInvalidArgument, "cosine distance " + std::to_string(k) + " is negative or non-finite");
    }
    total += distances[k];
  }
  const double n = static_cast<double>(distances.size());
  if (total == 0.0) {
    LogWarning("all cosine distances are zero; aggregating with uniform weights");
    return std::vector<double>(distances.size(), 1.0 / n);
  }
  std::vector<double> weights;
  weights.reserve(distances.size());
  for (double d : distances) {
    weights.push_back(d / total);
  }
  return weights;
}

AggregationResult AggregateWeighted(std::span<const RoundUpdate> updates, std::vector<double> weights) {
  std::vector<ParamVector> backbones;
  backbones.reserve(updates.size());
  for (const RoundUpdate &u : updates) {
    backbones.push_back(u.backbone);
  }
  AggregationResult out;
  out.backbone = WeightedSum(backbones, weights);
  out.weights = std::move(weights);
  return out;
}

AggregationResult AggregateVolume(std::span<const RoundUpdate> updates) {
  return AggregateWeighted(updates, VolumeWeights(updates));
}

AggregationResult AggregateCdw(std::span<const RoundUpdate> updates) {
  std::vector<double> distances;
  distances.reserve(updates.size());
  for (const RoundUpdate &u : updates) {
    distances.push_back(u.cosine_distance);
  }
  return AggregateWeighted(updates, CdwWeights(distances));
}

int ClusterAssignment::ClusterOf(int client_id) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (std::find(clusters[c].begin(), clusters[c].end(), client_id) != clusters[c].end()) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

std::vector<ClusterModel> AggregateClustered(std::span<const RoundUpdate> updates,
                                             const ClusterAssignment &assignment, bool use_cdw) {
  std::size_t assigned = 0;
  for (const auto &members : assignment.clusters) {
    assigned += members.size();
  }
  if (assigned != updates.size()) {
    Fail(ErrorCode::kAggregation, "cluster assignment covers " + std::to_string(assigned) + " clients but " +
                                      std::to_string(updates.size()) + " updates arrived");
  }
  std::vector<ClusterModel> out;
  for (const auto &members : assignment.clusters) {
    if (members.empty()) {
      Fail(ErrorCode::kAggregation, "empty cluster");
    }
    std::vector<RoundUpdate> group;
    for (int id : members) {
      const auto it = std::find_if(updates.begin(), updates.end(),
                                   [id](const RoundUpdate &u) { return u.client_id == id; });
      if (it == updates.end()) {
        Fail(ErrorCode::kAggregation, "cluster member " + std::to_string(id) + " has no update");
      }
      group.push_back(*it);
    }
    ClusterModel model;
    model.members = members;
    model.aggregate = use_cdw ? AggregateCdw(group) : AggregateVolume(group);
    out.push_back(std::move(model));
  }
  return out;
}

DistillationResult KdFinetune(const ParamVector &global_backbone, std::size_t input_dim, std::size_t hidden_dim,
                              std::span<const Sample> shared, std::span<const std::vector<double>> soft_labels,
                              double lr, std::size_t batch_size) {
  if (shared.empty()) {
    Fail(ErrorCode::kDistillation, "shared dataset is empty");
  }
  if (soft_labels.empty()) {
    Fail(ErrorCode::kDistillation, "no soft labels to distill");
  }
  if (batch_size == 0) {
    Fail(ErrorCode::kBatchSize, "distillation batch size must be positive");
  }
  const std::size_t rows = shared.size();
  const std::size_t width = rows * hidden_dim;
  for (std::size_t k = 0; k < soft_labels.size(); ++k) {
    if (soft_labels[k].size() != width) {
      Fail(ErrorCode::kDistillation, "soft labels " + std::to_string(k) + " have " +
                                         std::to_string(soft_labels[k].size()) + " values, expected " +
                                         std::to_string(width));
    }
  }

  DistillationResult out;
  // Running mean, so K identical soft labels average to exactly themselves.
  out.targets = soft_labels[0];
  for (std::size_t k = 1; k < soft_labels.size(); ++k) {
    const double inv = 1.0 / static_cast<double>(k + 1);
    for (std::size_t i = 0; i < width; ++i) {
      out.targets[i] += (soft_labels[k][i] - out.targets[i]) * inv;
    }
  }

  std::vector<double> features;
  features.reserve(rows * input_dim);
  for (const Sample &s : shared) {
    if (s.features.size() != input_dim) {
      Fail(ErrorCode::kDimension, "shared sample width does not match the backbone");
    }
    features.insert(features.end(), s.features.begin(), s.features.end());
  }

  Backbone backbone = Backbone::FromParams(input_dim, hidden_dim, global_backbone);
  out.mse_before = EmbeddingMseGradient(backbone, features, rows, out.targets).loss;
  for (std::size_t start = 0; start < rows; start += batch_size) {
    const std::size_t count = std::min(batch_size, rows - start);
    const EmbeddingMse step = EmbeddingMseGradient(
        backbone, std::span(features).subspan(start * input_dim, count * input_dim), count,
        std::span(out.targets).subspan(start * hidden_dim, count * hidden_dim));
    if (!AllFinite(step.grad_w1) || !AllFinite(step.grad_b1)) {
      Fail(ErrorCode::kDivergence, "non-finite distillation gradient");
    }
    for (std::size_t i = 0; i < backbone.w1.size(); ++i) {
      backbone.w1[i] -= lr * step.grad_w1[i];
    }
    for (std::size_t i = 0; i < backbone.b1.size(); ++i) {
      backbone.b1[i] -= lr * step.grad_b1[i];
    }
  }
  out.mse_after = EmbeddingMseGradient(backbone, features, rows, out.targets).loss;
  out.backbone = backbone.ToParams();
  return out;
}

}  // namespace fedreid
