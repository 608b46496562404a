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
#include <numeric>
#include <set>
#include <string>

#include "errors.hpp"
#include "fedsim.hpp"
#include "logging.hpp"

namespace fedreid {

SharedContext SharedContext::From(const FederatedWorld &world) {
  SharedContext ctx;
  for (const Sample &s : world.SharedBatch()) {
    ctx.batch_features.insert(ctx.batch_features.end(), s.features.begin(), s.features.end());
  }
  for (const Sample &s : world.shared) {
    ctx.dataset_features.insert(ctx.dataset_features.end(), s.features.begin(), s.features.end());
  }
  ctx.dataset_rows = world.shared.size();
  return ctx;
}

Client::Client(int id, std::span<const Sample> train, std::size_t input_dim, std::size_t hidden_dim, Rng rng)
    : id_(id),
      input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      rows_(train.size()),
      rng_(std::move(rng)),
      backbone_(Backbone::Zeros(input_dim, hidden_dim)) {
  std::set<int> identity_set;
  for (const Sample &s : train) {
    if (s.identity < 0) {
      Fail(ErrorCode::kLabel, "client " + std::to_string(id) + " holds an unlabeled training sample");
    }
    if (s.features.size() != input_dim) {
      Fail(ErrorCode::kDimension, "client " + std::to_string(id) + " sample width " +
                                      std::to_string(s.features.size()) + " != " + std::to_string(input_dim));
    }
    identity_set.insert(s.identity);
  }
  identities_.assign(identity_set.begin(), identity_set.end());
  features_.reserve(rows_ * input_dim);
  labels_.reserve(rows_);
  for (const Sample &s : train) {
    features_.insert(features_.end(), s.features.begin(), s.features.end());
    const auto pos = std::lower_bound(identities_.begin(), identities_.end(), s.identity);
    labels_.push_back(static_cast<int>(pos - identities_.begin()));
  }
}

RoundUpdate Client::LocalTrain(const ParamVector &incoming, const SharedContext &shared,
                               const LocalTrainOptions &options) {
  if (incoming.size() != input_dim_ * hidden_dim_ + hidden_dim_) {
    Fail(ErrorCode::kDimension, "client " + std::to_string(id_) + ": incoming backbone has length " +
                                    std::to_string(incoming.size()));
  }
  if (options.batch_size == 0) {
    Fail(ErrorCode::kBatchSize, "batch size must be positive");
  }
  backbone_ = Backbone::FromParams(input_dim_, hidden_dim_, incoming);
  if (!classifier_) {
    classifier_ = Classifier::Random(hidden_dim_, identities_.size(), rng_);
    optimizer_ = OptimizerState::For(backbone_, *classifier_);
  }

  const Batch shared_batch{shared.batch_features, {}, kSharedBatchSize, input_dim_};
  std::vector<double> logits_before;
  if (options.compute_distance) {
    logits_before = ExtractLogits(backbone_, *classifier_, shared_batch);
  }

  std::vector<std::size_t> order(rows_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_features;
  std::vector<int> batch_labels;
  for (int epoch = 0; epoch < options.local_epochs; ++epoch) {
    rng_.Shuffle(std::span(order));
    for (std::size_t start = 0; start < rows_; start += options.batch_size) {
      const std::size_t count = std::min(options.batch_size, rows_ - start);
      batch_features.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < start + count; ++i) {
        const std::size_t row = order[i];
        batch_features.insert(batch_features.end(), features_.begin() + static_cast<std::ptrdiff_t>(row * input_dim_),
                              features_.begin() + static_cast<std::ptrdiff_t>((row + 1) * input_dim_));
        batch_labels.push_back(labels_[row]);
      }
      const Batch batch{batch_features, batch_labels, count, input_dim_};
      BackwardAndStep(backbone_, *classifier_, optimizer_, batch, options.sgd);
    }
    ++optimizer_.cumulative_epoch;
  }

  RoundUpdate update;
  update.client_id = id_;
  update.backbone = backbone_.ToParams();
  update.volume = rows_;
  if (options.compute_distance) {
    const std::vector<double> logits_after = ExtractLogits(backbone_, *classifier_, shared_batch);
    try {
      update.cosine_distance = CosineDistance(logits_before, logits_after);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kDegenerateVector) {
        throw;
      }
      LogWarning("client " + std::to_string(id_) + ": zero logits on the shared batch, using distance 0");
      update.cosine_distance = 0.0;
    }
  }
  if (options.extract_cluster_features) {
    update.cluster_features = ExtractFeatures(backbone_, shared_batch, kSharedBatchSize);
  }
  if (options.extract_soft_labels) {
    update.soft_labels = Embed(backbone_, shared.dataset_features, shared.dataset_rows);
  }
  return update;
}

}  // namespace fedreid
