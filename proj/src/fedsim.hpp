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

#ifndef FEDREID_FEDSIM_HPP_
#define FEDREID_FEDSIM_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numcore.hpp"

namespace fedreid {

// ---------------------------------------------------------------------------
// Uploads and server-side aggregation
// ---------------------------------------------------------------------------

/// What a client sends to the server after local training. Only the shared
/// backbone travels; the classifier stays on the client.
struct RoundUpdate {
  int client_id = 0;
  ParamVector backbone;
  std::size_t volume = 0;
  double cosine_distance = 0.0;            // logits before vs after training, in [0, 2]
  std::vector<double> cluster_features;    // shared-batch embeddings, CC only
  std::vector<double> soft_labels;         // shared-set embeddings, KD only
};

struct AggregationResult {
  ParamVector backbone;
  std::vector<double> weights;  // aligned with the input updates
};

/// n_k / n. Throws kAggregation when every volume is zero.
std::vector<double> VolumeWeights(std::span<const RoundUpdate> updates);

/// d_k / sum(d). Falls back to uniform weights (with a warning) when all
/// distances are zero; throws kInvalidArgument on a negative distance.
std::vector<double> CdwWeights(std::span<const double> distances);

AggregationResult AggregateWeighted(std::span<const RoundUpdate> updates, std::vector<double> weights);
AggregationResult AggregateVolume(std::span<const RoundUpdate> updates);
AggregationResult AggregateCdw(std::span<const RoundUpdate> updates);

struct ClusterAssignment {
  // Client ids per cluster, members ascending, clusters ordered by their
  // smallest member.
  std::vector<std::vector<int>> clusters;

  /// Index of the cluster holding `client_id`, or -1.
  int ClusterOf(int client_id) const;
};

struct ClientFeatures {
  int client_id = 0;
  std::vector<double> features;
};

/// First-neighbor clustering: each client links to its nearest other client
/// by cosine distance; clusters are the connected components of those links
/// (which also joins clients sharing a first neighbor). `merge_steps` > 1
/// repeats the procedure on cluster-mean features. Zero-norm features
/// become singletons with a warning.
ClusterAssignment ClusterClients(std::span<const ClientFeatures> features, int merge_steps = 1);

struct ClusterModel {
  std::vector<int> members;
  AggregationResult aggregate;
};

/// Aggregates each cluster on its own, with CDW or volume weights computed
/// over that cluster's members only.
std::vector<ClusterModel> AggregateClustered(std::span<const RoundUpdate> updates,
                                             const ClusterAssignment &assignment, bool use_cdw);

struct DistillationResult {
  ParamVector backbone;
  std::vector<double> targets;  // mean soft labels
  double mse_before = 0.0;
  double mse_after = 0.0;
};

/// Fine-tunes the backbone toward the mean of the clients' shared-set
/// embeddings: one in-order pass of plain gradient steps on embedding MSE
/// over mini-batches of `batch_size`.
DistillationResult KdFinetune(const ParamVector &global_backbone, std::size_t input_dim, std::size_t hidden_dim,
                              std::span<const Sample> shared, std::span<const std::vector<double>> soft_labels,
                              double lr, std::size_t batch_size);

// ---------------------------------------------------------------------------
// Clients
// ---------------------------------------------------------------------------

struct LocalTrainOptions {
  int local_epochs = 1;
  std::size_t batch_size = 32;
  SgdConfig sgd;
  bool compute_distance = true;
  bool extract_cluster_features = false;
  bool extract_soft_labels = false;
};

/// Read-only data every client sees during a round.
struct SharedContext {
  std::vector<double> batch_features;  // kSharedBatchSize x input_dim
  std::vector<double> dataset_features;  // shared_size x input_dim
  std::size_t dataset_rows = 0;

  static SharedContext From(const FederatedWorld &world);
};

class Client {
 public:
  /// Labels are remapped to [0, #identities) in ascending identity order.
  Client(int id, std::span<const Sample> train, std::size_t input_dim, std::size_t hidden_dim, Rng rng);

  int id() const noexcept { return id_; }
  std::size_t volume() const noexcept { return rows_; }
  std::size_t num_classes() const noexcept { return identities_.size(); }
  bool has_trained() const noexcept { return classifier_.has_value(); }

  /// Copies `incoming` into the local model, trains for the configured local
  /// epochs and returns the upload. The classifier is created on the first
  /// call and kept across rounds together with the optimizer state.
  RoundUpdate LocalTrain(const ParamVector &incoming, const SharedContext &shared, const LocalTrainOptions &options);

  /// Backbone after the most recent local training.
  const Backbone &local_backbone() const noexcept { return backbone_; }
  const std::optional<Classifier> &classifier() const noexcept { return classifier_; }
  const OptimizerState &optimizer_state() const noexcept { return optimizer_; }

  /// Number of mini-batches one epoch takes (the last one may be partial).
  std::size_t BatchesPerEpoch(std::size_t batch_size) const noexcept {
    return (rows_ + batch_size - 1) / batch_size;
  }

 private:
  int id_;
  std::size_t input_dim_;
  std::size_t hidden_dim_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<int> identities_;
  std::size_t rows_;
  Rng rng_;
  Backbone backbone_;
  std::optional<Classifier> classifier_;
  OptimizerState optimizer_;
};

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class Strategy { kFedPav, kFedPavCdw, kFedPavCc, kFedPavCcCdw, kFedPavKd, kFedPavKdCdw };

const char *StrategyName(Strategy strategy);
/// Accepts the names returned by StrategyName; throws kConfig otherwise.
Strategy ParseStrategy(const std::string &name);
bool UsesCdw(Strategy s);
bool UsesClustering(Strategy s);
bool UsesDistillation(Strategy s);

struct ExperimentConfig {
  Strategy strategy = Strategy::kFedPav;
  int rounds = 300;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  std::size_t clients = 9;            // N; the first N clients of the world take part
  std::size_t clients_per_round = 9;  // K
  std::uint64_t seed = 0;
  int eval_every = 10;
  int finch_steps = 1;
  int threads = 1;
  std::size_t hidden_dim = 8;
  SgdConfig sgd;
  double lr_kd = 0.0005;
};

/// Throws kConfig naming the field on an invalid config.
void ValidateExperimentConfig(const ExperimentConfig &config);

struct RoundRecord {
  int round = 0;  // 1-based
  std::vector<int> selected;
  std::vector<double> distances;                 // aligned with selected
  std::vector<std::vector<int>> clusters;        // CC only
  std::vector<std::vector<double>> weights;      // one vector per aggregation group
  std::optional<double> kd_mse_before;
  std::optional<double> kd_mse_after;
  std::uint64_t communication_bytes = 0;         // cumulative, whole fleet
  int aggregations = 0;
};

struct EvalRecord {
  int round = 0;  // rounds completed
  std::vector<RetrievalMetrics> global;  // per client: global (or its cluster's) model
  std::vector<RetrievalMetrics> local;   // per client: latest local model
  double mean_global_rank1 = 0.0;
  double mean_local_rank1 = 0.0;
  std::uint64_t communication_bytes = 0;
};

struct ClientSummary {
  int client = 0;
  std::size_t volume = 0;
  RetrievalMetrics global;
  RetrievalMetrics local;
};

struct MetricsReport {
  std::string kind;  // strategy name, "standalone" or "centralized"
  int rounds = 0;
  std::size_t model_bytes = 0;
  std::uint64_t communication_per_client = 0;
  std::uint64_t communication_total = 0;
  int aggregations = 0;
  std::vector<ClientSummary> clients;  // averaged over the three best evaluation points
  std::vector<int> best_global_rounds;
  std::vector<int> best_local_rounds;
  std::vector<RoundRecord> round_trace;
  std::vector<EvalRecord> eval_trace;
};

/// Models visible at an evaluation point, for checkpointing.
struct EvalSnapshot {
  int round = 0;
  int cumulative_epoch = 0;
  std::vector<const Backbone *> distributed;  // per client (shared for non-CC strategies)
  std::vector<const Backbone *> local;        // per client
  bool per_cluster = false;  // distributed models differ per client
};

struct RunObserver {
  std::function<void(const RoundRecord &)> on_round;
  std::function<void(const EvalRecord &, const EvalSnapshot &)> on_eval;
};

/// Average the three best evaluation points ranked by `key`, per client.
std::vector<RetrievalMetrics> AverageBest(std::span<const EvalRecord> evals, bool use_local, std::vector<int> *rounds);

MetricsReport RunExperiment(const ExperimentConfig &config, const FederatedWorld &world,
                            const RunObserver &observer = {});

/// Runs the round loop over caller-built clients. Used by RunExperiment and
/// by tests that need full control over client construction.
MetricsReport RunFederation(const ExperimentConfig &config, const FederatedWorld &world, std::vector<Client> &clients,
                            const RunObserver &observer = {});

/// Each client trains alone for rounds * local_epochs epochs.
MetricsReport RunStandalone(const ExperimentConfig &config, const FederatedWorld &world,
                            const RunObserver &observer = {});

/// One model on the union of all client shards for rounds * local_epochs epochs.
MetricsReport RunCentralized(const ExperimentConfig &config, const FederatedWorld &world,
                             const RunObserver &observer = {});

/// Backbone initialization shared by every run kind for a given seed.
Backbone InitialBackbone(const ExperimentConfig &config, std::size_t input_dim);
Rng ClientRng(std::uint64_t seed, int client_id);

}  // namespace fedreid

#endif  // FEDREID_FEDSIM_HPP_
