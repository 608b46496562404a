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
#include <future>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "fedsim.hpp"
#include "logging.hpp"

namespace fedreid {

namespace {

constexpr std::size_t kBestPoints = 3;

struct StrategyEntry {
  Strategy strategy;
  const char *name;
};

constexpr StrategyEntry kStrategies[] = {
    {Strategy::kFedPav, "fedpav"},         {Strategy::kFedPavCdw, "fedpav+cdw"},
    {Strategy::kFedPavCc, "fedpav+cc"},    {Strategy::kFedPavCcCdw, "fedpav+cc+cdw"},
    {Strategy::kFedPavKd, "fedpav+kd"},    {Strategy::kFedPavKdCdw, "fedpav+kd+cdw"},
};

void Require(bool ok, const std::string &field, const std::string &what) {
  if (!ok) {
    Fail(ErrorCode::kConfig, field + ": " + what);
  }
}

bool IsEvalRound(const ExperimentConfig &config, int completed) {
  return completed % config.eval_every == 0 || completed == config.rounds;
}

std::size_t ModelBytes(const ExperimentConfig &config, std::size_t input_dim) {
  return (input_dim * config.hidden_dim + config.hidden_dim) * sizeof(double);
}

double MeanRank1(const std::vector<RetrievalMetrics> &metrics) {
  double sum = 0.0;
  for (const RetrievalMetrics &m : metrics) {
    sum += m.rank1;
  }
  return metrics.empty() ? 0.0 : sum / static_cast<double>(metrics.size());
}

// Top evaluation points by `score`, highest first; earlier rounds win ties.
std::vector<std::size_t> TopPoints(const std::vector<double> &score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(std::min(order.size(), kBestPoints));
  return order;
}

RetrievalMetrics MeanOf(const std::vector<const RetrievalMetrics *> &points) {
  RetrievalMetrics out = *points.front();
  out.rank1 = out.rank5 = out.rank10 = out.map = 0.0;
  for (const RetrievalMetrics *m : points) {
    out.rank1 += m->rank1;
    out.rank5 += m->rank5;
    out.rank10 += m->rank10;
    out.map += m->map;
  }
  const double n = static_cast<double>(points.size());
  out.rank1 /= n;
  out.rank5 /= n;
  out.rank10 /= n;
  out.map /= n;
  return out;
}

void CheckWorld(const ExperimentConfig &config, const FederatedWorld &world) {
  if (world.clients.size() < config.clients) {
    Fail(ErrorCode::kConfig, "clients: world has " + std::to_string(world.clients.size()) + " clients, config asks for " +
                                 std::to_string(config.clients));
  }
  const bool needs_shared =
      UsesCdw(config.strategy) || UsesClustering(config.strategy) || UsesDistillation(config.strategy);
  if (needs_shared && world.shared.size() < kSharedBatchSize) {
    Fail(ErrorCode::kConfig, std::string("strategy: ") + StrategyName(config.strategy) + " needs at least " +
                                 std::to_string(kSharedBatchSize) + " shared samples");
  }
}

EvalRecord EvaluateClients(const FederatedWorld &world, std::size_t n, int round,
                           const std::vector<Backbone> &distributed, const std::vector<Backbone> &local,
                           std::uint64_t communication_bytes) {
  EvalRecord record;
  record.round = round;
  record.communication_bytes = communication_bytes;
  for (std::size_t i = 0; i < n; ++i) {
    const ClientData &c = world.clients[i];
    record.global.push_back(Evaluate(distributed[i], c.query, c.gallery));
    record.local.push_back(Evaluate(local[i], c.query, c.gallery));
  }
  record.mean_global_rank1 = MeanRank1(record.global);
  record.mean_local_rank1 = MeanRank1(record.local);
  return record;
}

EvalSnapshot MakeSnapshot(int round, int cumulative_epoch, const std::vector<Backbone> &distributed,
                          const std::vector<Backbone> &local, bool per_cluster) {
  EvalSnapshot snapshot;
  snapshot.round = round;
  snapshot.cumulative_epoch = cumulative_epoch;
  snapshot.per_cluster = per_cluster;
  for (const Backbone &b : distributed) {
    snapshot.distributed.push_back(&b);
  }
  for (const Backbone &b : local) {
    snapshot.local.push_back(&b);
  }
  return snapshot;
}

void FillSummaries(MetricsReport &report, const FederatedWorld &world, std::size_t n) {
  const std::vector<RetrievalMetrics> global = AverageBest(report.eval_trace, false, &report.best_global_rounds);
  const std::vector<RetrievalMetrics> local = AverageBest(report.eval_trace, true, &report.best_local_rounds);
  for (std::size_t i = 0; i < n; ++i) {
    report.clients.push_back({static_cast<int>(i), world.clients[i].volume(), global[i], local[i]});
  }
}

RoundUpdate TrainOne(Client &client, const ParamVector &incoming, const SharedContext &shared,
                     const LocalTrainOptions &options, int round) {
  try {
    return client.LocalTrain(incoming, shared, options);
  } catch (const Error &e) {
    Fail(e.code(), "round " + std::to_string(round + 1) + ", client " + std::to_string(client.id()) + ": " + e.what());
  }
}

// Trains the selected clients, in parallel batches of `threads`. Results
// keep the order of `selected` regardless of completion order.
std::vector<RoundUpdate> TrainSelected(std::vector<Client> &clients, const std::vector<int> &selected,
                                       const std::vector<ParamVector> &assigned, const SharedContext &shared,
                                       const LocalTrainOptions &options, int round, int threads) {
  std::vector<RoundUpdate> updates;
  updates.reserve(selected.size());
  if (threads <= 1) {
    for (int id : selected) {
      updates.push_back(TrainOne(clients[id], assigned[id], shared, options, round));
    }
    return updates;
  }
  for (std::size_t start = 0; start < selected.size(); start += static_cast<std::size_t>(threads)) {
    const std::size_t end = std::min(selected.size(), start + static_cast<std::size_t>(threads));
    std::vector<std::future<RoundUpdate>> pending;
    for (std::size_t s = start; s < end; ++s) {
      const int id = selected[s];
      pending.push_back(std::async(std::launch::async, [&, id] {
        return TrainOne(clients[id], assigned[id], shared, options, round);
      }));
    }
    for (auto &f : pending) {
      updates.push_back(f.get());
    }
  }
  return updates;
}

}  // namespace

const char *StrategyName(Strategy strategy) {
  for (const StrategyEntry &e : kStrategies) {
    if (e.strategy == strategy) {
      return e.name;
    }
  }
  return "unknown";
}

Strategy ParseStrategy(const std::string &name) {
  for (const StrategyEntry &e : kStrategies) {
    if (name == e.name) {
      return e.strategy;
    }
  }
  std::string known;
  for (const StrategyEntry &e : kStrategies) {
    known += known.empty() ? "" : ", ";
    known += e.name;
  }
  Fail(ErrorCode::kConfig, "strategy: unknown value '" + name + "' (expected one of " + known + ")");
}

bool UsesCdw(Strategy s) {
  return s == Strategy::kFedPavCdw || s == Strategy::kFedPavCcCdw || s == Strategy::kFedPavKdCdw;
}

bool UsesClustering(Strategy s) { return s == Strategy::kFedPavCc || s == Strategy::kFedPavCcCdw; }

bool UsesDistillation(Strategy s) { return s == Strategy::kFedPavKd || s == Strategy::kFedPavKdCdw; }

void ValidateExperimentConfig(const ExperimentConfig &c) {
  Require(c.rounds >= 1, "rounds", "must be >= 1");
  Require(c.local_epochs >= 1, "local_epochs", "must be >= 1");
  Require(c.batch_size >= 1, "batch_size", "must be >= 1");
  Require(c.clients >= 1, "clients", "must be >= 1");
  Require(c.clients_per_round >= 1, "clients_per_round", "must be >= 1");
  Require(c.clients_per_round <= c.clients, "clients_per_round", "must not exceed clients");
  Require(c.eval_every >= 1, "eval_every", "must be >= 1");
  Require(c.finch_steps >= 1, "finch_steps", "must be >= 1");
  Require(c.threads >= 1, "threads", "must be >= 1");
  Require(c.hidden_dim >= 1, "hidden_dim", "must be >= 1");
  Require(std::isfinite(c.sgd.lr_backbone) && c.sgd.lr_backbone >= 0.0, "sgd.lr_backbone", "must be finite and >= 0");
  Require(std::isfinite(c.sgd.lr_classifier) && c.sgd.lr_classifier >= 0.0, "sgd.lr_classifier",
          "must be finite and >= 0");
  Require(c.sgd.momentum >= 0.0 && c.sgd.momentum < 1.0, "sgd.momentum", "must be in [0, 1)");
  Require(std::isfinite(c.sgd.weight_decay) && c.sgd.weight_decay >= 0.0, "sgd.weight_decay",
          "must be finite and >= 0");
  Require(c.sgd.step_size >= 1, "sgd.step_size", "must be >= 1");
  Require(c.sgd.gamma > 0.0 && c.sgd.gamma <= 1.0, "sgd.gamma", "must be in (0, 1]");
  Require(std::isfinite(c.lr_kd) && c.lr_kd >= 0.0, "lr_kd", "must be finite and >= 0");
}

Backbone InitialBackbone(const ExperimentConfig &config, std::size_t input_dim) {
  Rng rng = Rng::Derive(config.seed, 2);
  return Backbone::Random(input_dim, config.hidden_dim, rng);
}

Rng ClientRng(std::uint64_t seed, int client_id) { return Rng::Derive(seed, 100 + static_cast<std::uint64_t>(client_id)); }

std::vector<RetrievalMetrics> AverageBest(std::span<const EvalRecord> evals, bool use_local, std::vector<int> *rounds) {
  if (evals.empty()) {
    Fail(ErrorCode::kInvalidArgument, "no evaluation points to average");
  }
  std::vector<double> score;
  for (const EvalRecord &e : evals) {
    score.push_back(use_local ? e.mean_local_rank1 : e.mean_global_rank1);
  }
  const std::vector<std::size_t> top = TopPoints(score);
  if (rounds != nullptr) {
    rounds->clear();
    for (std::size_t p : top) {
      rounds->push_back(evals[p].round);
    }
  }
  const std::size_t n = evals.front().global.size();
  std::vector<RetrievalMetrics> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<const RetrievalMetrics *> points;
    for (std::size_t p : top) {
      points.push_back(use_local ? &evals[p].local[i] : &evals[p].global[i]);
    }
    out.push_back(MeanOf(points));
  }
  return out;
}

MetricsReport RunFederation(const ExperimentConfig &config, const FederatedWorld &world, std::vector<Client> &clients,
                            const RunObserver &observer) {
  ValidateExperimentConfig(config);
  CheckWorld(config, world);
  if (clients.size() < config.clients) {
    Fail(ErrorCode::kConfig, "clients: only " + std::to_string(clients.size()) + " clients were built");
  }
  const std::size_t n = config.clients;
  const std::size_t k = config.clients_per_round;
  const std::size_t input_dim = world.input_dim;
  const Strategy strategy = config.strategy;
  const bool cluster = UsesClustering(strategy);
  const bool distill = UsesDistillation(strategy);
  const bool cdw = UsesCdw(strategy);

  const SharedContext shared = SharedContext::From(world);
  LocalTrainOptions options;
  options.local_epochs = config.local_epochs;
  options.batch_size = config.batch_size;
  options.sgd = config.sgd;
  options.compute_distance = world.shared.size() >= kSharedBatchSize;
  options.extract_cluster_features = cluster;
  options.extract_soft_labels = distill;

  MetricsReport report;
  report.kind = StrategyName(strategy);
  report.rounds = config.rounds;
  report.model_bytes = ModelBytes(config, input_dim);
  report.communication_per_client = CommunicationCost(static_cast<std::uint64_t>(config.rounds), report.model_bytes, 1);
  report.communication_total = CommunicationCost(static_cast<std::uint64_t>(config.rounds), report.model_bytes, k);

  // assigned[i]: backbone client i receives next round (its cluster's model under CC).
  const ParamVector initial = InitialBackbone(config, input_dim).ToParams();
  std::vector<ParamVector> assigned(n, initial);
  Rng selector = Rng::Derive(config.seed, 1);
  std::uint64_t communication = 0;

  for (int round = 0; round < config.rounds; ++round) {
    std::vector<int> selected;
    for (std::size_t idx : ChooseK(selector, n, k)) {
      selected.push_back(static_cast<int>(idx));
    }
    std::sort(selected.begin(), selected.end());

    const std::vector<RoundUpdate> updates =
        TrainSelected(clients, selected, assigned, shared, options, round, config.threads);

    RoundRecord record;
    record.round = round + 1;
    record.selected = selected;
    for (const RoundUpdate &u : updates) {
      record.distances.push_back(u.cosine_distance);
    }

    if (cluster) {
      ClusterAssignment assignment;
      if (updates.size() >= 2) {
        std::vector<ClientFeatures> features;
        for (const RoundUpdate &u : updates) {
          features.push_back({u.client_id, u.cluster_features});
        }
        assignment = ClusterClients(features, config.finch_steps);
      } else {
        assignment.clusters = {selected};
      }
      for (const ClusterModel &m : AggregateClustered(updates, assignment, cdw)) {
        for (int id : m.members) {
          assigned[id] = m.aggregate.backbone;
        }
        record.weights.push_back(m.aggregate.weights);
        ++record.aggregations;
      }
      record.clusters = assignment.clusters;
    } else {
      AggregationResult aggregate = cdw ? AggregateCdw(updates) : AggregateVolume(updates);
      ParamVector global = aggregate.backbone;
      if (distill) {
        std::vector<std::vector<double>> soft_labels;
        for (const RoundUpdate &u : updates) {
          soft_labels.push_back(u.soft_labels);
        }
        try {
          DistillationResult kd = KdFinetune(global, input_dim, config.hidden_dim, world.shared, soft_labels,
                                             config.lr_kd, config.batch_size);
          record.kd_mse_before = kd.mse_before;
          record.kd_mse_after = kd.mse_after;
          global = kd.backbone;
        } catch (const Error &e) {
          Fail(e.code(), "round " + std::to_string(round + 1) + ", server distillation: " + e.what());
        }
      }
      std::fill(assigned.begin(), assigned.end(), global);
      record.weights.push_back(aggregate.weights);
      record.aggregations = 1;
    }

    communication += CommunicationCost(1, report.model_bytes, k);
    record.communication_bytes = communication;
    report.aggregations += record.aggregations;
    if (observer.on_round) {
      observer.on_round(record);
    }
    report.round_trace.push_back(std::move(record));

    const int completed = round + 1;
    if (IsEvalRound(config, completed)) {
      std::vector<Backbone> distributed;
      std::vector<Backbone> local;
      for (std::size_t i = 0; i < n; ++i) {
        distributed.push_back(Backbone::FromParams(input_dim, config.hidden_dim, assigned[i]));
        // A client that has not been selected yet only holds the distributed model.
        local.push_back(clients[i].has_trained() ? clients[i].local_backbone() : distributed.back());
      }
      EvalRecord eval = EvaluateClients(world, n, completed, distributed, local, communication);
      if (observer.on_eval) {
        observer.on_eval(eval, MakeSnapshot(completed, completed * config.local_epochs, distributed, local, cluster));
      }
      report.eval_trace.push_back(std::move(eval));
    }
  }
  FillSummaries(report, world, n);
  return report;
}

MetricsReport RunExperiment(const ExperimentConfig &config, const FederatedWorld &world, const RunObserver &observer) {
  ValidateExperimentConfig(config);
  CheckWorld(config, world);
  std::vector<Client> clients;
  for (std::size_t i = 0; i < config.clients; ++i) {
    clients.emplace_back(static_cast<int>(i), world.clients[i].train, world.input_dim, config.hidden_dim,
                         ClientRng(config.seed, static_cast<int>(i)));
  }
  return RunFederation(config, world, clients, observer);
}

MetricsReport RunStandalone(const ExperimentConfig &config, const FederatedWorld &world, const RunObserver &observer) {
  ValidateExperimentConfig(config);
  CheckWorld(config, world);
  const std::size_t n = config.clients;
  const std::size_t input_dim = world.input_dim;
  LocalTrainOptions options;
  options.local_epochs = config.local_epochs;
  options.batch_size = config.batch_size;
  options.sgd = config.sgd;
  options.compute_distance = false;
  const SharedContext shared = SharedContext::From(world);

  std::vector<Client> clients;
  std::vector<ParamVector> current;
  const ParamVector initial = InitialBackbone(config, input_dim).ToParams();
  for (std::size_t i = 0; i < n; ++i) {
    clients.emplace_back(static_cast<int>(i), world.clients[i].train, input_dim, config.hidden_dim,
                         ClientRng(config.seed, static_cast<int>(i)));
    current.push_back(initial);
  }
  std::vector<int> everyone(n);
  std::iota(everyone.begin(), everyone.end(), 0);

  MetricsReport report;
  report.kind = "standalone";
  report.rounds = config.rounds;
  report.model_bytes = ModelBytes(config, input_dim);
  for (int round = 0; round < config.rounds; ++round) {
    const std::vector<RoundUpdate> updates =
        TrainSelected(clients, everyone, current, shared, options, round, config.threads);
    for (std::size_t i = 0; i < n; ++i) {
      current[i] = updates[i].backbone;
    }
    RoundRecord record;
    record.round = round + 1;
    record.selected = everyone;
    if (observer.on_round) {
      observer.on_round(record);
    }
    report.round_trace.push_back(std::move(record));

    const int completed = round + 1;
    if (IsEvalRound(config, completed)) {
      std::vector<Backbone> models;
      for (std::size_t i = 0; i < n; ++i) {
        models.push_back(clients[i].local_backbone());
      }
      EvalRecord eval = EvaluateClients(world, n, completed, models, models, 0);
      if (observer.on_eval) {
        observer.on_eval(eval, MakeSnapshot(completed, completed * config.local_epochs, models, models, true));
      }
      report.eval_trace.push_back(std::move(eval));
    }
  }

  // Each client keeps its own three best points.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> score;
    for (const EvalRecord &e : report.eval_trace) {
      score.push_back(e.local[i].rank1);
    }
    std::vector<const RetrievalMetrics *> points;
    for (std::size_t p : TopPoints(score)) {
      points.push_back(&report.eval_trace[p].local[i]);
    }
    const RetrievalMetrics best = MeanOf(points);
    report.clients.push_back({static_cast<int>(i), world.clients[i].volume(), best, best});
  }
  return report;
}

MetricsReport RunCentralized(const ExperimentConfig &config, const FederatedWorld &world, const RunObserver &observer) {
  ValidateExperimentConfig(config);
  CheckWorld(config, world);
  const std::size_t n = config.clients;
  const std::size_t input_dim = world.input_dim;
  std::vector<Sample> pooled;
  for (std::size_t i = 0; i < n; ++i) {
    pooled.insert(pooled.end(), world.clients[i].train.begin(), world.clients[i].train.end());
  }
  LocalTrainOptions options;
  options.local_epochs = config.local_epochs;
  options.batch_size = config.batch_size;
  options.sgd = config.sgd;
  options.compute_distance = false;
  const SharedContext shared = SharedContext::From(world);

  // Same seeding as client 0, so a one-client world reproduces its standalone run.
  Client central(0, pooled, input_dim, config.hidden_dim, ClientRng(config.seed, 0));
  ParamVector current = InitialBackbone(config, input_dim).ToParams();

  MetricsReport report;
  report.kind = "centralized";
  report.rounds = config.rounds;
  report.model_bytes = ModelBytes(config, input_dim);
  for (int round = 0; round < config.rounds; ++round) {
    current = TrainOne(central, current, shared, options, round).backbone;
    RoundRecord record;
    record.round = round + 1;
    record.selected = {0};
    if (observer.on_round) {
      observer.on_round(record);
    }
    report.round_trace.push_back(std::move(record));

    const int completed = round + 1;
    if (IsEvalRound(config, completed)) {
      const std::vector<Backbone> models(n, central.local_backbone());
      EvalRecord eval = EvaluateClients(world, n, completed, models, models, 0);
      if (observer.on_eval) {
        observer.on_eval(eval, MakeSnapshot(completed, completed * config.local_epochs, models, models, false));
      }
      report.eval_trace.push_back(std::move(eval));
    }
  }
  FillSummaries(report, world, n);
  return report;
}

}  // namespace fedreid
