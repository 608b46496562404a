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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance            run all criteria
//   acceptance --only 8   run one criterion

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "config.hpp"
#include "fedsim.hpp"
#include "logging.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "runio.hpp"

namespace fedreid {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char *name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string Format(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::vector<double> Normals(Rng &rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double &x : v) {
    x = scale * rng.Normal();
  }
  return v;
}

std::size_t Between(Rng &rng, std::size_t lo, std::size_t hi) { return lo + rng.UniformInt(hi - lo + 1); }

// ---------------------------------------------------------------------------
// 1. Gradient oracle
// ---------------------------------------------------------------------------

constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kGradientTolerance = 1e-6;
// Instances with a pre-activation this close to the ReLU kink are redrawn:
// a central difference straddling the kink measures a different function.
constexpr double kKinkMargin = 1e-3;

Outcome GradientOracle() {
  Rng rng(1001);
  double worst = 0.0;
  int checked = 0;
  int redrawn = 0;
  while (checked < 100) {
    const std::size_t d = Between(rng, 2, 8);
    const std::size_t h = Between(rng, 2, 6);
    const std::size_t c = Between(rng, 2, 6);
    const std::size_t rows = Between(rng, 1, 8);
    Backbone bb = Backbone::FromParams(d, h, ParamVector(Normals(rng, d * h + h, 0.7)));
    Classifier cl = Classifier::FromParams(h, c, ParamVector(Normals(rng, h * c + c, 0.7)));
    std::vector<double> x = Normals(rng, rows * d);
    std::vector<int> labels;
    for (std::size_t r = 0; r < rows; ++r) {
      labels.push_back(static_cast<int>(rng.UniformInt(c)));
    }
    if (oracle::KinkMargin(bb, x, rows) < kKinkMargin) {
      ++redrawn;
      continue;
    }
    const Batch batch{x, labels, rows, d};
    const Gradients g = ComputeGradients(bb, cl, batch, Forward(bb, cl, batch));
    auto loss = [&](const Backbone &b, const Classifier &k) { return oracle::CrossEntropy(b, k, x, labels); };
    worst = std::max(worst, oracle::MaxGradientError(bb, cl, g, loss, kFiniteDifferenceStep));
    ++checked;
  }
  return {worst < kGradientTolerance,
          Format("max relative error %.2e (limit %.0e) over %d instances, %d redrawn near a kink", worst,
                 kGradientTolerance, checked, redrawn)};
}

// ---------------------------------------------------------------------------
// 2. Aggregation algebra
// ---------------------------------------------------------------------------

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kHullSlack = 1e-12;  // relative, for rounding in the weighted sum
constexpr double kUniformTolerance = 1e-12;

struct AlgebraTally {
  double worst_sum = 0.0;
  double worst_hull = 0.0;  // largest excursion outside [min, max], relative
  void Weights(std::span<const double> w) {
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
  }
  void Hull(const ParamVector &aggregate, const std::vector<const RoundUpdate *> &members) {
    for (std::size_t i = 0; i < aggregate.size(); ++i) {
      double lo = members[0]->backbone[i];
      double hi = lo;
      for (const RoundUpdate *u : members) {
        lo = std::min(lo, u->backbone[i]);
        hi = std::max(hi, u->backbone[i]);
      }
      const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
      const double v = aggregate[i];
      const double out = v < lo ? lo - v : (v > hi ? v - hi : 0.0);
      worst_hull = std::max(worst_hull, out / scale);
    }
  }
};

Outcome AggregationAlgebra() {
  Rng rng(1002);
  const std::array<Strategy, 6> strategies = {Strategy::kFedPav,   Strategy::kFedPavCdw,   Strategy::kFedPavCc,
                                              Strategy::kFedPavCcCdw, Strategy::kFedPavKd, Strategy::kFedPavKdCdw};
  AlgebraTally tally;
  double worst_uniform = 0.0;
  int sets = 0;
  for (Strategy strategy : strategies) {
    const bool cdw = UsesCdw(strategy);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t k = Between(rng, 1, 12);
      const std::size_t len = Between(rng, 1, 40);
      std::vector<RoundUpdate> updates(k);
      for (std::size_t i = 0; i < k; ++i) {
        updates[i].client_id = static_cast<int>(i);
        updates[i].backbone = ParamVector(Normals(rng, len, 1.0 + 10.0 * rng.Uniform()));
        updates[i].volume = Between(rng, 1, 5000);
        updates[i].cosine_distance = 2.0 * rng.Uniform() + 1e-9;
        updates[i].cluster_features = Normals(rng, 4);
      }
      std::vector<const RoundUpdate *> all;
      for (const RoundUpdate &u : updates) {
        all.push_back(&u);
      }
      if (UsesClustering(strategy)) {
        std::vector<ClientFeatures> features;
        for (const RoundUpdate &u : updates) {
          features.push_back({u.client_id, u.cluster_features});
        }
        ClusterAssignment assignment;
        if (k >= 2) {
          assignment = ClusterClients(features, 1);
        } else {
          assignment.clusters = {{0}};
        }
        for (const ClusterModel &m : AggregateClustered(updates, assignment, cdw)) {
          std::vector<const RoundUpdate *> members;
          for (int id : m.members) {
            members.push_back(&updates[static_cast<std::size_t>(id)]);
          }
          tally.Weights(m.aggregate.weights);
          tally.Hull(m.aggregate.backbone, members);
        }
      } else {
        // KD strategies aggregate with the fedpav or CDW rule before the
        // server fine-tune.
        const AggregationResult r = cdw ? AggregateCdw(updates) : AggregateVolume(updates);
        tally.Weights(r.weights);
        tally.Hull(r.backbone, all);
      }
      ++sets;

      if (strategy == Strategy::kFedPavCdw) {
        std::vector<RoundUpdate> equal = updates;
        const double d = equal[0].cosine_distance;
        for (RoundUpdate &u : equal) {
          u.cosine_distance = d;
        }
        const AggregationResult r = AggregateCdw(equal);
        for (std::size_t i = 0; i < len; ++i) {
          double mean = 0.0;
          for (const RoundUpdate &u : equal) {
            mean += u.backbone[i];
          }
          mean /= static_cast<double>(k);
          worst_uniform = std::max(worst_uniform, std::abs(r.backbone[i] - mean));
        }
      }
    }
  }

  // The same properties on the weights the round loop actually used.
  double worst_run_sum = 0.0;
  WorldConfig wc;
  wc.volume_ratios = {5, 3, 2, 1, 1};
  wc.train_identities = {8, 6, 5, 4, 3};
  wc.cameras = {3, 3, 2, 2, 2};
  wc.groups = {0, 0, 1, 1, 0};
  wc.group_count = 2;
  wc.total_train_samples = 300;
  wc.test_identities = 10;
  wc.seed = 12;
  const FederatedWorld world = GenerateWorld(wc);
  for (Strategy strategy : strategies) {
    ExperimentConfig ec;
    ec.strategy = strategy;
    ec.rounds = 4;
    ec.clients = 5;
    ec.clients_per_round = 4;
    ec.eval_every = 100;
    ec.seed = 12;
    for (const RoundRecord &rec : RunExperiment(ec, world).round_trace) {
      for (const auto &w : rec.weights) {
        worst_run_sum = std::max(worst_run_sum, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
      }
    }
  }

  const bool pass = tally.worst_sum <= kWeightSumTolerance && tally.worst_hull <= kHullSlack &&
                    worst_uniform <= kUniformTolerance && worst_run_sum <= kWeightSumTolerance;
  return {pass, Format("%d update sets over 6 strategies: |sum w - 1| <= %.1e, hull excursion %.1e, "
                       "equal-d CDW vs uniform %.1e, in-run |sum w - 1| <= %.1e (limits 1e-12)",
                       sets, tally.worst_sum, tally.worst_hull, worst_uniform, worst_run_sum)};
}

// ---------------------------------------------------------------------------
// 3. Clustering oracle
// ---------------------------------------------------------------------------

Outcome ClusteringOracle() {
  Rng rng(1003);
  int agree = 0;
  constexpr int kSets = 1000;
  for (int trial = 0; trial < kSets; ++trial) {
    const std::size_t k = Between(rng, 2, 16);
    const std::size_t dim = Between(rng, 2, 8);
    std::vector<std::vector<double>> rows;
    std::vector<ClientFeatures> features;
    for (std::size_t i = 0; i < k; ++i) {
      rows.push_back(Normals(rng, dim));
      features.push_back({static_cast<int>(i), rows.back()});
    }
    const ClusterAssignment got = ClusterClients(features, 1);
    std::vector<int> labels;
    for (std::size_t i = 0; i < k; ++i) {
      labels.push_back(got.ClusterOf(static_cast<int>(i)));
    }
    agree += oracle::SamePartition(labels, oracle::FirstNeighborComponents(rows)) ? 1 : 0;
  }
  return {agree == kSets, Format("%d/%d random feature sets (K in [2, 16]) match brute force", agree, kSets)};
}

// ---------------------------------------------------------------------------
// 4. CDW formula fixtures
// ---------------------------------------------------------------------------

Outcome CdwFixtures() {
  const std::vector<double> e1 = {1.0, 0.0}, e2 = {0.0, 1.0}, neg = {-1.0, 0.0};
  const double orthogonal = CosineDistance(e1, e2);
  const double antiparallel = CosineDistance(e1, neg);
  const std::vector<double> w = CdwWeights(std::vector<double>{1.0, 3.0});
  bool pass = orthogonal == 1.0 && antiparallel == 2.0 && w.size() == 2 && w[0] == 0.25 && w[1] == 0.75;

  // d = 1 - cos and p = d / sum(d), against the oracle on random logits.
  Rng rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = Between(rng, 1, 9);
    const std::size_t len = Between(rng, 2, 64);
    std::vector<double> d;
    for (std::size_t i = 0; i < k; ++i) {
      const auto before = Normals(rng, len);
      const auto after = Normals(rng, len);
      const double got = CosineDistance(before, after);
      worst = std::max(worst, std::abs(got - oracle::CosineDist(before, after)));
      d.push_back(got);
    }
    const double total = std::accumulate(d.begin(), d.end(), 0.0);
    const auto p = CdwWeights(d);
    for (std::size_t i = 0; i < k; ++i) {
      worst = std::max(worst, std::abs(p[i] - d[i] / total));
    }
  }
  pass = pass && worst <= 1e-12;
  return {pass, Format("d([1,0],[0,1]) = %g, d(a,-a) = %g, cdw([1,3]) = [%g, %g]; random logits vs formula %.1e "
                       "(limit 1e-12)",
                       orthogonal, antiparallel, w[0], w[1], worst)};
}

// ---------------------------------------------------------------------------
// 5. Benchmark volume skew
// ---------------------------------------------------------------------------

constexpr double kSkewTolerance = 0.005;

Outcome WeightSkew() {
  const std::array<std::size_t, 9> volumes = {32621, 16522, 12936, 7365, 3744, 1940, 632, 450, 248};
  std::vector<RoundUpdate> updates;
  for (std::size_t k = 0; k < volumes.size(); ++k) {
    RoundUpdate u;
    u.client_id = static_cast<int>(k);
    u.backbone = ParamVector(std::vector<double>{static_cast<double>(k)});
    u.volume = volumes[k];
    updates.push_back(u);
  }
  const AggregationResult r = AggregateVolume(updates);
  const double largest = r.weights.front();
  const double smallest = r.weights.back();
  const bool pass = std::abs(largest - 0.42) <= kSkewTolerance && std::abs(smallest - 0.003) <= kSkewTolerance;
  return {pass, Format("largest %.5f (target 0.42 +- %.3f), smallest %.5f (target 0.003 +- %.3f)", largest,
                       kSkewTolerance, smallest, kSkewTolerance)};
}

// ---------------------------------------------------------------------------
// 6, 7. Non-IID and CDW trends on the benchmark-like world
// ---------------------------------------------------------------------------

constexpr int kTrendSeeds = 5;
constexpr int kTrendRequired = 4;

struct TrendRuns {
  MetricsReport standalone, fedpav, cdw;
};

ExperimentConfig TrendProtocol(std::uint64_t seed) {
  ExperimentConfig ec;
  ec.rounds = 30;
  ec.local_epochs = 1;
  ec.batch_size = 32;
  ec.seed = seed;
  return ec;
}

// Default world: nine clients, benchmark volume ratios, domain shift 0.6.
FederatedWorld TrendWorld(std::uint64_t seed) {
  RunConfig rc = DefaultRunConfig();
  rc.world.seed = seed;
  return BuildWorld(rc);
}

TrendRuns RunTrend(std::uint64_t seed, bool with_cdw) {
  const FederatedWorld world = TrendWorld(seed);
  ExperimentConfig ec = TrendProtocol(seed);
  TrendRuns runs;
  runs.standalone = RunStandalone(ec, world);
  ec.strategy = Strategy::kFedPav;
  runs.fedpav = RunExperiment(ec, world);
  if (with_cdw) {
    ec.strategy = Strategy::kFedPavCdw;
    runs.cdw = RunExperiment(ec, world);
  }
  return runs;
}

Outcome NonIidTrend() {
  int ok = 0;
  std::string per_seed;
  for (int seed = 0; seed < kTrendSeeds; ++seed) {
    const TrendRuns r = RunTrend(static_cast<std::uint64_t>(seed), false);
    const auto &sa = r.standalone.clients;
    const auto &fp = r.fedpav.clients;
    // Clients are ordered by volume: 0 and 1 are the largest, 6..8 the smallest.
    bool pass = fp[0].global.rank1 < sa[0].local.rank1 && fp[1].global.rank1 < sa[1].local.rank1;
    for (std::size_t k = 6; k < 9; ++k) {
      pass = pass && fp[k].local.rank1 > sa[k].local.rank1;
    }
    ok += pass ? 1 : 0;
    per_seed += pass ? "+" : "-";
  }
  return {ok >= kTrendRequired, Format("%d/%d seeds (need %d) [%s]", ok, kTrendSeeds, kTrendRequired,
                                       per_seed.c_str())};
}

Outcome CdwTrend() {
  int ok = 0;
  double mean_gain = 0.0;
  double largest_gain = 0.0;
  std::string per_seed;
  for (int seed = 0; seed < kTrendSeeds; ++seed) {
    const TrendRuns r = RunTrend(static_cast<std::uint64_t>(seed), true);
    double fp_mean = 0.0, cdw_mean = 0.0;
    for (std::size_t k = 0; k < 9; ++k) {
      fp_mean += r.fedpav.clients[k].local.rank1 / 9.0;
      cdw_mean += r.cdw.clients[k].local.rank1 / 9.0;
    }
    const double sa0 = r.standalone.clients[0].local.rank1;
    const double fp_delta = r.fedpav.clients[0].local.rank1 - sa0;
    const double cdw_delta = r.cdw.clients[0].local.rank1 - sa0;
    const bool pass = cdw_mean >= fp_mean && cdw_delta > fp_delta;
    ok += pass ? 1 : 0;
    per_seed += pass ? "+" : "-";
    mean_gain += (cdw_mean - fp_mean) / kTrendSeeds;
    largest_gain += (cdw_delta - fp_delta) / kTrendSeeds;
  }
  return {ok >= kTrendRequired,
          Format("%d/%d seeds (need %d) [%s]; mean rank-1 change %+.4f, largest client delta change %+.4f", ok,
                 kTrendSeeds, kTrendRequired, per_seed.c_str(), mean_gain, largest_gain)};
}

// ---------------------------------------------------------------------------
// 8. CC structure recovery
// ---------------------------------------------------------------------------

Outcome ClusterRecovery() {
  constexpr int kSeeds = 20;
  constexpr int kRequired = 18;  // 90%
  int ok = 0;
  std::string counts;
  for (int seed = 0; seed < kSeeds; ++seed) {
    // Two super-groups of three balanced clients.
    WorldConfig wc;
    for (int k = 0; k < 6; ++k) {
      wc.volume_ratios.push_back(1.0);
      wc.train_identities.push_back(50);
      wc.cameras.push_back(3);
      wc.groups.push_back(k / 3);
    }
    wc.group_count = 2;
    wc.total_train_samples = 2400;
    wc.group_shift = 4.0;
    wc.domain_shift = 0.0;
    wc.camera_shift = 0.1;
    wc.test_identities = 20;
    wc.seed = static_cast<std::uint64_t>(seed);
    const FederatedWorld world = GenerateWorld(wc);

    ExperimentConfig ec;
    ec.strategy = Strategy::kFedPavCc;
    ec.rounds = 3;
    ec.clients = 6;
    ec.clients_per_round = 6;
    ec.eval_every = 100;
    ec.seed = static_cast<std::uint64_t>(seed);
    const MetricsReport r = RunExperiment(ec, world);
    const auto &clusters = r.round_trace.back().clusters;
    std::vector<int> labels(6, -1);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (int id : clusters[c]) {
        labels[static_cast<std::size_t>(id)] = static_cast<int>(c);
      }
    }
    ok += oracle::AdjustedRandIndex(labels, wc.groups) == 1.0 ? 1 : 0;
    counts += std::to_string(clusters.size());
  }
  return {ok >= kRequired, Format("ARI = 1 on %d/%d seeds (need %d); clusters per seed %s", ok, kSeeds, kRequired,
                                  counts.c_str())};
}

// ---------------------------------------------------------------------------
// 9. KD stability
// ---------------------------------------------------------------------------

double FinalSpread(const MetricsReport &r) {
  const std::size_t n = r.eval_trace.size();
  std::vector<double> v;
  for (std::size_t i = n - 10; i < n; ++i) {
    v.push_back(r.eval_trace[i].mean_global_rank1);
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return std::sqrt(ss / static_cast<double>(v.size()));
}

Outcome KdStability() {
  int ok = 0;
  bool mse_ok = true;
  int kd_rounds = 0;
  std::string spreads;
  for (int seed = 0; seed < kTrendSeeds; ++seed) {
    const FederatedWorld world = TrendWorld(static_cast<std::uint64_t>(seed));
    ExperimentConfig ec = TrendProtocol(static_cast<std::uint64_t>(seed));
    ec.eval_every = 1;
    ec.strategy = Strategy::kFedPav;
    const double fp = FinalSpread(RunExperiment(ec, world));
    ec.strategy = Strategy::kFedPavKdCdw;
    const MetricsReport kd = RunExperiment(ec, world);
    const double kds = FinalSpread(kd);
    for (const RoundRecord &rec : kd.round_trace) {
      mse_ok = mse_ok && rec.kd_mse_before && rec.kd_mse_after && *rec.kd_mse_after <= *rec.kd_mse_before;
      ++kd_rounds;
    }
    ok += kds <= fp ? 1 : 0;
    spreads += Format(" %.4f/%.4f", kds, fp);
  }
  return {ok >= kTrendRequired && mse_ok,
          Format("sd(kd+cdw) <= sd(fedpav) on %d/%d seeds (need %d), kd/fedpav:%s; MSE non-increasing on %s of %d "
                 "fine-tunes",
                 ok, kTrendSeeds, kTrendRequired, spreads.c_str(), mse_ok ? "all" : "NOT all", kd_rounds)};
}

// ---------------------------------------------------------------------------
// 10. Federated-by-camera degradation
// ---------------------------------------------------------------------------

// How far centralized may fall below federated-by-identity and still count
// as "within noise".
constexpr double kCentralizedNoise = 0.02;

Outcome ByCameraDegradation() {
  int ok = 0;
  std::string per_seed;
  for (int seed = 0; seed < kTrendSeeds; ++seed) {
    RunConfig rc = DefaultRunConfig();
    rc.world.volume_ratios = {1.0};
    rc.world.train_identities = {60};
    rc.world.cameras = {6};
    rc.world.groups = {0};
    rc.world.group_count = 1;
    rc.world.total_train_samples = 1200;
    rc.world.seed = static_cast<std::uint64_t>(seed);
    rc.partition_clients = 6;
    double rank1[3] = {};
    for (int run = 0; run < 3; ++run) {
      rc.scenario = run == 0 ? Scenario::kByCamera : Scenario::kByIdentity;
      const FederatedWorld world = BuildWorld(rc);
      ExperimentConfig ec = TrendProtocol(static_cast<std::uint64_t>(seed));
      ec.clients = world.clients.size();
      ec.clients_per_round = world.clients.size();
      // Every client evaluates on the same held-out split.
      const MetricsReport r = run < 2 ? RunExperiment(ec, world) : RunCentralized(ec, world);
      rank1[run] = r.clients[0].global.rank1;
    }
    const bool pass = rank1[0] < rank1[1] && rank1[2] >= rank1[1] - kCentralizedNoise;
    ok += pass ? 1 : 0;
    per_seed += Format(" %.3f<%.3f<~%.3f", rank1[0], rank1[1], rank1[2]);
  }
  return {ok >= kTrendRequired, Format("%d/%d seeds (need %d), camera<identity<~centralized:%s", ok, kTrendSeeds,
                                       kTrendRequired, per_seed.c_str())};
}

// ---------------------------------------------------------------------------
// 11. Metric fixtures
// ---------------------------------------------------------------------------

void Add(LabeledEmbeddings &e, std::vector<double> v, int identity, int camera) {
  e.dim = v.size();
  e.values.insert(e.values.end(), v.begin(), v.end());
  e.identities.push_back(identity);
  e.cameras.push_back(camera);
}

std::vector<double> Angle(double degrees) {
  const double r = degrees * M_PI / 180.0;
  return {std::cos(r), std::sin(r)};
}

Outcome MetricFixtures() {
  constexpr std::array<int, 3> ks = {1, 5, 10};

  LabeledEmbeddings q1, g1;
  Add(q1, Angle(0), 0, 0);
  Add(g1, Angle(0), 0, 1);
  Add(g1, Angle(10), 5, 1);
  Add(g1, Angle(20), 0, 2);
  Add(g1, Angle(90), 6, 1);
  const double ap = MeanAveragePrecision(RankGallery(q1, g1));

  LabeledEmbeddings q2, g2;
  Add(q2, Angle(0), 0, 0);
  Add(q2, Angle(90), 1, 0);
  Add(g2, Angle(1), 0, 1);
  Add(g2, Angle(89), 2, 1);
  Add(g2, Angle(85), 3, 1);
  Add(g2, Angle(75), 1, 1);
  const auto cmc = Cmc(RankGallery(q2, g2), ks);
  // Hits at ranks 1 and 3: AP = (1/1 + 2/3) / 2. The closed form 5/6 differs
  // from that sum by one ulp.
  const double ap_sum = (1.0 / 1.0 + 2.0 / 3.0) / 2.0;
  constexpr double kClosedForm = 1e-15;
  const bool fixtures =
      ap == ap_sum && std::abs(ap - 5.0 / 6.0) <= kClosedForm && cmc[0] == 0.5 && cmc[1] == 1.0;

  Rng rng(1011);
  int monotone = 0, invariant = 0;
  constexpr int kInstances = 1000;
  const std::array<int, 10> all_k = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (int trial = 0; trial < kInstances; ++trial) {
    const std::size_t dim = Between(rng, 2, 6);
    LabeledEmbeddings q, g;
    const int ids = static_cast<int>(Between(rng, 2, 6));
    for (std::size_t i = 0, n = Between(rng, 1, 6); i < n; ++i) {
      Add(q, Normals(rng, dim), static_cast<int>(rng.UniformInt(ids)), static_cast<int>(rng.UniformInt(3)));
    }
    const std::size_t gn = Between(rng, 2, 30);
    for (std::size_t i = 0; i < gn; ++i) {
      Add(g, Normals(rng, dim), static_cast<int>(rng.UniformInt(ids)), static_cast<int>(rng.UniformInt(3)));
    }
    const RankingResult r = RankGallery(q, g);
    const auto c = Cmc(r, all_k);
    monotone += std::is_sorted(c.begin(), c.end()) ? 1 : 0;

    std::vector<std::size_t> perm(gn);
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(std::span(perm));
    LabeledEmbeddings shuffled;
    for (std::size_t i : perm) {
      Add(shuffled, std::vector<double>(g.values.begin() + i * dim, g.values.begin() + (i + 1) * dim),
          g.identities[i], g.cameras[i]);
    }
    const RankingResult s = RankGallery(q, shuffled);
    invariant += (Cmc(s, all_k) == c && MeanAveragePrecision(s) == MeanAveragePrecision(r)) ? 1 : 0;
  }
  return {fixtures && monotone == kInstances && invariant == kInstances,
          Format("AP %.17g (|AP - 5/6| = %.1e, limit 1e-15), rank-1 %g rank-5 %g; monotone %d/%d, "
                 "permutation-invariant %d/%d",
                 ap, std::abs(ap - 5.0 / 6.0), cmc[0], cmc[1], monotone, kInstances, invariant,
                 kInstances)};
}

// ---------------------------------------------------------------------------
// 12. Communication accounting
// ---------------------------------------------------------------------------

Outcome CommunicationAccounting() {
  const std::uint64_t per_client = CommunicationCost(300, 1000, 1);

  // A real run: M = (16 * 8 + 8) doubles.
  WorldConfig wc;
  wc.volume_ratios = {2, 1, 1};
  wc.train_identities = {5, 4, 3};
  wc.cameras = {2, 2, 2};
  wc.groups = {0, 0, 0};
  wc.total_train_samples = 120;
  wc.test_identities = 8;
  const FederatedWorld world = GenerateWorld(wc);
  ExperimentConfig ec;
  ec.rounds = 7;
  ec.clients = 3;
  ec.clients_per_round = 2;
  ec.eval_every = 100;
  const MetricsReport r = RunExperiment(ec, world);
  const std::uint64_t m = (16 * 8 + 8) * sizeof(double);
  const bool run_ok = r.model_bytes == m && r.communication_per_client == 7 * 2 * m &&
                      r.communication_total == 7 * 2 * m * 2;
  return {per_client == 600000 && run_ok,
          Format("T=300, M=1000: %llu bytes per client (expect 600000); 7-round run with M=%zu, K=2: %llu per "
                 "client, %llu total",
                 static_cast<unsigned long long>(per_client), r.model_bytes,
                 static_cast<unsigned long long>(r.communication_per_client),
                 static_cast<unsigned long long>(r.communication_total))};
}

// ---------------------------------------------------------------------------
// 13. End-to-end determinism
// ---------------------------------------------------------------------------

std::string Slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("fedreid_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  int identical = 0, total = 0;
  std::string differing;
  const std::array<const char *, 6> strategies = {"fedpav",    "fedpav+cdw", "fedpav+cc",
                                                  "fedpav+cc+cdw", "fedpav+kd", "fedpav+kd+cdw"};
  auto compare = [&](const std::string &label, const RunConfig &a_cfg, RunKind kind) {
    const fs::path a = root / (label + "_a");
    const fs::path b = root / (label + "_b");
    ExecuteRun(a_cfg, BuildWorld(a_cfg), kind, a.string());
    // The second run is rebuilt from the first run's manifest and world export.
    const nlohmann::json manifest = nlohmann::json::parse(Slurp(a / "manifest.json"));
    const RunConfig replay = RunConfigFromJson(manifest.at("config"));
    ExecuteRun(replay, LoadWorld((a / "world.tsv").string()), kind, b.string());
    for (const char *file : {"trace.jsonl", "trace.txt"}) {
      ++total;
      if (Slurp(a / file) == Slurp(b / file) && !Slurp(a / file).empty()) {
        ++identical;
      } else {
        differing += " " + label + "/" + file;
      }
    }
  };
  for (const char *name : strategies) {
    RunConfig rc = LoadRunConfig("", {"rounds=6", "eval_every=2", "seed=13", std::string("strategy=") + name});
    compare(name, rc, RunKind::kFederated);
  }
  RunConfig base = LoadRunConfig("", {"rounds=6", "eval_every=2", "seed=13"});
  compare("standalone", base, RunKind::kStandalone);
  compare("centralized", base, RunKind::kCentralized);
  RunConfig threaded = LoadRunConfig("", {"rounds=6", "eval_every=2", "seed=13", "threads=4"});
  {
    // Thread count must not change any traced number.
    ExecuteRun(base, BuildWorld(base), RunKind::kFederated, (root / "t1").string());
    ExecuteRun(threaded, BuildWorld(threaded), RunKind::kFederated, (root / "t4").string());
    ++total;
    if (Slurp(root / "t1" / "trace.jsonl") == Slurp(root / "t4" / "trace.jsonl")) {
      ++identical;
    } else {
      differing += " threads/trace.jsonl";
    }
  }
  fs::remove_all(root);
  return {identical == total,
          Format("%d/%d trace files byte-identical on replay from manifest + world export%s", identical, total,
                 differing.c_str())};
}

}  // namespace
}  // namespace fedreid

int main(int argc, char **argv) {
  using namespace fedreid;
  SetLogLevel(LogLevel::kOff);
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "gradient oracle", 10, GradientOracle},
      {2, "aggregation algebra", 10, AggregationAlgebra},
      {3, "clustering oracle", 30, ClusteringOracle},
      {4, "CDW formula fixtures", 10, CdwFixtures},
      {5, "benchmark volume skew", 1, WeightSkew},
      {6, "non-IID trend", 300, NonIidTrend},
      {7, "CDW trend", 300, CdwTrend},
      {8, "CC structure recovery", 120, ClusterRecovery},
      {9, "KD stability", 300, KdStability},
      {10, "federated-by-camera degradation", 300, ByCameraDegradation},
      {11, "metric fixtures", 30, MetricFixtures},
      {12, "communication accounting", 10, CommunicationAccounting},
      {13, "end-to-end determinism", 300, Determinism},
  };

  int failed = 0;
  int ran = 0;
  for (const Criterion &c : criteria) {
    if (only != 0 && c.id != only) {
      continue;
    }
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception &e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
