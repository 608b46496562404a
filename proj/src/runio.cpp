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

#include "runio.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "logging.hpp"

namespace fedreid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Format(const char *fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteFile(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    Fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  }
  out << text;
  if (!out) {
    Fail(ErrorCode::kIo, path.string() + ": write failed");
  }
}

json ReadJson(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    Fail(ErrorCode::kIo, path.string() + ": cannot open");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    Fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

const char *KindName(RunKind kind, Strategy strategy) {
  switch (kind) {
    case RunKind::kStandalone:
      return "standalone";
    case RunKind::kCentralized:
      return "centralized";
    case RunKind::kFederated:
      break;
  }
  return StrategyName(strategy);
}

json MetricsToJson(const RetrievalMetrics &m) {
  return {{"rank1", m.rank1}, {"rank5", m.rank5}, {"rank10", m.rank10}, {"map", m.map}, {"queries", m.queries}};
}

std::string ClustersText(const std::vector<std::vector<int>> &clusters) {
  std::string out;
  for (const auto &members : clusters) {
    out += "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
      out += (i ? "," : "") + std::to_string(members[i]);
    }
    out += "}";
  }
  return out;
}

std::string RoundLine(const RoundRecord &r) {
  std::string line = Format("round %4d  aggregations %d  comm_bytes %llu", r.round, r.aggregations,
                            static_cast<unsigned long long>(r.communication_bytes));
  if (r.kd_mse_before && r.kd_mse_after) {
    line += Format("  kd_mse %.6g -> %.6g", *r.kd_mse_before, *r.kd_mse_after);
  }
  if (!r.clusters.empty()) {
    line += "  clusters " + ClustersText(r.clusters);
  }
  return line + "\n";
}

std::string EvalTable(const EvalRecord &e) {
  std::string out = Format("eval round %d  mean_global_rank1 %.4f  mean_local_rank1 %.4f  comm_bytes %llu\n",
                           e.round, e.mean_global_rank1, e.mean_local_rank1,
                           static_cast<unsigned long long>(e.communication_bytes));
  out += "  client  g.rank1  g.rank5 g.rank10    g.mAP  l.rank1  l.rank5 l.rank10    l.mAP\n";
  for (std::size_t i = 0; i < e.global.size(); ++i) {
    const RetrievalMetrics &g = e.global[i];
    const RetrievalMetrics &l = e.local[i];
    out += Format("  %6zu %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", i, g.rank1, g.rank5, g.rank10, g.map,
                  l.rank1, l.rank5, l.rank10, l.map);
  }
  return out;
}

class RunWriter {
 public:
  RunWriter(const fs::path &dir, json manifest) : dir_(dir), manifest_(std::move(manifest)) {
    std::error_code ec;
    fs::create_directories(dir_ / "checkpoints", ec);
    if (ec) {
      Fail(ErrorCode::kIo, dir_.string() + ": cannot create run directory (" + ec.message() + ")");
    }
    jsonl_.open(dir_ / "trace.jsonl", std::ios::binary | std::ios::trunc);
    text_.open(dir_ / "trace.txt", std::ios::binary | std::ios::trunc);
    if (!jsonl_ || !text_) {
      Fail(ErrorCode::kIo, dir_.string() + ": cannot open trace files");
    }
    fs::remove(dir_ / "report.json", ec);
    WriteManifest();
  }

  void Header(const std::string &kind) { text_ << "# " << kRunSchema << " trace, kind " << kind << "\n"; }

  void Round(const RoundRecord &r) {
    jsonl_ << RoundToJson(r).dump() << "\n";
    text_ << RoundLine(r);
    jsonl_.flush();
    text_.flush();
  }

  void Eval(const EvalRecord &e, const EvalSnapshot &snapshot, const std::string &kind, bool federated) {
    jsonl_ << EvalToJson(e, kind).dump() << "\n";
    text_ << EvalTable(e);
    jsonl_.flush();
    text_.flush();

    const fs::path dir = dir_ / "checkpoints" / Format("r%04d", snapshot.round);
    fs::create_directories(dir);
    if (snapshot.per_cluster) {
      for (std::size_t i = 0; i < snapshot.distributed.size(); ++i) {
        SaveCheckpoint(MakeBackboneCheckpoint(*snapshot.distributed[i], snapshot.cumulative_epoch),
                       (dir / Format("distributed_c%zu.ckpt", i)).string());
      }
    } else if (!snapshot.distributed.empty()) {
      SaveCheckpoint(MakeBackboneCheckpoint(*snapshot.distributed.front(), snapshot.cumulative_epoch),
                     (dir / "global.ckpt").string());
    }
    if (federated) {
      for (std::size_t i = 0; i < snapshot.local.size(); ++i) {
        SaveCheckpoint(MakeBackboneCheckpoint(*snapshot.local[i], snapshot.cumulative_epoch),
                       (dir / Format("local_c%zu.ckpt", i)).string());
      }
    }
  }

  void Finish(const MetricsReport &report) {
    WriteFile(dir_ / "report.json", ReportToJson(report).dump(2) + "\n");
    manifest_["status"] = "completed";
    manifest_["finished_at"] = UtcNow();
    WriteManifest();
  }

  void Abort(const std::string &error) {
    text_ << "# RUN FAILED: " << error << "\n";
    text_.flush();
    jsonl_ << json{{"type", "failure"}, {"error", error}}.dump() << "\n";
    jsonl_.flush();
    manifest_["status"] = "failed";
    manifest_["error"] = error;
    manifest_["finished_at"] = UtcNow();
    WriteManifest();
  }

 private:
  void WriteManifest() { WriteFile(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

  fs::path dir_;
  json manifest_;
  std::ofstream jsonl_;
  std::ofstream text_;
};

}  // namespace

const char *Version() { return "0.1.0"; }

json RoundToJson(const RoundRecord &r) {
  json out = {{"type", "round"},
              {"round", r.round},
              {"selected", r.selected},
              {"distances", r.distances},
              {"weights", r.weights},
              {"aggregations", r.aggregations},
              {"communication_bytes", r.communication_bytes}};
  if (!r.clusters.empty()) {
    out["clusters"] = r.clusters;
  }
  if (r.kd_mse_before && r.kd_mse_after) {
    out["kd_mse_before"] = *r.kd_mse_before;
    out["kd_mse_after"] = *r.kd_mse_after;
  }
  return out;
}

json EvalToJson(const EvalRecord &e, const std::string &kind) {
  json clients = json::array();
  for (std::size_t i = 0; i < e.global.size(); ++i) {
    clients.push_back({{"client", i}, {"global", MetricsToJson(e.global[i])}, {"local", MetricsToJson(e.local[i])}});
  }
  return {{"type", "eval"},
          {"kind", kind},
          {"round", e.round},
          {"mean_global_rank1", e.mean_global_rank1},
          {"mean_local_rank1", e.mean_local_rank1},
          {"communication_bytes", e.communication_bytes},
          {"clients", clients}};
}

json ReportToJson(const MetricsReport &report) {
  json clients = json::array();
  for (const ClientSummary &c : report.clients) {
    clients.push_back({{"client", c.client},
                       {"volume", c.volume},
                       {"global", MetricsToJson(c.global)},
                       {"local", MetricsToJson(c.local)}});
  }
  return {{"schema", kRunSchema},
          {"kind", report.kind},
          {"rounds", report.rounds},
          {"model_bytes", report.model_bytes},
          {"communication_per_client", report.communication_per_client},
          {"communication_total", report.communication_total},
          {"aggregations", report.aggregations},
          {"best_global_rounds", report.best_global_rounds},
          {"best_local_rounds", report.best_local_rounds},
          {"clients", clients}};
}

std::string FormatReportTable(const MetricsReport &report) {
  std::string out = Format("%s: %d rounds, model %zu bytes, communication %llu bytes per client, %llu total\n",
                           report.kind.c_str(), report.rounds, report.model_bytes,
                           static_cast<unsigned long long>(report.communication_per_client),
                           static_cast<unsigned long long>(report.communication_total));
  out += "client  volume  g.rank1  g.rank5 g.rank10    g.mAP  l.rank1  l.rank5 l.rank10    l.mAP\n";
  for (const ClientSummary &c : report.clients) {
    out += Format("%6d %7zu %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", c.client, c.volume, c.global.rank1,
                  c.global.rank5, c.global.rank10, c.global.map, c.local.rank1, c.local.rank5, c.local.rank10,
                  c.local.map);
  }
  return out;
}

MetricsReport ExecuteRun(const RunConfig &config, const FederatedWorld &world, RunKind kind,
                         const std::string &out_dir) {
  ValidateRunConfig(config);
  const ExperimentConfig experiment = ResolveExperiment(config, world);
  const std::string kind_name = KindName(kind, experiment.strategy);
  const auto run = [&](const RunObserver &observer) {
    switch (kind) {
      case RunKind::kStandalone:
        return RunStandalone(experiment, world, observer);
      case RunKind::kCentralized:
        return RunCentralized(experiment, world, observer);
      case RunKind::kFederated:
        break;
    }
    return RunExperiment(experiment, world, observer);
  };
  if (out_dir.empty()) {
    return run({});
  }

  const fs::path dir(out_dir);
  RunConfig snapshot = config;
  snapshot.experiment = experiment;
  const std::string world_text = ExportWorld(world);
  json manifest = {{"schema", kRunSchema},
                   {"kind", kind_name},
                   {"version", Version()},
                   {"seed", experiment.seed},
                   {"world_hash", WorldHash(world)},
                   {"config", RunConfigToJson(snapshot)},
                   {"started_at", UtcNow()},
                   {"status", "running"},
                   {"outputs",
                    {{"world", "world.tsv"},
                     {"trace", "trace.jsonl"},
                     {"trace_text", "trace.txt"},
                     {"report", "report.json"},
                     {"checkpoints", "checkpoints"}}}};
  RunWriter writer(dir, std::move(manifest));
  WriteFile(dir / "world.tsv", world_text);
  writer.Header(kind_name);

  RunObserver observer;
  observer.on_round = [&](const RoundRecord &r) { writer.Round(r); };
  observer.on_eval = [&](const EvalRecord &e, const EvalSnapshot &s) {
    writer.Eval(e, s, kind_name, kind == RunKind::kFederated);
  };
  try {
    MetricsReport report = run(observer);
    writer.Finish(report);
    return report;
  } catch (const std::exception &e) {
    writer.Abort(e.what());
    throw;
  }
}

RunSummary LoadRunSummary(const std::string &dir) {
  const fs::path root(dir);
  const json manifest = ReadJson(root / "manifest.json");
  if (manifest.value("schema", "") != kRunSchema) {
    Fail(ErrorCode::kFormat, dir + ": not a " + std::string(kRunSchema) + " run directory");
  }
  if (manifest.value("status", "") != "completed") {
    Fail(ErrorCode::kConfig, dir + ": run status is '" + manifest.value("status", "unknown") + "', not completed");
  }
  const json report = ReadJson(root / "report.json");
  RunSummary s;
  s.dir = dir;
  s.kind = manifest.at("kind").get<std::string>();
  s.world_hash = manifest.at("world_hash").get<std::string>();
  for (const json &c : report.at("clients")) {
    s.clients.push_back(c.at("client").get<int>());
    s.volumes.push_back(c.at("volume").get<std::size_t>());
    s.global_rank1.push_back(c.at("global").at("rank1").get<double>());
    s.local_rank1.push_back(c.at("local").at("rank1").get<double>());
  }
  return s;
}

std::string CompareRuns(const std::vector<std::string> &run_dirs, const std::string &model) {
  if (run_dirs.size() < 2) {
    Fail(ErrorCode::kConfig, "compare needs at least 2 run directories");
  }
  if (model != "local" && model != "global") {
    Fail(ErrorCode::kConfig, "model: expected 'local' or 'global', got '" + model + "'");
  }
  std::vector<RunSummary> runs;
  for (const std::string &d : run_dirs) {
    runs.push_back(LoadRunSummary(d));
  }
  const RunSummary &base = runs.front();
  for (const RunSummary &r : runs) {
    if (r.world_hash != base.world_hash) {
      Fail(ErrorCode::kConfig, "world hash mismatch: " + base.dir + " has " + base.world_hash + ", " + r.dir +
                                   " has " + r.world_hash);
    }
    if (r.clients != base.clients) {
      Fail(ErrorCode::kConfig, "client sets differ between " + base.dir + " and " + r.dir);
    }
  }
  const auto rank1 = [&](const RunSummary &r, std::size_t i) {
    return model == "local" ? r.local_rank1[i] : r.global_rank1[i];
  };

  std::vector<std::size_t> rows(base.clients.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return base.volumes[a] > base.volumes[b]; });

  std::string out = "rank-1 (" + model + " models) deltas against " + base.dir + " (" + base.kind + ")\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    out += Format("  [%zu] ", k) + runs[k].dir + " (" + runs[k].kind + ")\n";
  }
  out += "client  volume  baseline";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    out += Format("  delta[%zu]", k);
  }
  out += "\n";
  for (std::size_t i : rows) {
    out += Format("%6d %7zu %9.4f", base.clients[i], base.volumes[i], rank1(base, i));
    for (const RunSummary &r : runs) {
      const double delta = rank1(r, i) - rank1(base, i);
      out += Format(" %+9.4f", delta == 0.0 ? 0.0 : delta);
    }
    out += "\n";
  }
  return out;
}

std::string EvaluateCheckpointTable(const std::string &checkpoint_path, const FederatedWorld &world) {
  const Checkpoint checkpoint = LoadCheckpoint(checkpoint_path);
  const Backbone backbone = BackboneFromCheckpoint(checkpoint);
  if (backbone.input_dim != world.input_dim) {
    Fail(ErrorCode::kDimension, checkpoint_path + ": input_dim " + std::to_string(backbone.input_dim) +
                                    " does not match the world's " + std::to_string(world.input_dim));
  }
  std::string out = checkpoint_path + Format(" (cumulative epoch %d)\n", checkpoint.cumulative_epoch);
  out += "client  volume  queries    rank1    rank5   rank10      mAP\n";
  for (const ClientData &c : world.clients) {
    const RetrievalMetrics m = Evaluate(backbone, c.query, c.gallery);
    out += Format("%6d %7zu %8zu %8.4f %8.4f %8.4f %8.4f\n", c.id, c.volume(), m.queries, m.rank1, m.rank5, m.rank10,
                  m.map);
  }
  return out;
}

}  // namespace fedreid
