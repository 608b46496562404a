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

#ifndef FEDREID_RUNIO_HPP_
#define FEDREID_RUNIO_HPP_

#include <string>
#include <vector>

#include "config.hpp"
#include "fedsim.hpp"
#include "json.hpp"

namespace fedreid {

// Run directory layout (schema "fedreid-run/1"):
//
//   manifest.json          config snapshot, seed, world hash, version, timestamps, status
//   world.tsv              the exact world the run used
//   trace.jsonl            one record per round and per evaluation point
//   trace.txt              the evaluation points as a fixed-width table
//   report.json            final MetricsReport (written on success only)
//   checkpoints/rNNNN/     global.ckpt (or distributed_cK.ckpt under clustering) and local_cK.ckpt
//
// Everything except manifest.json is a pure function of config and world.

inline constexpr const char *kRunSchema = "fedreid-run/1";
const char *Version();

enum class RunKind { kFederated, kStandalone, kCentralized };

/// Runs `kind` over `world` and, when `out_dir` is non-empty, writes the
/// layout above. A failure after the directory exists leaves the partial
/// trace in place with manifest status "failed" and rethrows.
MetricsReport ExecuteRun(const RunConfig &config, const FederatedWorld &world, RunKind kind,
                         const std::string &out_dir);

nlohmann::json RoundToJson(const RoundRecord &record);
nlohmann::json EvalToJson(const EvalRecord &record, const std::string &kind);
nlohmann::json ReportToJson(const MetricsReport &report);

/// Per-client rank-1/5/10, mAP and communication as a fixed-width table.
std::string FormatReportTable(const MetricsReport &report);

struct RunSummary {
  std::string dir;
  std::string kind;
  std::string world_hash;
  std::vector<int> clients;
  std::vector<std::size_t> volumes;
  std::vector<double> global_rank1;
  std::vector<double> local_rank1;
};

RunSummary LoadRunSummary(const std::string &dir);

/// Rank-1 deltas of every run against runs[0], client rows by descending
/// volume. `model` selects "local" or "global" models. Throws kConfig on
/// mismatched world hashes or client sets.
std::string CompareRuns(const std::vector<std::string> &run_dirs, const std::string &model);

/// Evaluates a backbone checkpoint on every client's query/gallery split.
std::string EvaluateCheckpointTable(const std::string &checkpoint_path, const FederatedWorld &world);

}  // namespace fedreid

#endif  // FEDREID_RUNIO_HPP_
