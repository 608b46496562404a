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

#include "fedreid/fedreid.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "fedsim.hpp"
#include "logging.hpp"
#include "runio.hpp"

struct fr_config {
  fedreid::RunConfig value;
};

struct fr_world {
  fedreid::FederatedWorld value;
};

struct fr_report {
  fedreid::MetricsReport value;
};

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(fedreid::ErrorCode::kRuntime) == FR_ERR_RUNTIME);
static_assert(static_cast<int>(fedreid::ErrorCode::kInvalidArgument) == FR_ERR_INVALID_ARGUMENT);

fr_status SetError(fr_status status, const std::string &message) {
  g_last_error = message;
  return status;
}

template <typename F>
fr_status Guard(F &&body) {
  try {
    body();
    return FR_OK;
  } catch (const fedreid::Error &e) {
    return SetError(static_cast<fr_status>(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return SetError(FR_ERR_RUNTIME, "out of memory");
  } catch (const std::exception &e) {
    return SetError(FR_ERR_INTERNAL, e.what());
  }
}

void RequireNotNull(const void *p, const char *name) {
  if (p == nullptr) {
    fedreid::Fail(fedreid::ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
  }
}

char *CopyString(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out == nullptr) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char *fr_version(void) { return fedreid::Version(); }

const char *fr_status_name(fr_status status) {
  if (status == FR_OK) {
    return "ok";
  }
  if (status == FR_ERR_INTERNAL) {
    return "internal";
  }
  return fedreid::ErrorCodeName(static_cast<fedreid::ErrorCode>(status));
}

const char *fr_last_error(void) { return g_last_error.c_str(); }

void fr_string_free(char *s) { std::free(s); }

fr_status fr_set_log_level(fr_log_level level) {
  return Guard([&] {
    if (level < FR_LOG_DEBUG || level > FR_LOG_OFF) {
      fedreid::Fail(fedreid::ErrorCode::kInvalidArgument, "unknown log level");
    }
    fedreid::SetLogLevel(static_cast<fedreid::LogLevel>(level));
  });
}

size_t fr_warning_count(void) { return fedreid::WarningCount(); }

fr_status fr_config_load(const char *path, const char *const *overrides, size_t override_count, fr_config **out) {
  return Guard([&] {
    RequireNotNull(out, "out");
    *out = nullptr;
    std::vector<std::string> sets;
    for (size_t i = 0; i < override_count; ++i) {
      RequireNotNull(overrides[i], "override");
      sets.emplace_back(overrides[i]);
    }
    auto config = std::make_unique<fr_config>();
    config->value = fedreid::LoadRunConfig(path == nullptr ? "" : path, sets);
    *out = config.release();
  });
}

fr_status fr_config_to_json(const fr_config *config, char **out) {
  return Guard([&] {
    RequireNotNull(config, "config");
    RequireNotNull(out, "out");
    *out = CopyString(fedreid::RunConfigToJson(config->value).dump(2));
  });
}

void fr_config_free(fr_config *config) { delete config; }

fr_status fr_world_generate(const fr_config *config, fr_world **out) {
  return Guard([&] {
    RequireNotNull(config, "config");
    RequireNotNull(out, "out");
    *out = nullptr;
    auto world = std::make_unique<fr_world>();
    world->value = fedreid::BuildWorld(config->value);
    *out = world.release();
  });
}

fr_status fr_world_load(const char *path, fr_world **out) {
  return Guard([&] {
    RequireNotNull(path, "path");
    RequireNotNull(out, "out");
    *out = nullptr;
    auto world = std::make_unique<fr_world>();
    world->value = fedreid::LoadWorld(path);
    *out = world.release();
  });
}

fr_status fr_world_save(const fr_world *world, const char *path) {
  return Guard([&] {
    RequireNotNull(world, "world");
    RequireNotNull(path, "path");
    fedreid::SaveWorld(world->value, path);
  });
}

fr_status fr_world_hash(const fr_world *world, char out[17]) {
  return Guard([&] {
    RequireNotNull(world, "world");
    RequireNotNull(out, "out");
    const std::string hash = fedreid::WorldHash(world->value);
    std::memcpy(out, hash.c_str(), 17);
  });
}

size_t fr_world_client_count(const fr_world *world) { return world == nullptr ? 0 : world->value.clients.size(); }

void fr_world_free(fr_world *world) { delete world; }

fr_status fr_run(const fr_config *config, const fr_world *world, fr_run_kind kind, const char *out_dir,
                 fr_report **out) {
  return Guard([&] {
    RequireNotNull(config, "config");
    RequireNotNull(world, "world");
    RequireNotNull(out, "out");
    *out = nullptr;
    fedreid::RunKind run_kind;
    switch (kind) {
      case FR_RUN_FEDERATED:
        run_kind = fedreid::RunKind::kFederated;
        break;
      case FR_RUN_STANDALONE:
        run_kind = fedreid::RunKind::kStandalone;
        break;
      case FR_RUN_CENTRALIZED:
        run_kind = fedreid::RunKind::kCentralized;
        break;
      default:
        fedreid::Fail(fedreid::ErrorCode::kInvalidArgument, "unknown run kind");
    }
    auto report = std::make_unique<fr_report>();
    report->value = fedreid::ExecuteRun(config->value, world->value, run_kind, out_dir == nullptr ? "" : out_dir);
    *out = report.release();
  });
}

size_t fr_report_client_count(const fr_report *report) {
  return report == nullptr ? 0 : report->value.clients.size();
}

fr_status fr_report_client(const fr_report *report, size_t index, fr_client_metrics *out) {
  return Guard([&] {
    RequireNotNull(report, "report");
    RequireNotNull(out, "out");
    if (index >= report->value.clients.size()) {
      fedreid::Fail(fedreid::ErrorCode::kInvalidArgument, "client index out of range");
    }
    const fedreid::ClientSummary &c = report->value.clients[index];
    *out = {c.client,       c.volume,      c.global.rank1, c.global.rank5, c.global.rank10, c.global.map,
            c.local.rank1,  c.local.rank5, c.local.rank10, c.local.map};
  });
}

int fr_report_aggregations(const fr_report *report) { return report == nullptr ? 0 : report->value.aggregations; }

uint64_t fr_report_communication_per_client(const fr_report *report) {
  return report == nullptr ? 0 : report->value.communication_per_client;
}

uint64_t fr_report_communication_total(const fr_report *report) {
  return report == nullptr ? 0 : report->value.communication_total;
}

fr_status fr_report_table(const fr_report *report, char **out) {
  return Guard([&] {
    RequireNotNull(report, "report");
    RequireNotNull(out, "out");
    *out = CopyString(fedreid::FormatReportTable(report->value));
  });
}

fr_status fr_report_to_json(const fr_report *report, char **out) {
  return Guard([&] {
    RequireNotNull(report, "report");
    RequireNotNull(out, "out");
    *out = CopyString(fedreid::ReportToJson(report->value).dump(2));
  });
}

void fr_report_free(fr_report *report) { delete report; }

fr_status fr_compare(const char *const *run_dirs, size_t count, const char *model, char **table_out) {
  return Guard([&] {
    RequireNotNull(run_dirs, "run_dirs");
    RequireNotNull(table_out, "table_out");
    std::vector<std::string> dirs;
    for (size_t i = 0; i < count; ++i) {
      RequireNotNull(run_dirs[i], "run_dirs entry");
      dirs.emplace_back(run_dirs[i]);
    }
    *table_out = CopyString(fedreid::CompareRuns(dirs, model == nullptr ? "local" : model));
  });
}

fr_status fr_eval_checkpoint(const char *checkpoint_path, const fr_world *world, char **table_out) {
  return Guard([&] {
    RequireNotNull(checkpoint_path, "checkpoint_path");
    RequireNotNull(world, "world");
    RequireNotNull(table_out, "table_out");
    *table_out = CopyString(fedreid::EvaluateCheckpointTable(checkpoint_path, world->value));
  });
}

fr_status fr_cosine_distance(const double *a, const double *b, size_t length, double *out) {
  return Guard([&] {
    RequireNotNull(a, "a");
    RequireNotNull(b, "b");
    RequireNotNull(out, "out");
    *out = fedreid::CosineDistance(std::span(a, length), std::span(b, length));
  });
}

fr_status fr_cdw_weights(const double *distances, size_t count, double *weights_out) {
  return Guard([&] {
    RequireNotNull(distances, "distances");
    RequireNotNull(weights_out, "weights_out");
    const std::vector<double> w = fedreid::CdwWeights(std::span(distances, count));
    std::copy(w.begin(), w.end(), weights_out);
  });
}

fr_status fr_weighted_sum(const double *vectors, size_t count, size_t length, const double *weights, double *out) {
  return Guard([&] {
    RequireNotNull(vectors, "vectors");
    RequireNotNull(weights, "weights");
    RequireNotNull(out, "out");
    std::vector<fedreid::ParamVector> parts;
    for (size_t k = 0; k < count; ++k) {
      parts.emplace_back(std::vector<double>(vectors + k * length, vectors + (k + 1) * length));
    }
    const fedreid::ParamVector sum = fedreid::WeightedSum(parts, std::span(weights, count));
    std::copy(sum.values().begin(), sum.values().end(), out);
  });
}

fr_status fr_cluster_clients(const double *features, size_t count, size_t dim, int merge_steps, int *labels_out) {
  return Guard([&] {
    RequireNotNull(features, "features");
    RequireNotNull(labels_out, "labels_out");
    std::vector<fedreid::ClientFeatures> rows;
    for (size_t i = 0; i < count; ++i) {
      rows.push_back({static_cast<int>(i), std::vector<double>(features + i * dim, features + (i + 1) * dim)});
    }
    const fedreid::ClusterAssignment assignment = fedreid::ClusterClients(rows, merge_steps);
    for (size_t i = 0; i < count; ++i) {
      labels_out[i] = assignment.ClusterOf(static_cast<int>(i));
    }
  });
}

uint64_t fr_communication_cost(uint64_t rounds, uint64_t model_bytes, uint64_t participants_per_round) {
  return fedreid::CommunicationCost(rounds, model_bytes, participants_per_round);
}

}  // extern "C"
