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

#include "config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace fedreid {

namespace {

using nlohmann::json;

// Heterogeneity knobs of the default world, chosen so the federated trends
// show up at desk scale (see README, "Default world").
constexpr std::size_t kDefaultTotalSamples = 2000;
constexpr int kDefaultTestIdentities = 150;
constexpr double kDefaultDomainShift = 0.6;
constexpr double kDefaultCameraShift = 0.1;
constexpr double kDefaultNoise = 0.3;
constexpr double kDefaultGroupShift = 0.0;  // one family; clustering worlds raise it

const char *TypeName(const json &v) { return v.type_name(); }

// Overlays `patch` onto `base`, rejecting keys `base` does not know.
void Merge(json &base, const json &patch, const std::string &path) {
  if (!patch.is_object()) {
    Fail(ErrorCode::kConfig, (path.empty() ? std::string("config") : path) + ": expected an object, got " +
                                 TypeName(patch));
  }
  for (const auto &[key, value] : patch.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) {
      Fail(ErrorCode::kConfig, here + ": unknown key");
    }
    if (base[key].is_object()) {
      Merge(base[key], value, here);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T Get(const json &doc, const std::string &path) {
  const json *node = &doc;
  std::stringstream parts(path);
  std::string part;
  while (std::getline(parts, part, '.')) {
    node = &node->at(part);
  }
  const json &v = *node;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) {
      Fail(ErrorCode::kConfig, path + ": expected a boolean, got " + TypeName(v));
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) {
      Fail(ErrorCode::kConfig, path + ": expected a string, got " + TypeName(v));
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) {
      Fail(ErrorCode::kConfig, path + ": expected a number, got " + TypeName(v));
    }
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      Fail(ErrorCode::kConfig, path + ": expected a non-negative integer, got " + v.dump());
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) {
      Fail(ErrorCode::kConfig, path + ": expected an integer, got " + v.dump());
    }
    const auto wide = v.get<std::int64_t>();
    if (wide < std::numeric_limits<T>::min() || wide > std::numeric_limits<T>::max()) {
      Fail(ErrorCode::kConfig, path + ": value " + v.dump() + " out of range");
    }
  }
  return v.get<T>();
}

template <typename T>
std::vector<T> GetList(const json &doc, const std::string &path) {
  const json &v = doc.at("world").at(path.substr(path.find('.') + 1));
  if (!v.is_array()) {
    Fail(ErrorCode::kConfig, path + ": expected a list, got " + TypeName(v));
  }
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool ok = std::is_floating_point_v<T> ? v[i].is_number() : v[i].is_number_integer();
    if (!ok) {
      Fail(ErrorCode::kConfig, path + "[" + std::to_string(i) + "]: expected a number, got " + v[i].dump());
    }
    out.push_back(v[i].get<T>());
  }
  return out;
}

Scenario ParseScenario(const std::string &name) {
  if (name == "federated") {
    return Scenario::kFederated;
  }
  if (name == "by_camera") {
    return Scenario::kByCamera;
  }
  if (name == "by_identity") {
    return Scenario::kByIdentity;
  }
  Fail(ErrorCode::kConfig, "world.scenario: unknown value '" + name +
                               "' (expected federated, by_camera or by_identity)");
}

json ParseOverrideValue(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &) {
    return json(text);
  }
}

}  // namespace

const char *ScenarioName(Scenario scenario) {
  switch (scenario) {
    case Scenario::kFederated:
      return "federated";
    case Scenario::kByCamera:
      return "by_camera";
    case Scenario::kByIdentity:
      return "by_identity";
  }
  return "unknown";
}

RunConfig DefaultRunConfig() {
  RunConfig c;
  c.experiment.clients = 0;
  c.experiment.clients_per_round = 0;
  c.world = WorldConfig::BenchmarkLike(kDefaultTotalSamples);
  c.world.test_identities = kDefaultTestIdentities;
  c.world.domain_shift = kDefaultDomainShift;
  c.world.camera_shift = kDefaultCameraShift;
  c.world.noise = kDefaultNoise;
  c.world.group_shift = kDefaultGroupShift;
  return c;
}

json RunConfigToJson(const RunConfig &c) {
  const ExperimentConfig &e = c.experiment;
  const WorldConfig &w = c.world;
  json doc;
  doc["strategy"] = StrategyName(e.strategy);
  doc["rounds"] = e.rounds;
  doc["local_epochs"] = e.local_epochs;
  doc["batch_size"] = e.batch_size;
  doc["clients"] = e.clients;
  doc["clients_per_round"] = e.clients_per_round;
  doc["seed"] = e.seed;
  doc["eval_every"] = e.eval_every;
  doc["finch_steps"] = e.finch_steps;
  doc["threads"] = e.threads;
  doc["hidden_dim"] = e.hidden_dim;
  doc["lr_kd"] = e.lr_kd;
  doc["sgd"] = {{"lr_backbone", e.sgd.lr_backbone}, {"lr_classifier", e.sgd.lr_classifier},
                {"momentum", e.sgd.momentum},       {"weight_decay", e.sgd.weight_decay},
                {"step_size", e.sgd.step_size},     {"gamma", e.sgd.gamma}};
  doc["world"] = {
      {"scenario", ScenarioName(c.scenario)},
      {"partition_clients", c.partition_clients},
      {"input_dim", w.input_dim},
      {"signal_dim", w.signal_dim},
      {"volume_ratios", w.volume_ratios},
      {"train_identities", w.train_identities},
      {"cameras", w.cameras},
      {"groups", w.groups},
      {"total_train_samples", w.total_train_samples},
      {"group_count", w.group_count},
      {"test_identities", w.test_identities},
      {"test_samples_per_camera", w.test_samples_per_camera},
      {"signal_scale", w.signal_scale},
      {"group_shift", w.group_shift},
      {"domain_shift", w.domain_shift},
      {"camera_shift", w.camera_shift},
      {"camera_distortion", w.camera_distortion},
      {"noise", w.noise},
      {"shared_size", w.shared_size},
      {"shared_heldout", w.shared_heldout},
      {"seed", w.seed},
  };
  return doc;
}

RunConfig RunConfigFromJson(const json &user) {
  json doc = RunConfigToJson(DefaultRunConfig());
  Merge(doc, user, "");
  const bool world_seed_given = user.contains("world") && user["world"].is_object() && user["world"].contains("seed");

  RunConfig c;
  ExperimentConfig &e = c.experiment;
  e.strategy = ParseStrategy(Get<std::string>(doc, "strategy"));
  e.rounds = Get<int>(doc, "rounds");
  e.local_epochs = Get<int>(doc, "local_epochs");
  e.batch_size = Get<std::size_t>(doc, "batch_size");
  e.clients = Get<std::size_t>(doc, "clients");
  e.clients_per_round = Get<std::size_t>(doc, "clients_per_round");
  e.seed = Get<std::uint64_t>(doc, "seed");
  e.eval_every = Get<int>(doc, "eval_every");
  e.finch_steps = Get<int>(doc, "finch_steps");
  e.threads = Get<int>(doc, "threads");
  e.hidden_dim = Get<std::size_t>(doc, "hidden_dim");
  e.lr_kd = Get<double>(doc, "lr_kd");
  e.sgd.lr_backbone = Get<double>(doc, "sgd.lr_backbone");
  e.sgd.lr_classifier = Get<double>(doc, "sgd.lr_classifier");
  e.sgd.momentum = Get<double>(doc, "sgd.momentum");
  e.sgd.weight_decay = Get<double>(doc, "sgd.weight_decay");
  e.sgd.step_size = Get<int>(doc, "sgd.step_size");
  e.sgd.gamma = Get<double>(doc, "sgd.gamma");

  WorldConfig &w = c.world;
  c.scenario = ParseScenario(Get<std::string>(doc, "world.scenario"));
  c.partition_clients = Get<std::size_t>(doc, "world.partition_clients");
  w.input_dim = Get<std::size_t>(doc, "world.input_dim");
  w.signal_dim = Get<std::size_t>(doc, "world.signal_dim");
  w.volume_ratios = GetList<double>(doc, "world.volume_ratios");
  w.train_identities = GetList<int>(doc, "world.train_identities");
  w.cameras = GetList<int>(doc, "world.cameras");
  w.groups = GetList<int>(doc, "world.groups");
  w.total_train_samples = Get<std::size_t>(doc, "world.total_train_samples");
  w.group_count = Get<int>(doc, "world.group_count");
  w.test_identities = Get<int>(doc, "world.test_identities");
  w.test_samples_per_camera = Get<int>(doc, "world.test_samples_per_camera");
  w.signal_scale = Get<double>(doc, "world.signal_scale");
  w.group_shift = Get<double>(doc, "world.group_shift");
  w.domain_shift = Get<double>(doc, "world.domain_shift");
  w.camera_shift = Get<double>(doc, "world.camera_shift");
  w.camera_distortion = Get<double>(doc, "world.camera_distortion");
  w.noise = Get<double>(doc, "world.noise");
  w.shared_size = Get<std::size_t>(doc, "world.shared_size");
  w.shared_heldout = Get<bool>(doc, "world.shared_heldout");
  w.seed = world_seed_given ? Get<std::uint64_t>(doc, "world.seed") : e.seed;
  ValidateRunConfig(c);
  return c;
}

void ApplyOverride(json &doc, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    Fail(ErrorCode::kConfig, "override '" + assignment + "': expected key=value");
  }
  const std::string path = assignment.substr(0, eq);
  json *node = &doc;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) {
      Fail(ErrorCode::kConfig, "override '" + assignment + "': empty key segment");
    }
    keys.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->contains(keys[i])) {
      (*node)[keys[i]] = json::object();
    }
    node = &(*node)[keys[i]];
    if (!node->is_object()) {
      Fail(ErrorCode::kConfig, "override '" + assignment + "': " + keys[i] + " is not a section");
    }
  }
  (*node)[keys.back()] = ParseOverrideValue(assignment.substr(eq + 1));
}

RunConfig LoadRunConfig(const std::string &path, const std::vector<std::string> &overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      Fail(ErrorCode::kConfig, path + ": cannot open config file");
    }
    try {
      doc = json::parse(in);
    } catch (const json::parse_error &e) {
      Fail(ErrorCode::kConfig, path + ": " + e.what());
    }
  }
  for (const std::string &o : overrides) {
    ApplyOverride(doc, o);
  }
  return RunConfigFromJson(doc);
}

void ValidateRunConfig(const RunConfig &config) {
  ExperimentConfig e = config.experiment;
  // 0 clients means "every client of the world"; validate the rest as if resolved.
  if (e.clients == 0) {
    e.clients = std::max<std::size_t>(e.clients_per_round, 1);
  }
  if (e.clients_per_round == 0) {
    e.clients_per_round = e.clients;
  }
  ValidateExperimentConfig(e);
  ValidateWorldConfig(config.world);
  if (config.scenario == Scenario::kFederated) {
    if (config.world.volume_ratios.size() < 2) {
      Fail(ErrorCode::kConfig, "world.volume_ratios: the federated scenario needs at least 2 clients");
    }
  } else {
    if (config.world.volume_ratios.size() != 1) {
      Fail(ErrorCode::kConfig, std::string("world.volume_ratios: scenario ") + ScenarioName(config.scenario) +
                                   " partitions a single dataset; give exactly one entry");
    }
    if (config.scenario == Scenario::kByIdentity && config.partition_clients < 2) {
      Fail(ErrorCode::kConfig, "world.partition_clients: must be >= 2");
    }
  }
}

FederatedWorld BuildWorld(const RunConfig &config) {
  ValidateRunConfig(config);
  switch (config.scenario) {
    case Scenario::kFederated:
      return GenerateWorld(config.world);
    case Scenario::kByCamera: {
      const FederatedWorld source = GenerateSingleDataset(config.world);
      return ShardWorld(source, PartitionByCamera(source.clients.front().train));
    }
    case Scenario::kByIdentity: {
      const FederatedWorld source = GenerateSingleDataset(config.world);
      return ShardWorld(source, PartitionByIdentity(source.clients.front().train, config.partition_clients));
    }
  }
  Fail(ErrorCode::kConfig, "world.scenario: unsupported");
}

ExperimentConfig ResolveExperiment(const RunConfig &config, const FederatedWorld &world) {
  ExperimentConfig e = config.experiment;
  if (e.clients == 0) {
    e.clients = world.clients.size();
  }
  if (e.clients_per_round == 0) {
    e.clients_per_round = e.clients;
  }
  ValidateExperimentConfig(e);
  return e;
}

}  // namespace fedreid
