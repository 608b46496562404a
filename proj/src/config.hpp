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

#ifndef FEDREID_CONFIG_HPP_
#define FEDREID_CONFIG_HPP_

#include <string>
#include <vector>

#include "datagen.hpp"
#include "fedsim.hpp"
#include "json.hpp"

namespace fedreid {

// How the client shards of a run are produced.
//   federated    one shard per configured client (GenerateWorld)
//   by_camera    one dataset split by camera view
//   by_identity  one dataset split into partition_clients identity groups
enum class Scenario { kFederated, kByCamera, kByIdentity };

const char *ScenarioName(Scenario scenario);

struct RunConfig {
  ExperimentConfig experiment;
  WorldConfig world;
  Scenario scenario = Scenario::kFederated;
  std::size_t partition_clients = 6;  // by_identity only
};

/// Defaults used when a config omits a key: the benchmark-like nine-client
/// world with the tuned heterogeneity knobs.
RunConfig DefaultRunConfig();

/// Unknown keys and type mismatches throw kConfig naming the key path.
/// `world.seed` follows the top-level seed unless given explicitly.
RunConfig RunConfigFromJson(const nlohmann::json &doc);
nlohmann::json RunConfigToJson(const RunConfig &config);

/// Applies "a.b=value" overrides to a JSON document. The value is parsed as
/// JSON when possible and taken as a string otherwise.
void ApplyOverride(nlohmann::json &doc, const std::string &assignment);

RunConfig LoadRunConfig(const std::string &path, const std::vector<std::string> &overrides);

/// Validates both halves and the scenario settings.
void ValidateRunConfig(const RunConfig &config);

/// Generates the world a config describes.
FederatedWorld BuildWorld(const RunConfig &config);

/// Experiment settings with clients / clients_per_round = 0 ("all") replaced
/// by the world's client count.
ExperimentConfig ResolveExperiment(const RunConfig &config, const FederatedWorld &world);

}  // namespace fedreid

#endif  // FEDREID_CONFIG_HPP_
