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

#ifndef FEDREID_DATAGEN_HPP_
#define FEDREID_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedreid {

inline constexpr int kUnlabeled = -1;
inline constexpr std::size_t kSharedBatchSize = 32;

struct Sample {
  std::vector<double> features;
  int identity = kUnlabeled;
  int camera = 0;
  int client = 0;

  bool operator==(const Sample &) const = default;
};

// Generation model. Every identity has a latent vector z; each super-group
// (family) embeds z through its own signal basis, each client applies a
// domain map plus offset, each camera applies an affine distortion plus bias:
//
//   x = M_cam * (M_client * (signal_scale * U_family * z) + o_client) + b_cam + noise * eps
//
// All random draws happen regardless of the magnitude knobs, so changing a
// knob with a fixed seed rescales the same underlying structure.
struct WorldConfig {
  std::size_t input_dim = 16;
  std::size_t signal_dim = 4;

  // Per-client lists; all must have the same length.
  std::vector<double> volume_ratios;
  std::vector<int> train_identities;
  std::vector<int> cameras;
  std::vector<int> groups;  // super-group of each client, in [0, group_count)

  std::size_t total_train_samples = 200;
  int group_count = 1;
  int test_identities = 40;
  int test_samples_per_camera = 1;

  double signal_scale = 1.0;
  double group_shift = 1.0;     // distance between super-group families
  double domain_shift = 0.5;    // per-client domain map + offset
  double camera_shift = 1.0;    // per-camera bias magnitude
  double camera_distortion = 0.1;
  double noise = 0.3;

  std::size_t shared_size = 64;
  bool shared_heldout = true;  // draw the shared set from an unseen family
  std::uint64_t seed = 0;

  /// Nine clients with the benchmark's volume spread, cameras and identity
  /// counts scaled down; used by the CLI defaults and the trend experiments.
  static WorldConfig BenchmarkLike(std::size_t total_train_samples);
};

struct ClientData {
  int id = 0;
  int group = 0;
  std::vector<Sample> train;
  std::vector<Sample> query;
  std::vector<Sample> gallery;

  std::size_t volume() const noexcept { return train.size(); }
};

struct FederatedWorld {
  std::size_t input_dim = 0;
  std::vector<ClientData> clients;
  std::vector<Sample> shared;  // identity labels are never used for training

  /// The first kSharedBatchSize shared samples; identical for every round and client.
  std::span<const Sample> SharedBatch() const;
};

/// Throws kConfig with the offending field name on an invalid config.
void ValidateWorldConfig(const WorldConfig &config);

/// Per-client train volumes after rounding the configured ratios.
std::vector<std::size_t> ScaledVolumes(const WorldConfig &config);

/// Requires >= 2 clients.
FederatedWorld GenerateWorld(const WorldConfig &config);

/// One multi-camera dataset (the config must describe exactly one client),
/// returned as a single-client world for re-partitioning.
FederatedWorld GenerateSingleDataset(const WorldConfig &config);

/// One shard per camera id, in ascending camera order.
std::vector<std::vector<Sample>> PartitionByCamera(std::span<const Sample> samples);

/// Identities (ascending) split into contiguous groups of floor or ceil of
/// I / num_clients; the larger groups come last.
std::vector<std::vector<Sample>> PartitionByIdentity(std::span<const Sample> samples, std::size_t num_clients);

struct QueryGallery {
  std::vector<Sample> query;
  std::vector<Sample> gallery;
  std::size_t excluded_identities = 0;  // seen by a single camera only
};

/// For each identity the lowest camera id supplies the queries and the other
/// cameras the gallery. Single-camera identities go to the gallery only.
QueryGallery MakeQueryGallery(std::span<const Sample> test_samples);

/// Builds a world whose clients are `shards` of `source`'s single dataset,
/// every client evaluating on the source query/gallery split.
FederatedWorld ShardWorld(const FederatedWorld &source, const std::vector<std::vector<Sample>> &shards);

/// Line-delimited text export. Header lines start with '#'; each record is
///   <split>\t<client>\t<identity>\t<camera>\t<f0>,<f1>,...
/// with split in {train, query, gallery, shared} and %.17g values.
std::string ExportWorld(const FederatedWorld &world);
FederatedWorld ImportWorld(const std::string &text);
void SaveWorld(const FederatedWorld &world, const std::string &path);
FederatedWorld LoadWorld(const std::string &path);

/// FNV-1a 64 over the export text, as 16 hex digits.
std::string WorldHash(const FederatedWorld &world);

}  // namespace fedreid

#endif  // FEDREID_DATAGEN_HPP_
