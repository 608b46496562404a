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

#include "datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "logging.hpp"
#include "numcore.hpp"

namespace fedreid {

namespace {

// Benchmark dataset statistics (train split), largest first.
constexpr double kBenchmarkVolumes[] = {32621, 16522, 12936, 7365, 3744, 1940, 632, 450, 248};
constexpr int kBenchmarkIdentities[] = {1041, 702, 751, 767, 285, 485, 316, 93, 59};
constexpr int kBenchmarkCameras[] = {15, 8, 6, 2, 2, 2, 2, 2, 2};
constexpr int kBenchmarkGroups[] = {0, 0, 0, 1, 1, 0, 1, 1, 1};

constexpr int kSharedCameras = 2;

using Matrix = std::vector<double>;  // row-major

Matrix RandomMatrix(Rng &rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows * cols);
  for (double &v : m) {
    v = rng.Normal();
  }
  return m;
}

std::vector<double> RandomVector(Rng &rng, std::size_t n) { return RandomMatrix(rng, n, 1); }

// Columns of a rows x cols matrix made orthonormal (modified Gram-Schmidt).
Matrix Orthonormalize(Matrix m, std::size_t rows, std::size_t cols) {
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        dot += m[i * cols + j] * m[i * cols + p];
      }
      for (std::size_t i = 0; i < rows; ++i) {
        m[i * cols + j] -= dot * m[i * cols + p];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      norm += m[i * cols + j] * m[i * cols + j];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      Fail(ErrorCode::kRuntime, "degenerate signal basis");
    }
    for (std::size_t i = 0; i < rows; ++i) {
      m[i * cols + j] /= norm;
    }
  }
  return m;
}

std::vector<double> MatVec(const Matrix &m, std::size_t rows, std::size_t cols, std::span<const double> v) {
  std::vector<double> out(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      acc += m[i * cols + j] * v[j];
    }
    out[i] = acc;
  }
  return out;
}

// x -> (I + a G / sqrt(D)) x + bias
struct AffineMap {
  std::size_t dim = 0;
  Matrix linear;
  std::vector<double> bias;

  static AffineMap Draw(Rng &rng, std::size_t dim, double distortion, double shift) {
    AffineMap map;
    map.dim = dim;
    map.linear = RandomMatrix(rng, dim, dim);
    const double scale = distortion / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        map.linear[i * dim + j] = (i == j ? 1.0 : 0.0) + scale * map.linear[i * dim + j];
      }
    }
    map.bias = RandomVector(rng, dim);
    for (double &b : map.bias) {
      b *= shift;
    }
    return map;
  }

  std::vector<double> Apply(std::span<const double> x) const {
    std::vector<double> y = MatVec(linear, dim, dim, x);
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] += bias[i];
    }
    return y;
  }
};

struct Family {
  Matrix basis;  // input_dim x signal_dim, orthonormal columns
};

struct Domain {
  const Family *family = nullptr;
  AffineMap client_map;
  bool has_client_map = true;
};

struct Generator {
  const WorldConfig &config;
  std::vector<Family> families;  // group_count + 1 (held-out last)

  std::vector<double> Centroid(const Family &family, std::span<const double> latent) const {
    std::vector<double> c = MatVec(family.basis, config.input_dim, config.signal_dim, latent);
    for (double &v : c) {
      v *= config.signal_scale;
    }
    return c;
  }

  std::vector<double> Observe(const Domain &domain, const AffineMap &camera, std::span<const double> latent,
                              Rng &noise_rng) const {
    std::vector<double> x = Centroid(*domain.family, latent);
    if (domain.has_client_map) {
      x = domain.client_map.Apply(x);
    }
    x = camera.Apply(x);
    for (double &v : x) {
      v += config.noise * noise_rng.Normal();
    }
    return x;
  }
};

std::vector<std::vector<double>> DrawLatents(Rng &rng, std::size_t count, std::size_t dim) {
  std::vector<std::vector<double>> latents(count);
  for (auto &z : latents) {
    z = RandomVector(rng, dim);
  }
  return latents;
}

FederatedWorld Generate(const WorldConfig &config) {
  const std::size_t num_clients = config.volume_ratios.size();
  const std::size_t dim = config.input_dim;
  Rng rng = Rng::Derive(config.seed, 0x5eed);

  Generator gen{config, {}};
  const Matrix base = RandomMatrix(rng, dim, config.signal_dim);
  for (int f = 0; f <= config.group_count; ++f) {
    Matrix m = RandomMatrix(rng, dim, config.signal_dim);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = base[i] + config.group_shift * m[i];
    }
    gen.families.push_back({Orthonormalize(std::move(m), dim, config.signal_dim)});
  }

  std::vector<Domain> domains(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    domains[k].family = &gen.families[static_cast<std::size_t>(config.groups[k])];
    domains[k].client_map = AffineMap::Draw(rng, dim, config.domain_shift, config.domain_shift);
  }
  std::vector<std::vector<AffineMap>> cameras(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    for (int c = 0; c < config.cameras[k]; ++c) {
      cameras[k].push_back(AffineMap::Draw(rng, dim, config.camera_distortion, config.camera_shift));
    }
  }
  std::vector<AffineMap> shared_cameras;
  for (int c = 0; c < kSharedCameras; ++c) {
    shared_cameras.push_back(AffineMap::Draw(rng, dim, config.camera_distortion, config.camera_shift));
  }

  const std::vector<std::size_t> volumes = ScaledVolumes(config);
  FederatedWorld world;
  world.input_dim = dim;
  int next_identity = 0;
  int next_camera = 0;
  std::vector<int> camera_base(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    Rng client_rng = Rng::Derive(config.seed, 1000 + k);
    const int ids = config.train_identities[k];
    const int cams = config.cameras[k];
    camera_base[k] = next_camera;

    ClientData client;
    client.id = static_cast<int>(k);
    client.group = config.groups[k];

    const auto train_latents = DrawLatents(client_rng, static_cast<std::size_t>(ids), config.signal_dim);
    for (std::size_t i = 0; i < volumes[k]; ++i) {
      const int local_id = static_cast<int>(i % static_cast<std::size_t>(ids));
      const int cam = static_cast<int>((i / static_cast<std::size_t>(ids) + static_cast<std::size_t>(local_id)) %
                                       static_cast<std::size_t>(cams));
      Sample s;
      s.features = gen.Observe(domains[k], cameras[k][static_cast<std::size_t>(cam)],
                               train_latents[static_cast<std::size_t>(local_id)], client_rng);
      s.identity = next_identity + local_id;
      s.camera = next_camera + cam;
      s.client = client.id;
      client.train.push_back(std::move(s));
    }
    next_identity += ids;

    const auto test_latents =
        DrawLatents(client_rng, static_cast<std::size_t>(config.test_identities), config.signal_dim);
    std::vector<Sample> test;
    for (int t = 0; t < config.test_identities; ++t) {
      for (int cam = 0; cam < cams; ++cam) {
        for (int r = 0; r < config.test_samples_per_camera; ++r) {
          Sample s;
          s.features = gen.Observe(domains[k], cameras[k][static_cast<std::size_t>(cam)],
                                   test_latents[static_cast<std::size_t>(t)], client_rng);
          s.identity = next_identity + t;
          s.camera = next_camera + cam;
          s.client = client.id;
          test.push_back(std::move(s));
        }
      }
    }
    next_identity += config.test_identities;
    next_camera += cams;

    QueryGallery split = MakeQueryGallery(test);
    client.query = std::move(split.query);
    client.gallery = std::move(split.gallery);
    world.clients.push_back(std::move(client));
  }

  Rng shared_rng = Rng::Derive(config.seed, 0x5a4ed);
  const std::size_t shared_ids = std::max<std::size_t>(1, config.shared_size / 4);
  const auto shared_latents = DrawLatents(shared_rng, shared_ids, config.signal_dim);
  Domain heldout;
  heldout.family = &gen.families.back();
  heldout.has_client_map = false;
  for (std::size_t s = 0; s < config.shared_size; ++s) {
    Sample sample;
    sample.identity = kUnlabeled;
    sample.client = -1;
    const auto &latent = shared_latents[s % shared_ids];
    if (config.shared_heldout) {
      const int cam = static_cast<int>(s % kSharedCameras);
      sample.features = gen.Observe(heldout, shared_cameras[static_cast<std::size_t>(cam)], latent, shared_rng);
      sample.camera = next_camera + cam;
    } else {
      // Mixture of the clients' own domains, round-robin over clients.
      const std::size_t k = s % num_clients;
      const int cam = static_cast<int>((s / num_clients) % static_cast<std::size_t>(config.cameras[k]));
      sample.features = gen.Observe(domains[k], cameras[k][static_cast<std::size_t>(cam)], latent, shared_rng);
      sample.camera = camera_base[k] + cam;
    }
    world.shared.push_back(std::move(sample));
  }
  return world;
}

void RequireField(bool ok, const std::string &field, const std::string &what) {
  if (!ok) {
    Fail(ErrorCode::kConfig, "world." + field + ": " + what);
  }
}

}  // namespace

WorldConfig WorldConfig::BenchmarkLike(std::size_t total_train_samples) {
  WorldConfig c;
  c.total_train_samples = total_train_samples;
  const double total_volume = std::accumulate(std::begin(kBenchmarkVolumes), std::end(kBenchmarkVolumes), 0.0);
  for (std::size_t k = 0; k < 9; ++k) {
    c.volume_ratios.push_back(kBenchmarkVolumes[k]);
    const double scaled = kBenchmarkIdentities[k] * static_cast<double>(total_train_samples) / total_volume;
    c.train_identities.push_back(std::max(2, static_cast<int>(std::lround(scaled))));
    c.cameras.push_back(kBenchmarkCameras[k]);
    c.groups.push_back(kBenchmarkGroups[k]);
  }
  c.group_count = 2;
  return c;
}

std::span<const Sample> FederatedWorld::SharedBatch() const {
  if (shared.size() < kSharedBatchSize) {
    Fail(ErrorCode::kBatchSize, "shared dataset has " + std::to_string(shared.size()) +
                                    " samples, the shared batch needs " + std::to_string(kSharedBatchSize));
  }
  return std::span<const Sample>(shared).first(kSharedBatchSize);
}

void ValidateWorldConfig(const WorldConfig &c) {
  const std::size_t n = c.volume_ratios.size();
  RequireField(c.input_dim >= 1, "input_dim", "must be >= 1");
  RequireField(c.signal_dim >= 1 && c.signal_dim <= c.input_dim, "signal_dim", "must be in [1, input_dim]");
  RequireField(n >= 1, "volume_ratios", "at least one client required");
  RequireField(c.train_identities.size() == n, "train_identities",
               "expected " + std::to_string(n) + " entries, got " + std::to_string(c.train_identities.size()));
  RequireField(c.cameras.size() == n, "cameras",
               "expected " + std::to_string(n) + " entries, got " + std::to_string(c.cameras.size()));
  RequireField(c.groups.size() == n, "groups",
               "expected " + std::to_string(n) + " entries, got " + std::to_string(c.groups.size()));
  RequireField(c.group_count >= 1, "group_count", "must be >= 1");
  for (std::size_t k = 0; k < n; ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    RequireField(c.volume_ratios[k] > 0.0 && std::isfinite(c.volume_ratios[k]), "volume_ratios" + idx,
                 "must be positive");
    RequireField(c.train_identities[k] >= 2, "train_identities" + idx, "need at least 2 identities per client");
    RequireField(c.cameras[k] >= 2, "cameras" + idx, "need at least 2 cameras per client");
    RequireField(c.groups[k] >= 0 && c.groups[k] < c.group_count, "groups" + idx,
                 "must be in [0, group_count)");
  }
  RequireField(c.total_train_samples >= n, "total_train_samples", "must be at least one sample per client");
  RequireField(c.test_identities >= 2, "test_identities", "need at least 2 test identities");
  RequireField(c.test_samples_per_camera >= 1, "test_samples_per_camera", "must be >= 1");
  RequireField(c.shared_size >= kSharedBatchSize, "shared_size",
               "must hold the " + std::to_string(kSharedBatchSize) + "-sample shared batch");
  for (const auto &[name, value] : {std::pair{"signal_scale", c.signal_scale}, {"group_shift", c.group_shift},
                                    {"domain_shift", c.domain_shift}, {"camera_shift", c.camera_shift},
                                    {"camera_distortion", c.camera_distortion}, {"noise", c.noise}}) {
    RequireField(value >= 0.0 && std::isfinite(value), name, "must be finite and >= 0");
  }
}

std::vector<std::size_t> ScaledVolumes(const WorldConfig &config) {
  const double sum = std::accumulate(config.volume_ratios.begin(), config.volume_ratios.end(), 0.0);
  std::vector<std::size_t> out;
  for (double r : config.volume_ratios) {
    const double exact = static_cast<double>(config.total_train_samples) * r / sum;
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact))));
  }
  return out;
}

FederatedWorld GenerateWorld(const WorldConfig &config) {
  ValidateWorldConfig(config);
  if (config.volume_ratios.size() < 2) {
    Fail(ErrorCode::kConfig, "world.volume_ratios: a federated world needs at least 2 clients");
  }
  return Generate(config);
}

FederatedWorld GenerateSingleDataset(const WorldConfig &config) {
  ValidateWorldConfig(config);
  if (config.volume_ratios.size() != 1) {
    Fail(ErrorCode::kConfig, "world.volume_ratios: a single dataset has exactly one entry");
  }
  return Generate(config);
}

std::vector<std::vector<Sample>> PartitionByCamera(std::span<const Sample> samples) {
  std::map<int, std::vector<Sample>> by_camera;
  for (const Sample &s : samples) {
    by_camera[s.camera].push_back(s);
  }
  if (by_camera.size() < 2) {
    Fail(ErrorCode::kPartition, "partition by camera needs at least 2 cameras, found " +
                                    std::to_string(by_camera.size()));
  }
  std::vector<std::vector<Sample>> shards;
  for (auto &[camera, shard] : by_camera) {
    shards.push_back(std::move(shard));
  }
  return shards;
}

std::vector<std::vector<Sample>> PartitionByIdentity(std::span<const Sample> samples, std::size_t num_clients) {
  std::set<int> identity_set;
  for (const Sample &s : samples) {
    identity_set.insert(s.identity);
  }
  const std::vector<int> identities(identity_set.begin(), identity_set.end());
  if (num_clients == 0 || num_clients > identities.size()) {
    Fail(ErrorCode::kPartition, "cannot split " + std::to_string(identities.size()) + " identities into " +
                                    std::to_string(num_clients) + " clients");
  }
  const std::size_t base = identities.size() / num_clients;
  const std::size_t larger = identities.size() % num_clients;
  std::map<int, std::size_t> shard_of;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < num_clients; ++g) {
    const std::size_t size = base + (g >= num_clients - larger ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      shard_of[identities[pos++]] = g;
    }
  }
  std::vector<std::vector<Sample>> shards(num_clients);
  for (const Sample &s : samples) {
    shards[shard_of.at(s.identity)].push_back(s);
  }
  return shards;
}

QueryGallery MakeQueryGallery(std::span<const Sample> test_samples) {
  std::map<int, std::set<int>> cameras_of;
  std::set<int> all_cameras;
  for (const Sample &s : test_samples) {
    cameras_of[s.identity].insert(s.camera);
    all_cameras.insert(s.camera);
  }
  if (all_cameras.size() < 2) {
    Fail(ErrorCode::kPartition, "query/gallery split needs test samples from at least 2 cameras");
  }
  QueryGallery out;
  for (const auto &[identity, cams] : cameras_of) {
    if (cams.size() < 2) {
      ++out.excluded_identities;
    }
  }
  for (const Sample &s : test_samples) {
    const auto &cams = cameras_of[s.identity];
    if (cams.size() >= 2 && s.camera == *cams.begin()) {
      out.query.push_back(s);
    } else {
      out.gallery.push_back(s);
    }
  }
  if (out.excluded_identities > 0) {
    LogWarning("query/gallery split: " + std::to_string(out.excluded_identities) +
               " single-camera identities kept out of the queries");
  }
  return out;
}

FederatedWorld ShardWorld(const FederatedWorld &source, const std::vector<std::vector<Sample>> &shards) {
  if (source.clients.size() != 1) {
    Fail(ErrorCode::kPartition, "sharding expects a single-dataset world");
  }
  FederatedWorld world;
  world.input_dim = source.input_dim;
  world.shared = source.shared;
  for (std::size_t k = 0; k < shards.size(); ++k) {
    ClientData client;
    client.id = static_cast<int>(k);
    client.group = 0;
    client.train = shards[k];
    for (Sample &s : client.train) {
      s.client = client.id;
    }
    client.query = source.clients.front().query;
    client.gallery = source.clients.front().gallery;
    for (Sample &s : client.query) {
      s.client = client.id;
    }
    for (Sample &s : client.gallery) {
      s.client = client.id;
    }
    world.clients.push_back(std::move(client));
  }
  return world;
}

namespace {

void AppendRecord(std::string &out, const char *split, const Sample &s) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s\t%d\t%d\t%d\t", split, s.client, s.identity, s.camera);
  out += buf;
  for (std::size_t i = 0; i < s.features.size(); ++i) {
    std::snprintf(buf, sizeof(buf), i == 0 ? "%.17g" : ",%.17g", s.features[i]);
    out += buf;
  }
  out += '\n';
}

std::vector<std::string> SplitOn(const std::string &line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

int ParseInt(const std::string &text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) {
      return v;
    }
  } catch (const std::exception &) {
  }
  Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": bad integer '" + text + "'");
}

}  // namespace

std::string ExportWorld(const FederatedWorld &world) {
  std::string out = "#fedreid-world 1\n";
  out += "#input_dim " + std::to_string(world.input_dim) + "\n";
  out += "#shared_batch " + std::to_string(kSharedBatchSize) + "\n";
  out += "#clients " + std::to_string(world.clients.size()) + "\n";
  for (const ClientData &c : world.clients) {
    out += "#client " + std::to_string(c.id) + " group " + std::to_string(c.group) + "\n";
  }
  for (const ClientData &c : world.clients) {
    for (const Sample &s : c.train) AppendRecord(out, "train", s);
    for (const Sample &s : c.query) AppendRecord(out, "query", s);
    for (const Sample &s : c.gallery) AppendRecord(out, "gallery", s);
  }
  for (const Sample &s : world.shared) AppendRecord(out, "shared", s);
  return out;
}

FederatedWorld ImportWorld(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  FederatedWorld world;
  std::size_t line_no = 0;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "fedreid-world") {
        int version = 0;
        h >> version;
        if (version != 1) {
          Fail(ErrorCode::kFormat, "unsupported world version " + std::to_string(version));
        }
        saw_magic = true;
      } else if (key == "input_dim") {
        h >> world.input_dim;
      } else if (key == "client") {
        ClientData c;
        std::string group_key;
        h >> c.id >> group_key >> c.group;
        if (c.id != static_cast<int>(world.clients.size())) {
          Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": clients out of order");
        }
        world.clients.push_back(std::move(c));
      }
      continue;
    }
    if (!saw_magic) {
      Fail(ErrorCode::kFormat, "world export is missing its '#fedreid-world 1' header");
    }
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 5) {
      Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": expected 5 tab-separated fields");
    }
    Sample s;
    s.client = ParseInt(fields[1], line_no);
    s.identity = ParseInt(fields[2], line_no);
    s.camera = ParseInt(fields[3], line_no);
    for (const std::string &v : SplitOn(fields[4], ',')) {
      char *end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (end == v.c_str() || *end != '\0' || !std::isfinite(x)) {
        Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": bad feature '" + v + "'");
      }
      s.features.push_back(x);
    }
    if (s.features.size() != world.input_dim) {
      Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(world.input_dim) + " features");
    }
    const std::string &split = fields[0];
    if (split == "shared") {
      world.shared.push_back(std::move(s));
      continue;
    }
    if (s.client < 0 || static_cast<std::size_t>(s.client) >= world.clients.size()) {
      Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": unknown client");
    }
    ClientData &c = world.clients[static_cast<std::size_t>(s.client)];
    if (split == "train") {
      c.train.push_back(std::move(s));
    } else if (split == "query") {
      c.query.push_back(std::move(s));
    } else if (split == "gallery") {
      c.gallery.push_back(std::move(s));
    } else {
      Fail(ErrorCode::kFormat, "world line " + std::to_string(line_no) + ": unknown split '" + split + "'");
    }
  }
  if (!saw_magic) {
    Fail(ErrorCode::kFormat, "world export is missing its '#fedreid-world 1' header");
  }
  return world;
}

void SaveWorld(const FederatedWorld &world, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    Fail(ErrorCode::kIo, "cannot write world export " + path);
  }
  out << ExportWorld(world);
}

FederatedWorld LoadWorld(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorCode::kIo, "cannot read world export " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ImportWorld(buf.str());
}

std::string WorldHash(const FederatedWorld &world) {
  const std::string text = ExportWorld(world);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fedreid
