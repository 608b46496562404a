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

#ifndef FEDREID_METRICS_HPP_
#define FEDREID_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "datagen.hpp"
#include "model.hpp"

namespace fedreid {

/// Row-major embeddings with their identity and camera labels.
struct LabeledEmbeddings {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<int> identities;
  std::vector<int> cameras;

  std::size_t size() const noexcept { return identities.size(); }
};

LabeledEmbeddings EmbedSamples(const Backbone &backbone, std::span<const Sample> samples);

struct RankingResult {
  // Per query: admissible gallery indices by descending cosine similarity
  // (ties by ascending index) and whether each ranked entry shares the
  // query identity.
  std::vector<std::vector<std::size_t>> order;
  std::vector<std::vector<bool>> matches;
};

/// Same-identity same-camera gallery entries are not admissible.
RankingResult RankGallery(const LabeledEmbeddings &queries, const LabeledEmbeddings &gallery);

/// Per query: 1-based ranks of its true matches within the admissible
/// ranking, ascending. Equal to reading the match positions off RankGallery
/// but without sorting the whole gallery.
std::vector<std::vector<std::size_t>> MatchRanks(const LabeledEmbeddings &queries, const LabeledEmbeddings &gallery);

/// Fraction of scored queries with a true match in the top k, for each k.
/// Queries without any admissible match are skipped and counted.
std::vector<double> Cmc(const RankingResult &ranking, std::span<const int> ks);

double MeanAveragePrecision(const RankingResult &ranking);

/// Queries with no admissible true match.
std::size_t UnmatchedQueries(const RankingResult &ranking);

struct RetrievalMetrics {
  double rank1 = 0.0;
  double rank5 = 0.0;
  double rank10 = 0.0;
  double map = 0.0;
  std::size_t queries = 0;
  std::size_t excluded = 0;
};

RetrievalMetrics Evaluate(const Backbone &backbone, std::span<const Sample> query, std::span<const Sample> gallery);

/// rounds * 2 * model_bytes * participants_per_round.
std::uint64_t CommunicationCost(std::uint64_t rounds, std::uint64_t model_bytes,
                                std::uint64_t participants_per_round);

}  // namespace fedreid

#endif  // FEDREID_METRICS_HPP_
