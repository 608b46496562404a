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

#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "logging.hpp"

namespace fedreid {

namespace {

bool HasMatch(const std::vector<bool> &matches) {
  return std::find(matches.begin(), matches.end(), true) != matches.end();
}

std::vector<double> GalleryNorms(const LabeledEmbeddings &gallery) {
  std::vector<double> out(gallery.size());
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    out[g] = Norm(std::span(gallery.values).subspan(g * gallery.dim, gallery.dim));
  }
  return out;
}

// Similarity of query q to every gallery entry; zero-norm pairs score 0.
void Similarities(const LabeledEmbeddings &queries, std::size_t q, const LabeledEmbeddings &gallery,
                  const std::vector<double> &gallery_norm, std::vector<double> &out) {
  const std::size_t dim = queries.dim;
  const auto qv = std::span(queries.values).subspan(q * dim, dim);
  const double qn = Norm(qv);
  out.resize(gallery.size());
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const double denom = qn * gallery_norm[g];
    out[g] = denom > 0.0 ? Dot(qv, std::span(gallery.values).subspan(g * dim, dim)) / denom : 0.0;
  }
}

}  // namespace

LabeledEmbeddings EmbedSamples(const Backbone &backbone, std::span<const Sample> samples) {
  LabeledEmbeddings out;
  out.dim = backbone.hidden_dim;
  std::vector<double> features;
  features.reserve(samples.size() * backbone.input_dim);
  for (const Sample &s : samples) {
    if (s.features.size() != backbone.input_dim) {
      Fail(ErrorCode::kDimension, "sample has " + std::to_string(s.features.size()) +
                                      " features, backbone expects " + std::to_string(backbone.input_dim));
    }
    features.insert(features.end(), s.features.begin(), s.features.end());
    out.identities.push_back(s.identity);
    out.cameras.push_back(s.camera);
  }
  out.values = Embed(backbone, features, samples.size());
  return out;
}

RankingResult RankGallery(const LabeledEmbeddings &queries, const LabeledEmbeddings &gallery) {
  if (queries.dim != gallery.dim) {
    Fail(ErrorCode::kDimension, "query and gallery embeddings differ in width");
  }
  const std::vector<double> gallery_norm = GalleryNorms(gallery);
  RankingResult out;
  out.order.resize(queries.size());
  out.matches.resize(queries.size());
  std::vector<double> similarity;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Similarities(queries, q, gallery, gallery_norm, similarity);
    std::vector<std::size_t> admissible;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (gallery.identities[g] != queries.identities[q] || gallery.cameras[g] != queries.cameras[q]) {
        admissible.push_back(g);
      }
    }
    std::stable_sort(admissible.begin(), admissible.end(),
                     [&](std::size_t a, std::size_t b) { return similarity[a] > similarity[b]; });
    std::vector<bool> matches(admissible.size());
    for (std::size_t i = 0; i < admissible.size(); ++i) {
      matches[i] = gallery.identities[admissible[i]] == queries.identities[q];
    }
    out.order[q] = std::move(admissible);
    out.matches[q] = std::move(matches);
  }
  return out;
}

std::vector<std::vector<std::size_t>> MatchRanks(const LabeledEmbeddings &queries, const LabeledEmbeddings &gallery) {
  if (queries.dim != gallery.dim) {
    Fail(ErrorCode::kDimension, "query and gallery embeddings differ in width");
  }
  const std::vector<double> gallery_norm = GalleryNorms(gallery);
  std::vector<std::vector<std::size_t>> out(queries.size());
  std::vector<double> similarity;
  std::vector<std::size_t> matches;
  std::vector<std::size_t> before;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Similarities(queries, q, gallery, gallery_norm, similarity);
    // a ranks ahead of b: higher similarity, or equal similarity and lower index.
    const auto ahead = [&](std::size_t a, std::size_t b) {
      return similarity[a] > similarity[b] || (similarity[a] == similarity[b] && a < b);
    };
    matches.clear();
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (gallery.identities[g] == queries.identities[q] && gallery.cameras[g] != queries.cameras[q]) {
        matches.push_back(g);
      }
    }
    std::sort(matches.begin(), matches.end(), ahead);
    // before[t]: non-matches ranked ahead of exactly t matches' worth of positions.
    before.assign(matches.size() + 1, 0);
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (gallery.identities[g] == queries.identities[q]) {
        continue;
      }
      const auto pos = std::upper_bound(matches.begin(), matches.end(), g,
                                        [&](std::size_t value, std::size_t m) { return ahead(value, m); });
      ++before[static_cast<std::size_t>(pos - matches.begin())];
    }
    std::size_t nonmatches_ahead = 0;
    for (std::size_t t = 0; t < matches.size(); ++t) {
      nonmatches_ahead += before[t];
      out[q].push_back(t + nonmatches_ahead + 1);
    }
  }
  return out;
}

std::size_t UnmatchedQueries(const RankingResult &ranking) {
  return static_cast<std::size_t>(
      std::count_if(ranking.matches.begin(), ranking.matches.end(), [](const auto &m) { return !HasMatch(m); }));
}

std::vector<double> Cmc(const RankingResult &ranking, std::span<const int> ks) {
  std::vector<double> hits(ks.size(), 0.0);
  std::size_t scored = 0;
  for (const auto &matches : ranking.matches) {
    if (!HasMatch(matches)) {
      continue;
    }
    ++scored;
    const auto first = static_cast<std::size_t>(std::find(matches.begin(), matches.end(), true) - matches.begin());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] > 0 && first < static_cast<std::size_t>(ks[i])) {
        hits[i] += 1.0;
      }
    }
  }
  if (const std::size_t skipped = ranking.matches.size() - scored; skipped > 0) {
    LogWarning("CMC: " + std::to_string(skipped) + " queries without an admissible match excluded");
  }
  if (scored == 0) {
    return std::vector<double>(ks.size(), 0.0);
  }
  for (double &h : hits) {
    h /= static_cast<double>(scored);
  }
  return hits;
}

double MeanAveragePrecision(const RankingResult &ranking) {
  double total = 0.0;
  std::size_t scored = 0;
  for (const auto &matches : ranking.matches) {
    double found = 0.0;
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < matches.size(); ++i) {
      if (matches[i]) {
        found += 1.0;
        precision_sum += found / static_cast<double>(i + 1);
      }
    }
    if (found == 0.0) {
      continue;
    }
    total += precision_sum / found;
    ++scored;
  }
  return scored == 0 ? 0.0 : total / static_cast<double>(scored);
}

RetrievalMetrics Evaluate(const Backbone &backbone, std::span<const Sample> query, std::span<const Sample> gallery) {
  const auto ranks = MatchRanks(EmbedSamples(backbone, query), EmbedSamples(backbone, gallery));
  RetrievalMetrics m;
  double r1 = 0.0, r5 = 0.0, r10 = 0.0, ap_sum = 0.0;
  for (const auto &r : ranks) {
    if (r.empty()) {
      ++m.excluded;
      continue;
    }
    ++m.queries;
    r1 += r.front() <= 1 ? 1.0 : 0.0;
    r5 += r.front() <= 5 ? 1.0 : 0.0;
    r10 += r.front() <= 10 ? 1.0 : 0.0;
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      precision_sum += static_cast<double>(i + 1) / static_cast<double>(r[i]);
    }
    ap_sum += precision_sum / static_cast<double>(r.size());
  }
  if (m.excluded > 0) {
    LogWarning("evaluation: " + std::to_string(m.excluded) + " queries without an admissible match excluded");
  }
  if (m.queries > 0) {
    const double n = static_cast<double>(m.queries);
    m.rank1 = r1 / n;
    m.rank5 = r5 / n;
    m.rank10 = r10 / n;
    m.map = ap_sum / n;
  }
  return m;
}

std::uint64_t CommunicationCost(std::uint64_t rounds, std::uint64_t model_bytes,
                                std::uint64_t participants_per_round) {
  return rounds * 2 * model_bytes * participants_per_round;
}

}  // namespace fedreid
