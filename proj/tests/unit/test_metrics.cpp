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

#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fedreid;

namespace {

constexpr std::array<int, 3> kRanks = {1, 5, 10};

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

LabeledEmbeddings RandomEmbeddings(Rng &rng, std::size_t n, std::size_t dim, int identities, int cameras) {
  LabeledEmbeddings e;
  for (std::size_t i = 0; i < n; ++i) {
    Add(e, fedreid::testing::RandomVector(rng, dim), static_cast<int>(rng.UniformInt(identities)),
        static_cast<int>(rng.UniformInt(cameras)));
  }
  return e;
}

LabeledEmbeddings Permute(const LabeledEmbeddings &e, const std::vector<std::size_t> &perm) {
  LabeledEmbeddings out;
  out.dim = e.dim;
  for (std::size_t i : perm) {
    Add(out, std::vector<double>(e.values.begin() + i * e.dim, e.values.begin() + (i + 1) * e.dim), e.identities[i],
        e.cameras[i]);
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("match ranked first everywhere gives rank-1 = 1") {
  LabeledEmbeddings q, g;
  for (int id = 0; id < 5; ++id) {
    Add(q, Angle(id * 30.0), id, 0);
    Add(g, Angle(id * 30.0 + 1.0), id, 1);
  }
  const RankingResult r = RankGallery(q, g);
  CHECK(Cmc(r, kRanks)[0] == 1.0);
  CHECK(MeanAveragePrecision(r) == 1.0);
}

TEST_CASE("rank-1 0.5 and rank-5 1.0") {
  LabeledEmbeddings q, g;
  Add(q, Angle(0), 0, 0);
  Add(q, Angle(90), 1, 0);
  Add(g, Angle(1), 0, 1);    // query 0: rank 1
  Add(g, Angle(89), 2, 1);   // query 1: rank 1 (wrong id)
  Add(g, Angle(85), 3, 1);   // query 1: rank 2
  Add(g, Angle(75), 1, 1);   // query 1: rank 3 (true match)
  const auto cmc = Cmc(RankGallery(q, g), kRanks);
  CHECK(cmc[0] == 0.5);
  CHECK(cmc[1] == 1.0);
  CHECK(cmc[2] == 1.0);
}

TEST_CASE("AP with matches at ranks 1 and 3 is 5/6") {
  LabeledEmbeddings q, g;
  Add(q, Angle(0), 0, 0);
  Add(g, Angle(0), 0, 1);
  Add(g, Angle(10), 5, 1);
  Add(g, Angle(20), 0, 2);
  Add(g, Angle(90), 6, 1);
  const RankingResult r = RankGallery(q, g);
  CHECK(r.matches[0] == std::vector<bool>{true, false, true, false});
  CHECK(std::abs(MeanAveragePrecision(r) - 5.0 / 6.0) <= 1e-15);
  CHECK(MatchRanks(q, g)[0] == std::vector<std::size_t>{1, 3});
}

TEST_CASE("single match ranked last gives mAP = 1/G") {
  for (std::size_t gsize : {1u, 4u, 17u}) {
    LabeledEmbeddings q, g;
    Add(q, Angle(0), 0, 0);
    for (std::size_t i = 0; i + 1 < gsize; ++i) {
      Add(g, Angle(static_cast<double>(i)), 100 + static_cast<int>(i), 1);
    }
    Add(g, Angle(180), 0, 1);
    CHECK(MeanAveragePrecision(RankGallery(q, g)) == doctest::Approx(1.0 / static_cast<double>(gsize)));
  }
}

TEST_CASE("random embeddings give rank-1 near 1/G") {
  // One true match among G gallery items: rank-1 is Bernoulli(1/G) per query.
  constexpr std::size_t kGallery = 10;
  constexpr int kTrials = 4000;
  Rng rng(41);
  int hits = 0;
  for (int t = 0; t < kTrials; ++t) {
    LabeledEmbeddings q, g;
    Add(q, fedreid::testing::RandomVector(rng, 4), 0, 0);
    for (std::size_t i = 0; i < kGallery; ++i) {
      Add(g, fedreid::testing::RandomVector(rng, 4), i == 0 ? 0 : static_cast<int>(i), 1);
    }
    hits += RankGallery(q, g).matches[0][0] ? 1 : 0;
  }
  const double p = 1.0 / kGallery;
  const double sigma = std::sqrt(p * (1 - p) / kTrials);
  CHECK(std::abs(hits / static_cast<double>(kTrials) - p) <= 3 * sigma);
}

TEST_CASE("same-camera same-identity entries are not admissible") {
  LabeledEmbeddings q, g;
  Add(q, Angle(0), 0, 0);
  Add(g, Angle(0), 0, 0);    // junk: same id, same camera
  Add(g, Angle(30), 4, 0);   // different id, same camera: admissible
  Add(g, Angle(40), 0, 1);   // true match
  const RankingResult r = RankGallery(q, g);
  CHECK(r.order[0] == std::vector<std::size_t>{1, 2});
  CHECK(r.matches[0] == std::vector<bool>{false, true});

  LabeledEmbeddings g2;
  Add(g2, Angle(30), 4, 0);
  Add(g2, Angle(40), 0, 1);
  CHECK(RankGallery(q, g2).matches == r.matches);
}

TEST_CASE("query without an admissible match is excluded") {
  LabeledEmbeddings q, g;
  Add(q, Angle(0), 0, 0);
  Add(q, Angle(50), 1, 0);
  Add(g, Angle(0), 0, 1);
  Add(g, Angle(50), 1, 0);  // only same-camera copy of identity 1
  const RankingResult r = RankGallery(q, g);
  CHECK(UnmatchedQueries(r) == 1);
  CHECK(Cmc(r, kRanks)[0] == 1.0);
  CHECK(MeanAveragePrecision(r) == 1.0);
}

TEST_CASE("ties break by ascending gallery index") {
  LabeledEmbeddings q, g;
  Add(q, Angle(0), 0, 0);
  Add(g, Angle(10), 3, 1);
  Add(g, Angle(10), 0, 1);
  Add(g, Angle(10), 7, 1);
  const RankingResult r = RankGallery(q, g);
  CHECK(r.order[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(MatchRanks(q, g)[0] == std::vector<std::size_t>{2});
}

TEST_CASE("match ranks agree with the full ranking") {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto q = RandomEmbeddings(rng, 1 + rng.UniformInt(6), 3, 4, 3);
    const auto g = RandomEmbeddings(rng, 1 + rng.UniformInt(30), 3, 4, 3);
    const RankingResult r = RankGallery(q, g);
    const auto ranks = MatchRanks(q, g);
    for (std::size_t i = 0; i < q.size(); ++i) {
      std::vector<std::size_t> expected;
      for (std::size_t p = 0; p < r.matches[i].size(); ++p) {
        if (r.matches[i][p]) {
          expected.push_back(p + 1);
        }
      }
      CHECK(ranks[i] == expected);
    }
  }
}

TEST_CASE("CMC is monotone and mAP bounded") {
  Rng rng(43);
  const std::array<int, 10> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = RandomEmbeddings(rng, 5, 4, 3, 2);
    const auto g = RandomEmbeddings(rng, 25, 4, 3, 2);
    const RankingResult r = RankGallery(q, g);
    const auto cmc = Cmc(r, ks);
    for (std::size_t i = 1; i < cmc.size(); ++i) {
      CHECK(cmc[i - 1] <= cmc[i]);
    }
    if (UnmatchedQueries(r) == 0) {
      const double map = MeanAveragePrecision(r);
      CHECK(map > 0.0);
      CHECK(map <= 1.0);
    }
  }
}

TEST_CASE("gallery permutation leaves CMC and mAP unchanged") {
  Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = RandomEmbeddings(rng, 4, 3, 3, 2);
    const auto g = RandomEmbeddings(rng, 20, 3, 3, 2);
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(std::span(perm));
    const RankingResult a = RankGallery(q, g);
    const RankingResult b = RankGallery(q, Permute(g, perm));
    CHECK(Cmc(a, kRanks) == Cmc(b, kRanks));
    CHECK(MeanAveragePrecision(a) == doctest::Approx(MeanAveragePrecision(b)).epsilon(1e-15));
  }
}

TEST_CASE("evaluate agrees with the ranking path") {
  Rng rng(45);
  const Backbone bb = Backbone::Random(5, 4, rng);
  std::vector<Sample> query, gallery;
  for (int id = 0; id < 12; ++id) {
    Sample s;
    s.identity = id;
    s.camera = 0;
    s.features = fedreid::testing::RandomVector(rng, 5);
    query.push_back(s);
    for (int cam = 1; cam <= 2; ++cam) {
      Sample t = s;
      t.camera = cam;
      for (double &v : t.features) {
        v += 0.5 * rng.Normal();
      }
      gallery.push_back(t);
    }
  }
  const RetrievalMetrics m = Evaluate(bb, query, gallery);
  const RankingResult r = RankGallery(EmbedSamples(bb, query), EmbedSamples(bb, gallery));
  const auto cmc = Cmc(r, kRanks);
  CHECK(m.queries == 12);
  CHECK(m.excluded == 0);
  CHECK(m.rank1 == cmc[0]);
  CHECK(m.rank5 == cmc[1]);
  CHECK(m.rank10 == cmc[2]);
  CHECK(m.map == doctest::Approx(MeanAveragePrecision(r)).epsilon(1e-14));

  double ap = 0.0;
  for (const auto &ranks : MatchRanks(EmbedSamples(bb, query), EmbedSamples(bb, gallery))) {
    ap += oracle::AveragePrecision(ranks);
  }
  CHECK(m.map == doctest::Approx(ap / 12.0).epsilon(1e-14));
}

TEST_CASE("communication cost") {
  CHECK(CommunicationCost(300, 1000, 1) == 600000);
  CHECK(CommunicationCost(0, 1000, 9) == 0);
  CHECK(CommunicationCost(10, 100, 9) == 18000);
}

}  // TEST_SUITE
