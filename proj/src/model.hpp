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

#ifndef FEDREID_MODEL_HPP_
#define FEDREID_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "numcore.hpp"

namespace fedreid {

/// Shared feature extractor: embedding = relu(x * w1 + b1).
/// w1 is row-major input_dim x hidden_dim.
struct Backbone {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> w1;
  std::vector<double> b1;

  static Backbone Zeros(std::size_t input_dim, std::size_t hidden_dim);
  /// He-normal weights, zero bias.
  static Backbone Random(std::size_t input_dim, std::size_t hidden_dim, Rng &rng);
  static Backbone FromParams(std::size_t input_dim, std::size_t hidden_dim, const ParamVector &params);

  std::size_t ParamCount() const noexcept { return input_dim * hidden_dim + hidden_dim; }
  /// Layout: w1 row-major, then b1.
  ParamVector ToParams() const;
};

/// Private identity head: logits = embedding * w2 + b2. w2 is hidden_dim x num_classes.
struct Classifier {
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> w2;
  std::vector<double> b2;

  static Classifier Zeros(std::size_t hidden_dim, std::size_t num_classes);
  static Classifier Random(std::size_t hidden_dim, std::size_t num_classes, Rng &rng);
  static Classifier FromParams(std::size_t hidden_dim, std::size_t num_classes, const ParamVector &params);

  ParamVector ToParams() const;
};

struct SgdConfig {
  double lr_backbone = 0.005;
  double lr_classifier = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int step_size = 40;  // in cumulative local epochs
  double gamma = 0.1;
};

/// Step schedule: base * gamma^floor(epoch / step_size).
double ScheduledRate(double base, int cumulative_epoch, int step_size, double gamma);

struct OptimizerState {
  std::vector<double> w1_momentum;
  std::vector<double> b1_momentum;
  std::vector<double> w2_momentum;
  std::vector<double> b2_momentum;
  int cumulative_epoch = 0;

  static OptimizerState For(const Backbone &backbone, const Classifier &classifier);
};

/// Row-major view over `rows` samples of `cols` features plus optional labels.
struct Batch {
  std::span<const double> features;
  std::span<const int> labels;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct ForwardResult {
  std::vector<double> pre_activation;  // rows x hidden
  std::vector<double> embeddings;      // rows x hidden
  std::vector<double> logits;          // rows x classes
  double loss = 0.0;
};

struct Gradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;
};

/// Embeddings only, no labels needed.
std::vector<double> Embed(const Backbone &backbone, std::span<const double> features, std::size_t rows);

/// Mean softmax cross-entropy with max subtraction. Throws kLabel on an
/// out-of-range label.
ForwardResult Forward(const Backbone &backbone, const Classifier &classifier, const Batch &batch);

Gradients ComputeGradients(const Backbone &backbone, const Classifier &classifier, const Batch &batch,
                           const ForwardResult &forward);

/// Momentum SGD with decoupled per-part learning rates at the state's
/// cumulative epoch. Throws kDivergence naming the offending block if any
/// gradient is non-finite; parameters are untouched in that case.
void ApplySgdStep(Backbone &backbone, Classifier &classifier, OptimizerState &state,
                  const Gradients &grads, const SgdConfig &config);

/// Forward + backward + step on one batch. Returns the pre-step loss.
double BackwardAndStep(Backbone &backbone, Classifier &classifier, OptimizerState &state,
                       const Batch &batch, const SgdConfig &config);

/// Flattened embeddings of exactly `expected_rows` samples.
std::vector<double> ExtractFeatures(const Backbone &backbone, const Batch &batch, std::size_t expected_rows);

/// Flattened pre-softmax logits.
std::vector<double> ExtractLogits(const Backbone &backbone, const Classifier &classifier, const Batch &batch);

/// Mean squared error between the backbone's embeddings and `targets`
/// (rows x hidden), averaged over all elements, and its gradient wrt the
/// backbone.
struct EmbeddingMse {
  double loss = 0.0;
  std::vector<double> grad_w1;
  std::vector<double> grad_b1;
};
EmbeddingMse EmbeddingMseGradient(const Backbone &backbone, std::span<const double> features,
                                  std::size_t rows, std::span<const double> targets);

// ---------------------------------------------------------------------------
// Checkpoints. Text layout, one item per line:
//
//   fedreid-checkpoint 1
//   kind backbone|classifier
//   input_dim <n>
//   hidden_dim <n>
//   num_classes <n>          (0 for a backbone)
//   cumulative_epoch <n>
//   length <n>
//   <value>                  x length, %.17g, so round trips are exact
// ---------------------------------------------------------------------------

struct Checkpoint {
  std::string kind = "backbone";
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  int cumulative_epoch = 0;
  ParamVector params;
};

std::string SerializeCheckpoint(const Checkpoint &checkpoint);
Checkpoint ParseCheckpoint(const std::string &text);
void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);

Checkpoint MakeBackboneCheckpoint(const Backbone &backbone, int cumulative_epoch);
Backbone BackboneFromCheckpoint(const Checkpoint &checkpoint);

}  // namespace fedreid

#endif  // FEDREID_MODEL_HPP_
