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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace fedreid {

namespace {

constexpr double kClassifierInitStd = 0.01;

void CheckBatchShape(const Backbone &backbone, const Batch &batch) {
  if (batch.rows == 0) {
    Fail(ErrorCode::kBatchSize, "empty batch");
  }
  if (batch.cols != backbone.input_dim || batch.features.size() != batch.rows * batch.cols) {
    Fail(ErrorCode::kDimension, "batch has " + std::to_string(batch.cols) +
                                    " features per sample, backbone expects " +
                                    std::to_string(backbone.input_dim));
  }
}

void Affine(std::span<const double> x, std::size_t rows, std::size_t in, std::size_t out,
            const std::vector<double> &w, const std::vector<double> &b, std::vector<double> &y) {
  y.assign(rows * out, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double *yr = y.data() + r * out;
    for (std::size_t j = 0; j < out; ++j) {
      yr[j] = b[j];
    }
    const double *xr = x.data() + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      const double *wi = w.data() + i * out;
      for (std::size_t j = 0; j < out; ++j) {
        yr[j] += xi * wi[j];
      }
    }
  }
}

void MomentumUpdate(std::vector<double> &param, std::vector<double> &buffer,
                    const std::vector<double> &grad, double lr, const SgdConfig &config) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + config.weight_decay * param[i];
    buffer[i] = config.momentum * buffer[i] + g;
    param[i] -= lr * buffer[i];
  }
}

std::vector<double> Slice(std::span<const double> src, std::size_t offset, std::size_t count) {
  return {src.begin() + static_cast<std::ptrdiff_t>(offset),
          src.begin() + static_cast<std::ptrdiff_t>(offset + count)};
}

}  // namespace

Backbone Backbone::Zeros(std::size_t input_dim, std::size_t hidden_dim) {
  Backbone b;
  b.input_dim = input_dim;
  b.hidden_dim = hidden_dim;
  b.w1.assign(input_dim * hidden_dim, 0.0);
  b.b1.assign(hidden_dim, 0.0);
  return b;
}

Backbone Backbone::Random(std::size_t input_dim, std::size_t hidden_dim, Rng &rng) {
  Backbone b = Zeros(input_dim, hidden_dim);
  const double scale = std::sqrt(2.0 / static_cast<double>(input_dim));
  for (double &w : b.w1) {
    w = scale * rng.Normal();
  }
  return b;
}

Backbone Backbone::FromParams(std::size_t input_dim, std::size_t hidden_dim, const ParamVector &params) {
  const std::size_t expected = input_dim * hidden_dim + hidden_dim;
  if (params.size() != expected) {
    Fail(ErrorCode::kDimension, "backbone params have length " + std::to_string(params.size()) +
                                    ", expected " + std::to_string(expected));
  }
  Backbone b;
  b.input_dim = input_dim;
  b.hidden_dim = hidden_dim;
  b.w1 = Slice(params.values(), 0, input_dim * hidden_dim);
  b.b1 = Slice(params.values(), input_dim * hidden_dim, hidden_dim);
  return b;
}

ParamVector Backbone::ToParams() const {
  std::vector<double> out;
  out.reserve(ParamCount());
  out.insert(out.end(), w1.begin(), w1.end());
  out.insert(out.end(), b1.begin(), b1.end());
  return ParamVector(std::move(out));
}

Classifier Classifier::Zeros(std::size_t hidden_dim, std::size_t num_classes) {
  Classifier c;
  c.hidden_dim = hidden_dim;
  c.num_classes = num_classes;
  c.w2.assign(hidden_dim * num_classes, 0.0);
  c.b2.assign(num_classes, 0.0);
  return c;
}

Classifier Classifier::Random(std::size_t hidden_dim, std::size_t num_classes, Rng &rng) {
  Classifier c = Zeros(hidden_dim, num_classes);
  for (double &w : c.w2) {
    w = kClassifierInitStd * rng.Normal();
  }
  return c;
}

Classifier Classifier::FromParams(std::size_t hidden_dim, std::size_t num_classes, const ParamVector &params) {
  const std::size_t expected = hidden_dim * num_classes + num_classes;
  if (params.size() != expected) {
    Fail(ErrorCode::kDimension, "classifier params have length " + std::to_string(params.size()) +
                                    ", expected " + std::to_string(expected));
  }
  Classifier c;
  c.hidden_dim = hidden_dim;
  c.num_classes = num_classes;
  c.w2 = Slice(params.values(), 0, hidden_dim * num_classes);
  c.b2 = Slice(params.values(), hidden_dim * num_classes, num_classes);
  return c;
}

ParamVector Classifier::ToParams() const {
  std::vector<double> out;
  out.reserve(w2.size() + b2.size());
  out.insert(out.end(), w2.begin(), w2.end());
  out.insert(out.end(), b2.begin(), b2.end());
  return ParamVector(std::move(out));
}

double ScheduledRate(double base, int cumulative_epoch, int step_size, double gamma) {
  if (step_size <= 0) {
    return base;
  }
  const int steps = cumulative_epoch / step_size;
  double rate = base;
  for (int i = 0; i < steps; ++i) {
    rate *= gamma;
  }
  return rate;
}

OptimizerState OptimizerState::For(const Backbone &backbone, const Classifier &classifier) {
  OptimizerState s;
  s.w1_momentum.assign(backbone.w1.size(), 0.0);
  s.b1_momentum.assign(backbone.b1.size(), 0.0);
  s.w2_momentum.assign(classifier.w2.size(), 0.0);
  s.b2_momentum.assign(classifier.b2.size(), 0.0);
  return s;
}

std::vector<double> Embed(const Backbone &backbone, std::span<const double> features, std::size_t rows) {
  if (features.size() != rows * backbone.input_dim) {
    Fail(ErrorCode::kDimension, "embed: feature block does not match input_dim");
  }
  std::vector<double> out;
  Affine(features, rows, backbone.input_dim, backbone.hidden_dim, backbone.w1, backbone.b1, out);
  for (double &v : out) {
    v = std::max(v, 0.0);
  }
  return out;
}

ForwardResult Forward(const Backbone &backbone, const Classifier &classifier, const Batch &batch) {
  CheckBatchShape(backbone, batch);
  if (classifier.hidden_dim != backbone.hidden_dim) {
    Fail(ErrorCode::kDimension, "classifier width does not match backbone hidden_dim");
  }
  if (batch.labels.size() != batch.rows) {
    Fail(ErrorCode::kLabel, "batch has " + std::to_string(batch.labels.size()) + " labels for " +
                                std::to_string(batch.rows) + " samples");
  }
  const std::size_t classes = classifier.num_classes;
  for (int label : batch.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      Fail(ErrorCode::kLabel, "label " + std::to_string(label) + " outside [0, " +
                                  std::to_string(classes) + ")");
    }
  }

  ForwardResult out;
  Affine(batch.features, batch.rows, backbone.input_dim, backbone.hidden_dim, backbone.w1, backbone.b1,
         out.pre_activation);
  out.embeddings = out.pre_activation;
  for (double &v : out.embeddings) {
    v = std::max(v, 0.0);
  }
  Affine(out.embeddings, batch.rows, backbone.hidden_dim, classes, classifier.w2, classifier.b2, out.logits);

  double total = 0.0;
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const double *lr = out.logits.data() + r * classes;
    const double top = *std::max_element(lr, lr + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      sum += std::exp(lr[c] - top);
    }
    total += top + std::log(sum) - lr[batch.labels[r]];
  }
  out.loss = total / static_cast<double>(batch.rows);
  return out;
}

Gradients ComputeGradients(const Backbone &backbone, const Classifier &classifier, const Batch &batch,
                           const ForwardResult &forward) {
  const std::size_t rows = batch.rows;
  const std::size_t in = backbone.input_dim;
  const std::size_t hidden = backbone.hidden_dim;
  const std::size_t classes = classifier.num_classes;
  const double inv_rows = 1.0 / static_cast<double>(rows);

  Gradients g;
  g.w1.assign(in * hidden, 0.0);
  g.b1.assign(hidden, 0.0);
  g.w2.assign(hidden * classes, 0.0);
  g.b2.assign(classes, 0.0);

  std::vector<double> dlogits(classes);
  std::vector<double> dpre(hidden);
  for (std::size_t r = 0; r < rows; ++r) {
    const double *lr = forward.logits.data() + r * classes;
    const double top = *std::max_element(lr, lr + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      dlogits[c] = std::exp(lr[c] - top);
      sum += dlogits[c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      dlogits[c] = dlogits[c] / sum * inv_rows;
    }
    dlogits[batch.labels[r]] -= inv_rows;

    const double *emb = forward.embeddings.data() + r * hidden;
    const double *pre = forward.pre_activation.data() + r * hidden;
    for (std::size_t h = 0; h < hidden; ++h) {
      const double *w2h = classifier.w2.data() + h * classes;
      double *gw2h = g.w2.data() + h * classes;
      double back = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        gw2h[c] += emb[h] * dlogits[c];
        back += w2h[c] * dlogits[c];
      }
      dpre[h] = pre[h] > 0.0 ? back : 0.0;
    }
    for (std::size_t c = 0; c < classes; ++c) {
      g.b2[c] += dlogits[c];
    }
    const double *x = batch.features.data() + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      double *gw1i = g.w1.data() + i * hidden;
      for (std::size_t h = 0; h < hidden; ++h) {
        gw1i[h] += x[i] * dpre[h];
      }
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      g.b1[h] += dpre[h];
    }
  }
  return g;
}

void ApplySgdStep(Backbone &backbone, Classifier &classifier, OptimizerState &state,
                  const Gradients &grads, const SgdConfig &config) {
  const std::pair<const char *, const std::vector<double> *> blocks[] = {
      {"backbone.w1", &grads.w1},
      {"backbone.b1", &grads.b1},
      {"classifier.w2", &grads.w2},
      {"classifier.b2", &grads.b2},
  };
  for (const auto &[name, grad] : blocks) {
    if (!AllFinite(*grad)) {
      Fail(ErrorCode::kDivergence, std::string("non-finite gradient in ") + name);
    }
  }
  const double lr_b =
      ScheduledRate(config.lr_backbone, state.cumulative_epoch, config.step_size, config.gamma);
  const double lr_c =
      ScheduledRate(config.lr_classifier, state.cumulative_epoch, config.step_size, config.gamma);
  MomentumUpdate(backbone.w1, state.w1_momentum, grads.w1, lr_b, config);
  MomentumUpdate(backbone.b1, state.b1_momentum, grads.b1, lr_b, config);
  MomentumUpdate(classifier.w2, state.w2_momentum, grads.w2, lr_c, config);
  MomentumUpdate(classifier.b2, state.b2_momentum, grads.b2, lr_c, config);
  if (!AllFinite(backbone.w1) || !AllFinite(backbone.b1)) {
    Fail(ErrorCode::kDivergence, "non-finite parameter in backbone after step");
  }
  if (!AllFinite(classifier.w2) || !AllFinite(classifier.b2)) {
    Fail(ErrorCode::kDivergence, "non-finite parameter in classifier after step");
  }
}

double BackwardAndStep(Backbone &backbone, Classifier &classifier, OptimizerState &state,
                       const Batch &batch, const SgdConfig &config) {
  const ForwardResult fwd = Forward(backbone, classifier, batch);
  if (!std::isfinite(fwd.loss)) {
    Fail(ErrorCode::kDivergence, "non-finite loss");
  }
  const Gradients grads = ComputeGradients(backbone, classifier, batch, fwd);
  ApplySgdStep(backbone, classifier, state, grads, config);
  return fwd.loss;
}

std::vector<double> ExtractFeatures(const Backbone &backbone, const Batch &batch, std::size_t expected_rows) {
  if (batch.rows != expected_rows) {
    Fail(ErrorCode::kBatchSize, "feature batch has " + std::to_string(batch.rows) +
                                    " samples, expected " + std::to_string(expected_rows));
  }
  CheckBatchShape(backbone, batch);
  return Embed(backbone, batch.features, batch.rows);
}

std::vector<double> ExtractLogits(const Backbone &backbone, const Classifier &classifier, const Batch &batch) {
  CheckBatchShape(backbone, batch);
  if (classifier.hidden_dim != backbone.hidden_dim) {
    Fail(ErrorCode::kDimension, "classifier width does not match backbone hidden_dim");
  }
  const std::vector<double> emb = Embed(backbone, batch.features, batch.rows);
  std::vector<double> logits;
  Affine(emb, batch.rows, backbone.hidden_dim, classifier.num_classes, classifier.w2, classifier.b2, logits);
  return logits;
}

EmbeddingMse EmbeddingMseGradient(const Backbone &backbone, std::span<const double> features,
                                  std::size_t rows, std::span<const double> targets) {
  const std::size_t in = backbone.input_dim;
  const std::size_t hidden = backbone.hidden_dim;
  if (rows == 0 || features.size() != rows * in) {
    Fail(ErrorCode::kDimension, "distillation features do not match input_dim");
  }
  if (targets.size() != rows * hidden) {
    Fail(ErrorCode::kDistillation, "distillation targets have " + std::to_string(targets.size()) +
                                       " values, expected " + std::to_string(rows * hidden));
  }
  std::vector<double> pre;
  Affine(features, rows, in, hidden, backbone.w1, backbone.b1, pre);

  EmbeddingMse out;
  out.grad_w1.assign(in * hidden, 0.0);
  out.grad_b1.assign(hidden, 0.0);
  const double count = static_cast<double>(rows * hidden);
  std::vector<double> dpre(hidden);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t h = 0; h < hidden; ++h) {
      const double p = pre[r * hidden + h];
      const double diff = std::max(p, 0.0) - targets[r * hidden + h];
      out.loss += diff * diff;
      dpre[h] = p > 0.0 ? 2.0 * diff / count : 0.0;
    }
    const double *x = features.data() + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t h = 0; h < hidden; ++h) {
        out.grad_w1[i * hidden + h] += x[i] * dpre[h];
      }
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      out.grad_b1[h] += dpre[h];
    }
  }
  out.loss /= count;
  return out;
}

std::string SerializeCheckpoint(const Checkpoint &checkpoint) {
  std::string out;
  out += "fedreid-checkpoint 1\n";
  out += "kind " + checkpoint.kind + "\n";
  out += "input_dim " + std::to_string(checkpoint.input_dim) + "\n";
  out += "hidden_dim " + std::to_string(checkpoint.hidden_dim) + "\n";
  out += "num_classes " + std::to_string(checkpoint.num_classes) + "\n";
  out += "cumulative_epoch " + std::to_string(checkpoint.cumulative_epoch) + "\n";
  out += "length " + std::to_string(checkpoint.params.size()) + "\n";
  char buf[40];
  for (double v : checkpoint.params.values()) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out += buf;
  }
  return out;
}

namespace {

template <typename T>
T ReadField(std::istringstream &in, const std::string &expected_key) {
  std::string key;
  T value{};
  if (!(in >> key >> value) || key != expected_key) {
    Fail(ErrorCode::kFormat, "checkpoint: expected field '" + expected_key + "'");
  }
  return value;
}

}  // namespace

Checkpoint ParseCheckpoint(const std::string &text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "fedreid-checkpoint" || version != 1) {
    Fail(ErrorCode::kFormat, "checkpoint: bad header");
  }
  Checkpoint c;
  c.kind = ReadField<std::string>(in, "kind");
  if (c.kind != "backbone" && c.kind != "classifier") {
    Fail(ErrorCode::kFormat, "checkpoint: unknown kind '" + c.kind + "'");
  }
  c.input_dim = ReadField<std::size_t>(in, "input_dim");
  c.hidden_dim = ReadField<std::size_t>(in, "hidden_dim");
  c.num_classes = ReadField<std::size_t>(in, "num_classes");
  c.cumulative_epoch = ReadField<int>(in, "cumulative_epoch");
  const auto length = ReadField<std::size_t>(in, "length");
  std::vector<double> values;
  values.reserve(length);
  std::string token;
  for (std::size_t i = 0; i < length; ++i) {
    if (!(in >> token)) {
      Fail(ErrorCode::kFormat, "checkpoint: truncated after " + std::to_string(i) + " values");
    }
    char *end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      Fail(ErrorCode::kFormat, "checkpoint: bad value '" + token + "'");
    }
    values.push_back(v);
  }
  if (!AllFinite(values)) {
    Fail(ErrorCode::kFormat, "checkpoint: non-finite value");
  }
  c.params = ParamVector(std::move(values));
  const std::size_t expected = c.kind == "backbone"
                                   ? c.input_dim * c.hidden_dim + c.hidden_dim
                                   : c.hidden_dim * c.num_classes + c.num_classes;
  if (c.params.size() != expected) {
    Fail(ErrorCode::kFormat, "checkpoint: length does not match dims");
  }
  return c;
}

void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    Fail(ErrorCode::kIo, "cannot write checkpoint " + path);
  }
  out << SerializeCheckpoint(checkpoint);
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorCode::kIo, "cannot read checkpoint " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseCheckpoint(buf.str());
}

Checkpoint MakeBackboneCheckpoint(const Backbone &backbone, int cumulative_epoch) {
  Checkpoint c;
  c.kind = "backbone";
  c.input_dim = backbone.input_dim;
  c.hidden_dim = backbone.hidden_dim;
  c.num_classes = 0;
  c.cumulative_epoch = cumulative_epoch;
  c.params = backbone.ToParams();
  return c;
}

Backbone BackboneFromCheckpoint(const Checkpoint &checkpoint) {
  if (checkpoint.kind != "backbone") {
    Fail(ErrorCode::kFormat, "checkpoint holds a " + checkpoint.kind + ", not a backbone");
  }
  return Backbone::FromParams(checkpoint.input_dim, checkpoint.hidden_dim, checkpoint.params);
}

}  // namespace fedreid
