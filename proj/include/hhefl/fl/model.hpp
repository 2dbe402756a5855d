/*
 * Copyright 2026 The HHE-FL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// One-hidden-layer perceptron (ReLU, softmax cross-entropy) with a flat
// parameter vector so that weights can be quantized and packed into slots.

#ifndef HHEFL_FL_MODEL_HPP_
#define HHEFL_FL_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hhefl/fl/dataset.hpp"

namespace hhefl::fl {

struct ModelShape {
  std::size_t input = 64;
  std::size_t hidden = 106;
  std::size_t classes = 10;

  // W1 (hidden x input), b1, W2 (classes x hidden), b2.
  std::size_t parameter_count() const { return hidden * input + hidden + classes * hidden + classes; }
  bool operator==(const ModelShape&) const = default;
};

struct ModelWeights {
  ModelShape shape;
  std::vector<double> values;  // flattened, column-major per matrix

  std::size_t size() const { return values.size(); }
  // Throws InvalidArgument on wrong length or non-finite values.
  void validate() const;
  bool operator==(const ModelWeights&) const = default;
};

// Training batches contributed by one client in one round.
using SampleCount = std::uint64_t;

struct EvalMetrics {
  double accuracy = 0;
  double loss = 0;
  std::size_t test_sample_count = 0;
};

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  std::uint64_t seed = 0;  // shuffling order
};

struct TrainResult {
  ModelWeights weights;
  SampleCount n = 0;
};

// Glorot-uniform weights, zero biases.
ModelWeights init_weights(const ModelShape& shape, std::uint64_t seed);

// ceil(samples / batch_size)
SampleCount batch_count(std::size_t samples, std::size_t batch_size);

TrainResult train_local(const ModelWeights& w, const Dataset& data, const TrainConfig& cfg);

EvalMetrics evaluate(const ModelWeights& w, const Dataset& test);

// Weighted by test_sample_count.
EvalMetrics aggregate_metrics(std::span<const EvalMetrics> metrics);

// Mean cross-entropy of `w` on `data`.
double mean_loss(const ModelWeights& w, const Dataset& data);

}  // namespace hhefl::fl

#endif  // HHEFL_FL_MODEL_HPP_
