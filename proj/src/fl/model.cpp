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


#include "hhefl/fl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hhefl/error.hpp"

namespace hhefl::fl {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Views of the four parameter blocks inside a flat buffer.
struct Layers {
  Eigen::Map<MatrixXd> w1;
  Eigen::Map<VectorXd> b1;
  Eigen::Map<MatrixXd> w2;
  Eigen::Map<VectorXd> b2;
};

Layers view(const ModelShape& s, double* p) {
  const auto in = static_cast<Index>(s.input), h = static_cast<Index>(s.hidden),
             c = static_cast<Index>(s.classes);
  double* p_b1 = p + h * in;
  double* p_w2 = p_b1 + h;
  double* p_b2 = p_w2 + c * h;
  return {Eigen::Map<MatrixXd>(p, h, in), Eigen::Map<VectorXd>(p_b1, h), Eigen::Map<MatrixXd>(p_w2, c, h),
          Eigen::Map<VectorXd>(p_b2, c)};
}

void check_data(const ModelShape& s, const Dataset& d) {
  if (d.empty()) throw InvalidArgument("dataset is empty");
  if (d.feature_count() != s.input) throw InvalidArgument("feature count does not match model input");
  if (d.labels.minCoeff() < 0 || static_cast<std::size_t>(d.labels.maxCoeff()) >= s.classes) {
    throw InvalidArgument("label outside model classes");
  }
}

// Column i of the result holds class probabilities for sample i.
MatrixXd softmax_cols(MatrixXd z) {
  for (Index i = 0; i < z.cols(); ++i) {
    z.col(i).array() -= z.col(i).maxCoeff();
    z.col(i) = z.col(i).array().exp();
    z.col(i) /= z.col(i).sum();
  }
  return z;
}

MatrixXd forward(Layers& L, const MatrixXd& x_cols, MatrixXd* hidden) {
  MatrixXd h = ((L.w1 * x_cols).colwise() + VectorXd(L.b1)).cwiseMax(0.0);
  MatrixXd z = (L.w2 * h).colwise() + VectorXd(L.b2);
  if (hidden) *hidden = std::move(h);
  return softmax_cols(std::move(z));
}

double cross_entropy(const MatrixXd& probs, const Eigen::VectorXi& labels) {
  double total = 0;
  for (Index i = 0; i < probs.cols(); ++i) total -= std::log(std::max(probs(labels(i), i), 1e-300));
  return total / static_cast<double>(probs.cols());
}

}  // namespace

void ModelWeights::validate() const {
  if (values.size() != shape.parameter_count()) throw InvalidArgument("weight vector length mismatch");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite weight");
  }
}

ModelWeights init_weights(const ModelShape& shape, std::uint64_t seed) {
  if (shape.input == 0 || shape.hidden == 0 || shape.classes < 2) throw InvalidArgument("degenerate model shape");
  ModelWeights w{shape, std::vector<double>(shape.parameter_count(), 0.0)};
  std::mt19937_64 rng(seed);
  Layers L = view(shape, w.values.data());
  auto fill = [&](Eigen::Map<MatrixXd>& m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
  };
  fill(L.w1);
  fill(L.w2);
  return w;
}

SampleCount batch_count(std::size_t samples, std::size_t batch_size) {
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  return (samples + batch_size - 1) / batch_size;
}

TrainResult train_local(const ModelWeights& w, const Dataset& data, const TrainConfig& cfg) {
  w.validate();
  check_data(w.shape, data);
  if (!(cfg.learning_rate > 0) || cfg.momentum < 0 || cfg.momentum >= 1) {
    throw InvalidArgument("bad optimizer settings");
  }
  TrainResult out{w, batch_count(data.size(), cfg.batch_size)};
  std::vector<double> velocity(w.size(), 0.0), grad(w.size(), 0.0);
  Layers L = view(w.shape, out.weights.values.data());
  Layers G = view(w.shape, grad.data());

  std::vector<Index> order(data.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const auto m = static_cast<Index>(stop - start);
      MatrixXd x(static_cast<Index>(w.shape.input), m);
      Eigen::VectorXi y(m);
      for (Index i = 0; i < m; ++i) {
        x.col(i) = data.features.row(order[start + static_cast<std::size_t>(i)]).transpose();
        y(i) = data.labels(order[start + static_cast<std::size_t>(i)]);
      }
      MatrixXd h;
      MatrixXd dz = forward(L, x, &h);
      for (Index i = 0; i < m; ++i) dz(y(i), i) -= 1.0;
      dz /= static_cast<double>(m);
      MatrixXd dh = (L.w2.transpose() * dz).array() * (h.array() > 0.0).cast<double>();
      G.w2 = dz * h.transpose();
      G.b2 = dz.rowwise().sum();
      G.w1 = dh * x.transpose();
      G.b1 = dh.rowwise().sum();
      for (std::size_t k = 0; k < grad.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * grad[k];
        out.weights.values[k] += velocity[k];
      }
    }
  }
  out.weights.validate();
  return out;
}

double mean_loss(const ModelWeights& w, const Dataset& data) { return evaluate(w, data).loss; }

EvalMetrics evaluate(const ModelWeights& w, const Dataset& test) {
  w.validate();
  check_data(w.shape, test);
  ModelWeights copy = w;
  Layers L = view(w.shape, copy.values.data());
  const MatrixXd probs = forward(L, test.features.transpose(), nullptr);
  std::size_t correct = 0;
  for (Index i = 0; i < probs.cols(); ++i) {
    Index best = 0;
    probs.col(i).maxCoeff(&best);
    if (best == test.labels(i)) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(test.size()), cross_entropy(probs, test.labels),
          test.size()};
}

EvalMetrics aggregate_metrics(std::span<const EvalMetrics> metrics) {
  if (metrics.empty()) throw InvalidArgument("no metrics to aggregate");
  double acc = 0, loss = 0;
  std::size_t total = 0;
  for (const auto& m : metrics) {
    if (m.test_sample_count == 0) throw InvalidArgument("metrics with zero test samples");
    acc += m.accuracy * static_cast<double>(m.test_sample_count);
    loss += m.loss * static_cast<double>(m.test_sample_count);
    total += m.test_sample_count;
  }
  return {acc / static_cast<double>(total), loss / static_cast<double>(total), total};
}

}  // namespace hhefl::fl
