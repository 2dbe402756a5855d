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


#ifndef HHEFL_FL_DATASET_HPP_
#define HHEFL_FL_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace hhefl::fl {

// Row-major samples: features.row(i) is sample i.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;
  int num_classes = 0;

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
  std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }
  bool empty() const { return labels.size() == 0; }
};

// CSV with one header row, numeric feature columns and the integer label in
// the last column. Throws ParseError on malformed rows, InvalidArgument when
// the file cannot be opened.
Dataset load_csv(const std::string& path);

// Two Gaussian blobs centred at -0.25 / +0.25 in every feature (labels 0 / 1),
// unit variance, so the classes overlap and there is something to learn.
Dataset make_synthetic(std::size_t samples, std::size_t features, std::uint64_t seed);

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows);

// Client c receives rows c, c + clients, c + 2 clients, ...
std::vector<Dataset> partition_iid(const Dataset& d, std::size_t clients);

// First round(frac * size) rows for training, the rest held out.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double train_fraction);

}  // namespace hhefl::fl

#endif  // HHEFL_FL_DATASET_HPP_
