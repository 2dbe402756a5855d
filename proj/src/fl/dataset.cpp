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


#include "hhefl/fl/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "hhefl/error.hpp"

namespace hhefl::fl {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t row) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad numeric field on data row " + std::to_string(row));
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset is empty: " + path);
  const std::size_t cols = split_fields(line).size();
  if (cols < 2) throw ParseError("dataset needs at least one feature and a label");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != cols) throw ParseError("wrong field count on data row " + std::to_string(row));
    for (std::size_t c = 0; c + 1 < cols; ++c) values.push_back(parse_double(fields[c], row));
    const double label = parse_double(fields.back(), row);
    if (label < 0 || label != std::floor(label)) throw ParseError("label must be a non-negative integer");
    labels.push_back(static_cast<int>(label));
  }
  if (labels.empty()) throw ParseError("dataset has no rows: " + path);

  Dataset d;
  d.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(cols - 1));
  d.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  d.num_classes = d.labels.maxCoeff() + 1;
  return d;
}

Dataset make_synthetic(std::size_t samples, std::size_t features, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(features));
  d.labels.resize(static_cast<Eigen::Index>(samples));
  d.num_classes = 2;
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    const int label = static_cast<int>(rng() & 1);
    d.labels(i) = label;
    const double centre = label == 0 ? -0.25 : 0.25;
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.features(i, j) = centre + noise(rng);
  }
  return d;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.num_classes = d.num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), d.features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = d.features.row(r);
    out.labels(static_cast<Eigen::Index>(i)) = d.labels(r);
  }
  return out;
}

std::vector<Dataset> partition_iid(const Dataset& d, std::size_t clients) {
  if (clients == 0) throw InvalidArgument("need at least one client");
  if (d.size() < clients) throw InvalidArgument("fewer samples than clients");
  std::vector<std::vector<std::size_t>> rows(clients);
  for (std::size_t i = 0; i < d.size(); ++i) rows[i % clients].push_back(i);
  std::vector<Dataset> out;
  out.reserve(clients);
  for (const auto& r : rows) out.push_back(subset(d, r));
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw InvalidArgument("train fraction must be in (0, 1]");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.size())));
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < d.size(); ++i) (i < n_train ? tr : te).push_back(i);
  return {subset(d, tr), subset(d, te)};
}

}  // namespace hhefl::fl
