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


#ifndef HHEFL_PROTOCOL_CONFIG_HPP_
#define HHEFL_PROTOCOL_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "hhefl/fl/model.hpp"
#include "hhefl/keyprot/key_protection.hpp"

namespace hhefl::protocol {

// Experiment settings. TOML keys use the same names; nested tables are
// [he], [cipher], [quant], [train] and [data].
struct ExperimentConfig {
  std::size_t clients = 12;
  std::size_t rounds = 10;
  std::size_t clients_per_round = 4;  // training cohort
  std::size_t eval_clients = 12;      // evaluation cohort
  keyprot::Mode mode = keyprot::Mode::kMasking;
  int rsa_bits = 3072;
  std::uint64_t seed = 1;

  // [train]
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::size_t hidden = 106;

  // [quant]; zero means derived from the data and the cohort size
  double clip_range = 5.0;
  std::uint64_t n_max = 0;
  std::uint64_t scale = 0;

  // [he]
  std::size_t poly_degree = 4096;

  // [cipher]
  int cipher_rounds = 3;

  // [data]: "synthetic" or a CSV path, relative paths resolved against the
  // config file's directory.
  std::string dataset = "synthetic";
  double train_fraction = 0.8;
  std::size_t synthetic_samples = 1200;
  std::size_t synthetic_features = 16;

  // Throws InvalidParams on inconsistent values.
  void validate() const;
};

// Throws InvalidParams on type errors or unknown keys, ParseError on bad
// TOML syntax.
ExperimentConfig parse_config(const std::string& toml_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace hhefl::protocol

#endif  // HHEFL_PROTOCOL_CONFIG_HPP_
