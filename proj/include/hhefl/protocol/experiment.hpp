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


#ifndef HHEFL_PROTOCOL_EXPERIMENT_HPP_
#define HHEFL_PROTOCOL_EXPERIMENT_HPP_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hhefl/protocol/config.hpp"
#include "hhefl/protocol/parties.hpp"

namespace hhefl::protocol {

// Per-client figures are means over the clients involved in the round.
struct RoundTimings {
  double train = 0;
  double sym_encrypt = 0;
  double key_protect = 0;
  double key_recover = 0;
  double hesd = 0;
  double fedavg = 0;
  double decrypt = 0;
  double aggregation_phase = 0;  // whole server aggregation phase
  double hesd_total = 0;         // sum over contributing clients
};

struct RoundReport {
  std::uint32_t round = 0;
  keyprot::Mode mode = keyprot::Mode::kMasking;
  fl::EvalMetrics metrics;
  std::vector<PartyId> training;
  std::vector<PartyId> evaluation;
  std::vector<Exclusion> excluded;
  fl::SampleCount total_n = 0;
  RoundTimings timings;
  std::map<std::string, std::size_t> bytes_by_type;  // from the transcript
  std::string model_digest;
};

struct ExperimentResult {
  ExperimentConfig config;
  fl::QuantParams quant;
  fl::ModelShape shape;
  std::vector<RoundReport> reports;
  std::vector<fl::ModelWeights> global_models;  // after each round
  std::shared_ptr<TranscriptLog> transcript;    // null for plaintext runs
};

struct Partitions {
  std::vector<fl::Dataset> train;
  std::vector<fl::Dataset> test;
};

Partitions prepare_data(const ExperimentConfig& cfg);

// Fills in n_max (cohort size times the largest per-client batch count) and
// S when the config leaves them at zero, then validates. Throws
// InvalidParams when the overflow bound is violated.
fl::QuantParams resolve_quant(const ExperimentConfig& cfg, const Partitions& data);

// k distinct clients out of `clients`, uniform without replacement, sorted.
std::vector<PartyId> sample_cohort(const Seed& master, std::string_view purpose, std::uint32_t round,
                                   std::size_t clients, std::size_t k);

// Hex SHA-256 prefix of the little-endian weight bytes.
std::string model_digest(const fl::ModelWeights& w);

enum class TransportKind { kInMemory, kLoopback };

class Simulation {
 public:
  explicit Simulation(ExperimentConfig cfg, TransportKind kind = TransportKind::kInMemory, bool timestamps = true);

  // Key distribution, certificate exchange (RSA mode), initial model.
  void setup();
  RoundReport run_round();
  // Setup if needed, then every remaining round.
  ExperimentResult run();

  // Delivers queued messages until every inbox is empty.
  void pump();

  const ExperimentConfig& config() const { return cfg_; }
  const SharedParams& params() const { return params_; }
  const Seed& master_seed() const { return master_; }
  Tpa& tpa() { return *tpa_; }
  Server& server() { return *server_; }
  const Client& client(PartyId id) const { return *clients_.at(id); }
  Transport& transport() { return *transport_; }
  std::shared_ptr<TranscriptLog> transcript() const { return log_; }
  const std::vector<fl::ModelWeights>& global_models() const { return globals_; }
  std::uint32_t rounds_done() const { return round_; }

 private:
  ExperimentConfig cfg_;
  Seed master_;
  SharedParams params_;
  std::shared_ptr<TranscriptLog> log_;
  std::unique_ptr<Transport> transport_;
  std::unique_ptr<Tpa> tpa_;
  std::unique_ptr<Server> server_;
  std::vector<std::unique_ptr<Client>> clients_;
  bool setup_done_ = false;
  std::uint32_t round_ = 0;
  std::vector<RoundReport> reports_;
  std::vector<fl::ModelWeights> globals_;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, TransportKind kind = TransportKind::kInMemory,
                                bool timestamps = true);

// Plaintext FedAvg with the same data, cohorts, training seeds and
// quantization round trip; the reference for the encrypted pipeline.
ExperimentResult run_plaintext_experiment(const ExperimentConfig& cfg);

}  // namespace hhefl::protocol

#endif  // HHEFL_PROTOCOL_EXPERIMENT_HPP_
