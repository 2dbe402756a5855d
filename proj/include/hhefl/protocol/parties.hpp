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


// TPA, server and client state machines. Parties react to delivered
// messages and reject anything that arrives out of phase, from an
// unexpected sender, or for the wrong round.

#ifndef HHEFL_PROTOCOL_PARTIES_HPP_
#define HHEFL_PROTOCOL_PARTIES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hhefl/cipher/hesd.hpp"
#include "hhefl/fl/aggregate.hpp"
#include "hhefl/fl/dataset.hpp"
#include "hhefl/keyprot/key_protection.hpp"
#include "hhefl/protocol/transport.hpp"

namespace hhefl::protocol {

// Parameters every party agrees on before setup.
struct SharedParams {
  keyprot::Mode mode = keyprot::Mode::kMasking;
  he::ContextPtr ctx;
  cipher::CipherParams cipher;
  fl::QuantParams quant;
  fl::ModelShape shape;
  fl::TrainConfig train;  // seed field is ignored; clients derive their own
  int rsa_bits = 3072;
};

class Tpa {
 public:
  enum class Phase { kIdle, kIssued, kRetired };

  Tpa(SharedParams params, const Seed& seed);

  // Generates HE keys, symmetric keys and masks and hands them out over the
  // setup channel. In RSA mode also creates the TPA signing key.
  void issue_keys(Transport& net, const std::vector<PartyId>& clients);
  void deliver(const Message& m, Transport& net);
  // After setup the TPA accepts nothing.
  void retire();

  Phase phase() const { return phase_; }

 private:
  SharedParams p_;
  Seed seed_;
  Phase phase_ = Phase::kIdle;
  std::optional<keyprot::RsaPrivateKey> signing_key_;
  bool certified_ = false;
};

struct Exclusion {
  PartyId client = 0;
  std::string reason;
};

struct ServerClientTiming {
  PartyId client = 0;
  double key_recover = 0;
  double hesd = 0;
};

struct AggregationOutcome {
  std::vector<PartyId> contributors;
  std::vector<Exclusion> excluded;
  std::vector<ServerClientTiming> per_client;
  double fedavg_seconds = 0;
  double total_seconds = 0;  // whole aggregation phase
  fl::SampleCount total_n = 0;
};

// What the server holds; there is deliberately no way to store an HE secret
// key, a symmetric key or plaintext client weights.
struct ServerStateView {
  bool has_he_pk = false;
  bool has_he_eval = false;
  std::size_t mask_entries = 0;
  bool has_rsa_keypair = false;
  std::uint32_t round = 0;
};

class Server {
 public:
  enum class Phase { kAwaitKeys, kAwaitCertificate, kReady, kTraining, kEvaluating };

  Server(SharedParams params, std::vector<PartyId> clients);

  void deliver(const Message& m, Transport& net);

  void broadcast_init(Transport& net, const fl::ModelWeights& w);

  void start_round(std::uint32_t round, std::vector<PartyId> training, std::vector<PartyId> evaluation,
                   Transport& net);
  // Recovers each client's HE-encrypted key, transciphers its update and
  // sums; broadcasts the result to every client and asks the evaluation
  // cohort for metrics.
  AggregationOutcome aggregate(Transport& net);
  fl::EvalMetrics finish_round();

  Phase phase() const { return phase_; }
  ServerStateView inspect() const;
  const std::optional<keyprot::ServerCertificate>& certificate() const { return cert_; }

 private:
  // RSA mode: generate the RSA keypair and ask the TPA for a certificate.
  void request_certificate(Transport& net);
  he::RingCiphertext recover_key(PartyId sender, const keyprot::ProtectedKey& k) const;

  SharedParams p_;
  std::vector<PartyId> clients_;
  Phase phase_ = Phase::kAwaitKeys;
  std::optional<he::PublicKey> he_pk_;  // delivered but never used
  std::optional<he::EvaluationKey> he_eval_;
  std::map<PartyId, keyprot::Mask> masks_;
  std::optional<keyprot::RsaPrivateKey> rsa_key_;
  std::optional<keyprot::ServerCertificate> cert_;
  std::uint32_t round_ = 0;
  std::vector<PartyId> training_, evaluation_;
  std::map<PartyId, ClientUpdateMsg> updates_;
  std::map<PartyId, fl::EvalMetrics> reports_;
};

struct ClientTiming {
  double train = 0;
  double sym_encrypt = 0;  // quantize + keystream
  double key_protect = 0;
  double decrypt = 0;      // global model decryption + dequantization
};

// Ground truth kept by a client about its own submissions; read by tests.
struct SentUpdate {
  std::uint32_t round = 0;
  std::vector<u64> quantized;
  fl::SampleCount n = 0;
};

class Client {
 public:
  enum class Phase { kAwaitKeys, kAwaitCertificate, kAwaitModel, kActive };

  Client(PartyId id, SharedParams params, fl::Dataset train, fl::Dataset test, const Seed& seed);

  void deliver(const Message& m, Transport& net);

  PartyId id() const { return id_; }
  Phase phase() const { return phase_; }
  const fl::ModelWeights& weights() const { return weights_; }
  const ClientTiming& last_timing() const { return timing_; }
  const std::vector<SentUpdate>& sent() const { return sent_; }
  std::uint32_t global_round() const { return global_round_; }

  // Key material this client legitimately holds.
  const he::PublicKey& he_pk() const { return *he_pk_; }
  const he::SecretKey& he_sk() const { return *he_sk_; }
  const cipher::SymKey& sym_key() const { return *sym_key_; }
  const std::optional<keyprot::Mask>& mask() const { return mask_; }
  bool certificate_verified() const { return cert_.has_value(); }

 private:
  void train_and_send(std::uint32_t round, Transport& net);

  PartyId id_;
  SharedParams p_;
  fl::Dataset train_, test_;
  Seed seed_;
  Phase phase_ = Phase::kAwaitKeys;
  std::optional<he::PublicKey> he_pk_;
  std::optional<he::SecretKey> he_sk_;
  std::optional<cipher::SymKey> sym_key_;
  std::optional<keyprot::Mask> mask_;
  std::optional<keyprot::RsaPublicKey> tpa_key_;
  std::optional<keyprot::ServerCertificate> cert_;
  fl::ModelWeights weights_;
  std::uint32_t trained_round_ = 0;
  std::uint32_t global_round_ = 0;
  ClientTiming timing_;
  std::vector<SentUpdate> sent_;
};

// Deterministic per-purpose seeds shared by every mode.
std::uint64_t seed_u64(const Seed& s);
Seed client_seed(const Seed& master, PartyId client);
std::uint64_t train_seed(const Seed& client_seed, std::uint32_t round);

}  // namespace hhefl::protocol

#endif  // HHEFL_PROTOCOL_PARTIES_HPP_
