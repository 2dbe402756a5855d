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


#include "hhefl/protocol/parties.hpp"

#include <algorithm>
#include <chrono>

#include "hhefl/error.hpp"

namespace hhefl::protocol {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string who(PartyId id) {
  if (id == kTpaId) return "tpa";
  if (id == kServerId) return "server";
  return "client " + std::to_string(id);
}

[[noreturn]] void reject(std::string_view party, const Message& m, std::string_view why) {
  throw ProtocolError(std::string(party) + ": rejected " + std::string(tag_name(tag_of(m.payload))) + " from " +
                      who(m.header.sender) + " (round " + std::to_string(m.header.round) + "): " +
                      std::string(why));
}

bool contains(const std::vector<PartyId>& v, PartyId id) { return std::find(v.begin(), v.end(), id) != v.end(); }

}  // namespace

std::uint64_t seed_u64(const Seed& s) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
  return v;
}

Seed client_seed(const Seed& master, PartyId client) { return derive_seed(master, "client", client); }

std::uint64_t train_seed(const Seed& cs, std::uint32_t round) { return seed_u64(derive_seed(cs, "train", round)); }

// ---- TPA ----

Tpa::Tpa(SharedParams params, const Seed& seed) : p_(std::move(params)), seed_(seed) {}

void Tpa::issue_keys(Transport& net, const std::vector<PartyId>& clients) {
  if (phase_ != Phase::kIdle) throw ProtocolError("tpa: keys already issued");
  const he::RingKeys keys = he::keygen(p_.ctx, derive_seed(seed_, "he-keys"));
  const bool masking = p_.mode == keyprot::Mode::kMasking;
  const bool rsa = p_.mode == keyprot::Mode::kRsaWrapping;
  if (rsa) signing_key_ = keyprot::RsaPrivateKey::generate(p_.rsa_bits);

  std::vector<keyprot::Mask> masks;
  if (masking) {
    for (PartyId c : clients) {
      he::Prng prng = he::make_prng(derive_seed(seed_, "mask", c));
      masks.push_back(keyprot::random_mask(p_.cipher, c, prng));
    }
  }

  KeyIssue to_server;
  to_server.he_pk = keys.public_key;
  to_server.he_eval = keys.eval_key;
  to_server.masks = masks;
  net.send({{kTpaId, kServerId, 0}, std::move(to_server)}, Channel::kSetup);

  for (std::size_t i = 0; i < clients.size(); ++i) {
    he::Prng prng = he::make_prng(derive_seed(seed_, "sym-key", clients[i]));
    KeyIssue k;
    k.he_pk = keys.public_key;
    k.he_sk = keys.secret_key;
    k.sym_key = cipher::random_sym_key(p_.cipher, prng);
    if (masking) k.masks = {masks[i]};
    if (rsa) k.tpa_key = signing_key_->public_key();
    net.send({{kTpaId, clients[i], 0}, std::move(k)}, Channel::kSetup);
  }
  phase_ = Phase::kIssued;
}

void Tpa::deliver(const Message& m, Transport& net) {
  const auto* req = std::get_if<CertificateRequest>(&m.payload);
  if (phase_ != Phase::kIssued) reject("tpa", m, "not accepting messages in this phase");
  if (!req || m.header.sender != kServerId) reject("tpa", m, "only the server's certificate request is accepted");
  if (p_.mode != keyprot::Mode::kRsaWrapping || certified_) reject("tpa", m, "no certificate to issue");
  net.send({{kTpaId, kServerId, 0}, CertificateMsg{keyprot::issue_certificate(*signing_key_, req->server_key)}});
  certified_ = true;
}

void Tpa::retire() {
  if (phase_ != Phase::kIssued) throw ProtocolError("tpa: cannot retire before issuing keys");
  if (p_.mode == keyprot::Mode::kRsaWrapping && !certified_) throw ProtocolError("tpa: server was never certified");
  signing_key_.reset();
  phase_ = Phase::kRetired;
}

// ---- Server ----

Server::Server(SharedParams params, std::vector<PartyId> clients) : p_(std::move(params)), clients_(std::move(clients)) {}

void Server::deliver(const Message& m, Transport& net) {
  if (m.header.recipient != kServerId) reject("server", m, "misaddressed");
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, KeyIssue>) {
          if (phase_ != Phase::kAwaitKeys || m.header.sender != kTpaId) reject("server", m, "unexpected key issue");
          if (msg.he_sk || msg.sym_key) reject("server", m, "server must not receive secret keys");
          if (!msg.he_pk || !msg.he_eval) reject("server", m, "public and evaluation keys required");
          const bool masking = p_.mode == keyprot::Mode::kMasking;
          if (masking != !msg.masks.empty()) reject("server", m, "mask table does not match the mode");
          for (const auto& mask : msg.masks) {
            if (!contains(clients_, mask.owner) || !masks_.emplace(mask.owner, mask).second) {
              reject("server", m, "bad mask table");
            }
          }
          if (masking && masks_.size() != clients_.size()) reject("server", m, "mask table incomplete");
          he_pk_ = *msg.he_pk;
          he_eval_ = *msg.he_eval;
          if (p_.mode == keyprot::Mode::kRsaWrapping) {
            phase_ = Phase::kAwaitCertificate;
            request_certificate(net);
          } else {
            phase_ = Phase::kReady;
          }
        } else if constexpr (std::is_same_v<T, CertificateMsg>) {
          if (phase_ != Phase::kAwaitCertificate || m.header.sender != kTpaId) {
            reject("server", m, "unexpected certificate");
          }
          if (msg.cert.modulus != rsa_key_->public_key().modulus()) reject("server", m, "certificate for another key");
          cert_ = msg.cert;
          for (PartyId c : clients_) net.send({{kServerId, c, 0}, CertificateMsg{*cert_}});
          phase_ = Phase::kReady;
        } else if constexpr (std::is_same_v<T, ClientUpdateMsg>) {
          if (phase_ != Phase::kTraining) reject("server", m, "not collecting updates");
          if (m.header.round != round_) reject("server", m, "wrong round");
          if (!contains(training_, m.header.sender)) reject("server", m, "sender not in the training cohort");
          if (!updates_.emplace(m.header.sender, msg).second) reject("server", m, "duplicate update");
        } else if constexpr (std::is_same_v<T, EvalReport>) {
          if (phase_ != Phase::kEvaluating) reject("server", m, "not collecting evaluations");
          if (m.header.round != round_) reject("server", m, "wrong round");
          if (!contains(evaluation_, m.header.sender)) reject("server", m, "sender not in the evaluation cohort");
          if (!reports_.emplace(m.header.sender, msg.metrics).second) reject("server", m, "duplicate report");
        } else {
          reject("server", m, "message type not accepted by the server");
        }
      },
      m.payload);
}

void Server::request_certificate(Transport& net) {
  rsa_key_ = keyprot::RsaPrivateKey::generate(p_.rsa_bits);
  net.send({{kServerId, kTpaId, 0}, CertificateRequest{rsa_key_->public_key()}});
}

void Server::broadcast_init(Transport& net, const fl::ModelWeights& w) {
  if (phase_ != Phase::kReady || round_ != 0) throw ProtocolError("server: cannot broadcast the initial model now");
  if (!(w.shape == p_.shape)) throw InvalidArgument("initial model has the wrong shape");
  for (PartyId c : clients_) net.send({{kServerId, c, 0}, InitModel{w}});
}

void Server::start_round(std::uint32_t round, std::vector<PartyId> training, std::vector<PartyId> evaluation,
                         Transport& net) {
  if (phase_ != Phase::kReady) throw ProtocolError("server: previous phase not finished");
  if (round != round_ + 1) throw ProtocolError("server: rounds must advance by one");
  for (PartyId c : training) {
    if (!contains(clients_, c)) throw InvalidArgument("unknown client in training cohort");
  }
  for (PartyId c : evaluation) {
    if (!contains(clients_, c)) throw InvalidArgument("unknown client in evaluation cohort");
  }
  round_ = round;
  training_ = std::move(training);
  evaluation_ = std::move(evaluation);
  updates_.clear();
  reports_.clear();
  phase_ = Phase::kTraining;
  for (PartyId c : training_) net.send({{kServerId, c, round_}, TrainRequest{}});
}

he::RingCiphertext Server::recover_key(PartyId sender, const keyprot::ProtectedKey& k) const {
  if (keyprot::mode_of(k) != p_.mode) throw ProtocolError("key protection mode does not match the session");
  if (const auto* b = std::get_if<keyprot::BaselineKey>(&k)) return b->ct;
  if (const auto* mk = std::get_if<keyprot::MaskedKey>(&k)) {
    const auto it = masks_.find(sender);
    if (it == masks_.end()) throw ProtocolError("no mask on record for " + who(sender));
    return keyprot::unmask(p_.cipher, *mk, it->second);
  }
  const Bytes raw = keyprot::rsa_unwrap(std::get<keyprot::RsaWrappedKey>(k), *rsa_key_);
  return he::deserialize(p_.ctx, raw);
}

AggregationOutcome Server::aggregate(Transport& net) {
  if (phase_ != Phase::kTraining) throw ProtocolError("server: no round in progress");
  const auto t_phase = Clock::now();
  AggregationOutcome out;
  std::vector<fl::EncryptedUpdate> enc;
  for (PartyId c : training_) {
    const auto it = updates_.find(c);
    if (it == updates_.end()) {
      out.excluded.push_back({c, "no update received"});
      continue;
    }
    ServerClientTiming timing{c};
    try {
      auto t0 = Clock::now();
      const he::RingCiphertext key_ct = recover_key(c, it->second.protected_key);
      timing.key_recover = seconds_since(t0);
      t0 = Clock::now();
      const cipher::HesdEvaluator hesd(p_.cipher, key_ct, *he_eval_);
      fl::EncryptedUpdate u{hesd.run(it->second.w_ske), it->second.n};
      timing.hesd = seconds_since(t0);
      if (!enc.empty() && u.cts.size() != enc.front().cts.size()) throw InvalidArgument("update length mismatch");
      if (u.n == 0) throw InvalidArgument("zero sample count");
      enc.push_back(std::move(u));
    } catch (const Error& e) {
      out.excluded.push_back({c, std::string("key recovery or transciphering failed: ") + e.what()});
      continue;
    }
    out.per_client.push_back(timing);
    out.contributors.push_back(c);
  }

  GlobalModelMsg global;
  if (!enc.empty()) {
    const auto t0 = Clock::now();
    fl::EncryptedAggregate agg = fl::fedavg_encrypted(enc, p_.quant);
    out.fedavg_seconds = seconds_since(t0);
    global.cts = std::move(agg.cts);
    global.n = agg.total_n;
  }
  out.total_n = global.n;
  out.total_seconds = seconds_since(t_phase);

  for (PartyId c : clients_) net.send({{kServerId, c, round_}, global});
  for (PartyId c : evaluation_) net.send({{kServerId, c, round_}, EvalRequest{}});
  updates_.clear();
  phase_ = Phase::kEvaluating;
  return out;
}

fl::EvalMetrics Server::finish_round() {
  if (phase_ != Phase::kEvaluating) throw ProtocolError("server: not in the evaluation phase");
  std::vector<fl::EvalMetrics> ms;
  for (PartyId c : evaluation_) {
    const auto it = reports_.find(c);
    if (it == reports_.end()) throw ProtocolError("server: missing evaluation report from " + who(c));
    ms.push_back(it->second);
  }
  reports_.clear();
  phase_ = Phase::kReady;
  return fl::aggregate_metrics(ms);
}

ServerStateView Server::inspect() const {
  return {he_pk_.has_value(), he_eval_.has_value(), masks_.size(), rsa_key_.has_value(), round_};
}

// ---- Client ----

Client::Client(PartyId id, SharedParams params, fl::Dataset train, fl::Dataset test, const Seed& seed)
    : id_(id), p_(std::move(params)), train_(std::move(train)), test_(std::move(test)), seed_(seed) {}

void Client::deliver(const Message& m, Transport& net) {
  const std::string self = who(id_);
  if (m.header.recipient != id_) reject(self, m, "misaddressed");
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, KeyIssue>) {
          if (phase_ != Phase::kAwaitKeys || m.header.sender != kTpaId) reject(self, m, "unexpected key issue");
          if (!msg.he_pk || !msg.he_sk || !msg.sym_key) reject(self, m, "incomplete key material");
          cipher::validate_key(p_.cipher, *msg.sym_key);
          const bool masking = p_.mode == keyprot::Mode::kMasking;
          const bool rsa = p_.mode == keyprot::Mode::kRsaWrapping;
          if (masking && (msg.masks.size() != 1 || msg.masks[0].owner != id_)) reject(self, m, "mask missing");
          if (!masking && !msg.masks.empty()) reject(self, m, "unexpected mask");
          if (rsa != msg.tpa_key.has_value()) reject(self, m, "TPA key does not match the mode");
          he_pk_ = *msg.he_pk;
          he_sk_ = *msg.he_sk;
          sym_key_ = *msg.sym_key;
          if (masking) mask_ = msg.masks[0];
          if (rsa) tpa_key_ = *msg.tpa_key;
          phase_ = rsa ? Phase::kAwaitCertificate : Phase::kAwaitModel;
        } else if constexpr (std::is_same_v<T, CertificateMsg>) {
          if (phase_ != Phase::kAwaitCertificate || m.header.sender != kServerId) {
            reject(self, m, "unexpected certificate");
          }
          if (!keyprot::verify_certificate(*tpa_key_, msg.cert)) reject(self, m, "certificate does not verify");
          cert_ = msg.cert;
          phase_ = Phase::kAwaitModel;
        } else if constexpr (std::is_same_v<T, InitModel>) {
          if (phase_ != Phase::kAwaitModel || m.header.sender != kServerId) reject(self, m, "unexpected model");
          if (!(msg.weights.shape == p_.shape)) reject(self, m, "model shape mismatch");
          weights_ = msg.weights;
          phase_ = Phase::kActive;
        } else if constexpr (std::is_same_v<T, TrainRequest>) {
          if (phase_ != Phase::kActive || m.header.sender != kServerId) reject(self, m, "not ready to train");
          if (m.header.round != global_round_ + 1 || m.header.round <= trained_round_) {
            reject(self, m, "training request out of order");
          }
          train_and_send(m.header.round, net);
        } else if constexpr (std::is_same_v<T, GlobalModelMsg>) {
          if (phase_ != Phase::kActive || m.header.sender != kServerId) reject(self, m, "unexpected global model");
          if (m.header.round != global_round_ + 1) reject(self, m, "global model out of order");
          const auto t0 = Clock::now();
          if (msg.n > 0) {
            weights_ = fl::decrypt_aggregate(*he_sk_, {msg.cts, msg.n}, p_.quant, p_.shape);
          }
          timing_.decrypt = seconds_since(t0);
          global_round_ = m.header.round;
        } else if constexpr (std::is_same_v<T, EvalRequest>) {
          if (phase_ != Phase::kActive || m.header.sender != kServerId) reject(self, m, "unexpected eval request");
          if (m.header.round != global_round_) reject(self, m, "evaluation before the round's model arrived");
          net.send({{id_, kServerId, m.header.round}, EvalReport{fl::evaluate(weights_, test_)}});
        } else {
          reject(self, m, "message type not accepted by clients");
        }
      },
      m.payload);
}

void Client::train_and_send(std::uint32_t round, Transport& net) {
  auto t0 = Clock::now();
  fl::TrainConfig cfg = p_.train;
  cfg.seed = train_seed(seed_, round);
  const fl::TrainResult res = fl::train_local(weights_, train_, cfg);
  timing_.train = seconds_since(t0);

  t0 = Clock::now();
  std::vector<u64> q = fl::quantize(res.weights, p_.quant);
  he::Prng nonce_prng = he::make_prng(derive_seed(seed_, "nonce", round));
  const cipher::SymCiphertext w_ske =
      cipher::sym_encrypt(p_.cipher, *sym_key_, cipher::random_nonce(nonce_prng), q);
  timing_.sym_encrypt = seconds_since(t0);

  t0 = Clock::now();
  keyprot::ProtectedKey pk;
  switch (p_.mode) {
    case keyprot::Mode::kBaseline:
      pk = keyprot::protect_baseline(p_.cipher, *sym_key_, *he_pk_);
      break;
    case keyprot::Mode::kMasking:
      pk = keyprot::protect_masked(p_.cipher, *sym_key_, *mask_, *he_pk_);
      break;
    case keyprot::Mode::kRsaWrapping: {
      const auto base = keyprot::protect_baseline(p_.cipher, *sym_key_, *he_pk_);
      pk = keyprot::rsa_wrap(he::serialize(std::get<keyprot::BaselineKey>(base).ct), *cert_, *tpa_key_);
      break;
    }
  }
  timing_.key_protect = seconds_since(t0);

  net.send({{id_, kServerId, round}, ClientUpdateMsg{w_ske, std::move(pk), res.n}});
  sent_.push_back({round, std::move(q), res.n});
  trained_round_ = round;
}

}  // namespace hhefl::protocol
