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


// A curious client ("Eve") holding the shared HE secret key and a passive
// tap on the network tries to read another client's model update.

#ifndef HHEFL_ADVERSARY_ADVERSARY_HPP_
#define HHEFL_ADVERSARY_ADVERSARY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhefl/protocol/experiment.hpp"

namespace hhefl::adversary {

using protocol::PartyId;
using he::u64;

// Exactly what Eve may know: her own client material and the network tap.
// No victim mask, no server RSA key, no setup-channel traffic.
struct AdversaryKnowledge {
  PartyId eve = 0;
  he::PublicKey he_pk;
  he::SecretKey he_sk;
  cipher::SymKey own_key;
  std::optional<keyprot::Mask> own_mask;
  std::vector<protocol::TranscriptEntry> tap;
  protocol::WireContext wire;
  cipher::CipherParams cipher;
};

AdversaryKnowledge eve_knowledge(const protocol::Client& eve, const protocol::TranscriptLog& log,
                                 const protocol::WireContext& wire, const cipher::CipherParams& cipher);

// The victim's update exactly as transmitted. Throws InvalidArgument if the
// tap holds no such message.
protocol::ClientUpdateMsg intercept(const AdversaryKnowledge& k, PartyId victim, std::uint32_t round);

struct AttackOutcome {
  keyprot::Mode mode = keyprot::Mode::kBaseline;
  std::optional<cipher::SymKey> recovered_key;    // nullopt: no decryption path
  std::optional<std::vector<u64>> recovered_weights;  // quantized residues
  bool success = false;  // set by judge()
  std::string note;
};

// Never throws on cryptographic failure; failure is an outcome.
AttackOutcome attack(const protocol::ClientUpdateMsg& update, const AdversaryKnowledge& k);

// Marks success iff the recovered key equals the victim's true key.
void judge(AttackOutcome& outcome, const cipher::SymKey& true_key);

// Heuristic sanity probe, not a security argument. Each trial compares the
// protected key for a random symmetric key against an unmasked encryption of
// a uniformly random vector in the same wire form.
struct ProbeResult {
  keyprot::Mode mode = keyprot::Mode::kMasking;
  std::size_t trials = 0;
  bool lengths_equal = true;
  // Two-sample chi-square over byte histograms of the serialized pair;
  // threshold is 1.25x the largest random-vs-random value seen in calibration.
  double max_statistic = 0;
  double threshold = 0;
  // Key-aware distinguisher holding HE_sk: decrypt, use the result as the
  // symmetric key on a known update and test whether it lands inside the
  // quantization range. Advantage = |P(real says real) - P(random says real)|.
  double key_aware_advantage = 0;
  bool distinguishable = false;
  std::string label = "heuristic";
};

ProbeResult distinguishability_probe(keyprot::Mode mode, std::size_t trials, std::uint64_t seed,
                                     std::size_t poly_degree = 4096, int rsa_bits = 1024);

double chi_square_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

}  // namespace hhefl::adversary

#endif  // HHEFL_ADVERSARY_ADVERSARY_HPP_
