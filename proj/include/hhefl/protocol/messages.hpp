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


// Typed protocol messages and their wire encoding:
//   u32 length of what follows, u8 tag, u32 sender, u32 recipient, u32 round,
//   then the fields in declaration order (little-endian integers).

#ifndef HHEFL_PROTOCOL_MESSAGES_HPP_
#define HHEFL_PROTOCOL_MESSAGES_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "hhefl/bytes.hpp"
#include "hhefl/cipher/stream_cipher.hpp"
#include "hhefl/fl/model.hpp"
#include "hhefl/he/ring_he.hpp"
#include "hhefl/keyprot/key_protection.hpp"

namespace hhefl::protocol {

using he::u64;
using PartyId = std::uint32_t;
inline constexpr PartyId kTpaId = 0xFFFFFFF0u;
inline constexpr PartyId kServerId = 0xFFFFFFF1u;
// Clients are numbered 0 .. clients - 1.

struct Header {
  PartyId sender = 0;
  PartyId recipient = 0;
  std::uint32_t round = 0;  // 0 during setup
  bool operator==(const Header&) const = default;
};

// Setup material from the TPA. Which fields are present depends on the
// recipient: clients get pk, sk, their symmetric key, their mask (masking)
// and the TPA verifying key (RSA wrapping); the server gets pk, eval key and
// the mask table (masking).
struct KeyIssue {
  std::optional<he::PublicKey> he_pk;
  std::optional<he::SecretKey> he_sk;
  std::optional<he::EvaluationKey> he_eval;
  std::optional<cipher::SymKey> sym_key;
  std::vector<keyprot::Mask> masks;
  std::optional<keyprot::RsaPublicKey> tpa_key;
};

// Server asks the TPA to certify its RSA public key.
struct CertificateRequest {
  keyprot::RsaPublicKey server_key;
};

struct CertificateMsg {
  keyprot::ServerCertificate cert;
};

struct InitModel {
  fl::ModelWeights weights;
};

struct TrainRequest {};

struct ClientUpdateMsg {
  cipher::SymCiphertext w_ske;
  keyprot::ProtectedKey protected_key;
  fl::SampleCount n = 0;
};

struct GlobalModelMsg {
  std::vector<he::RingCiphertext> cts;
  fl::SampleCount n = 0;
};

struct EvalRequest {};

struct EvalReport {
  fl::EvalMetrics metrics;
};

using Payload = std::variant<KeyIssue, CertificateRequest, CertificateMsg, InitModel, TrainRequest, ClientUpdateMsg,
                             GlobalModelMsg, EvalRequest, EvalReport>;

struct Message {
  Header header;
  Payload payload;
};

std::uint8_t tag_of(const Payload& p);
std::string_view tag_name(std::uint8_t tag);

// Everything needed to decode payloads that depend on parameters.
struct WireContext {
  he::ContextPtr ctx;
  cipher::CipherParams cipher;
};

Bytes encode(const WireContext& wc, const Message& m);
// Throws ParseError on malformed frames, unknown tags or trailing bytes.
Message decode(const WireContext& wc, std::span<const std::uint8_t> frame);

// Peeks the header and tag of a frame without decoding the payload.
std::pair<Header, std::uint8_t> peek(std::span<const std::uint8_t> frame);

}  // namespace hhefl::protocol

#endif  // HHEFL_PROTOCOL_MESSAGES_HPP_
