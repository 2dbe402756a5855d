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


// Key transport from a client to the server: Baseline (plain HE encryption
// of the symmetric key), Masking (HE encryption of key + mask, mask removed
// by the server), and RSA wrapping of the serialized key ciphertext.

#ifndef HHEFL_KEYPROT_KEY_PROTECTION_HPP_
#define HHEFL_KEYPROT_KEY_PROTECTION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hhefl/bytes.hpp"
#include "hhefl/cipher/stream_cipher.hpp"
#include "hhefl/he/ring_he.hpp"
#include "hhefl/keyprot/rsa.hpp"

namespace hhefl::keyprot {

using he::u64;

enum class Mode { kBaseline, kMasking, kRsaWrapping };

std::string_view to_string(Mode m);
// Accepts "baseline", "masking", "rsa" / "rsa_wrapping".
Mode parse_mode(std::string_view s);

struct Mask {
  std::vector<u64> elements;  // t_k values in [0, p)
  std::uint32_t owner = 0;
};

Mask random_mask(const cipher::CipherParams& params, std::uint32_t owner, he::Prng& prng);

struct BaselineKey {
  he::RingCiphertext ct;
};
struct MaskedKey {
  he::RingCiphertext ct;
};
struct RsaWrappedKey {
  std::vector<Bytes> chunks;  // each exactly modulus_bytes long
};

using ProtectedKey = std::variant<BaselineKey, MaskedKey, RsaWrappedKey>;

Mode mode_of(const ProtectedKey& k);

ProtectedKey protect_baseline(const cipher::CipherParams& params, const cipher::SymKey& sk,
                              const he::PublicKey& pk);
ProtectedKey protect_masked(const cipher::CipherParams& params, const cipher::SymKey& sk, const Mask& mask,
                            const he::PublicKey& pk);
// sub_plain of the mask layout; decrypts to sk when `mask` is the one used.
he::RingCiphertext unmask(const cipher::CipherParams& params, const MaskedKey& key, const Mask& mask);

// OAEP/SHA-256 capacity: modulus_bytes - 2 * 32 - 2.
std::size_t max_plaintext_size(int modulus_bits);
std::size_t chunk_count(std::size_t input_bytes, int modulus_bits);

struct ServerCertificate {
  Bytes modulus;   // big-endian n
  Bytes exponent;  // big-endian e
  Bytes tpa_signature;

  RsaPublicKey public_key() const;
  Bytes signed_payload() const;  // canonical (n, e) encoding
};

ServerCertificate issue_certificate(const RsaPrivateKey& tpa_signing_key, const RsaPublicKey& server_key);
bool verify_certificate(const RsaPublicKey& tpa_verifying_key, const ServerCertificate& cert);

// Verifies the certificate first; throws IntegrityError if it does not
// check out and InvalidArgument on empty input.
ProtectedKey rsa_wrap(std::span<const std::uint8_t> sk_he_bytes, const ServerCertificate& cert,
                      const RsaPublicKey& tpa_verifying_key);
// Throws IntegrityError if any chunk fails OAEP decryption, including a
// chunk presented at the wrong position or a truncated chunk list.
Bytes rsa_unwrap(const RsaWrappedKey& key, const RsaPrivateKey& rsa_sk);

// 1-byte variant tag (0 baseline, 1 masked, 2 RSA), then the payload:
// serialized ciphertext, or u32 chunk count and u32-length-prefixed chunks.
Bytes serialize(const ProtectedKey& k);
ProtectedKey deserialize_protected(const he::ContextPtr& ctx, std::span<const std::uint8_t> bytes);

Bytes serialize(const ServerCertificate& cert);
ServerCertificate deserialize_certificate(std::span<const std::uint8_t> bytes);

}  // namespace hhefl::keyprot

#endif  // HHEFL_KEYPROT_KEY_PROTECTION_HPP_
