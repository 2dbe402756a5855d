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

// Leveled BFV over Z_q[X]/(X^N + 1) with slot batching mod t.
//
// Ciphertexts are kept in the evaluation (NTT) domain for every prime of q.
// Products are computed exactly by extending to an auxiliary RNS base, then
// scaled by t/q and relinearized with a digit-decomposed key-switching key.
// The same machinery switches keys after the X -> X^3 automorphism, which
// rotates both slot rows by one position.

#ifndef HHEFL_HE_RING_HE_HPP_
#define HHEFL_HE_RING_HE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hhefl/bytes.hpp"
#include "hhefl/he/context.hpp"

namespace hhefl::he {

// Slot vector; every element must lie in [0, t). Shorter vectors are padded
// with zeros up to the slot count.
using PlaintextVec = std::vector<std::uint64_t>;

// Seedable generator used for key generation and encryption randomness.
using Prng = std::mt19937_64;
Prng make_prng(const Seed& seed);
// Non-deterministic generator for callers that do not care about replay.
Prng make_random_prng();

// A polynomial in RNS form: q_count() rows of N residues, row-major.
using RnsPoly = std::vector<u64>;

// Encoded plaintext polynomial, coefficients in [0, t).
struct Plaintext {
  ContextPtr ctx;
  std::vector<u64> coeffs;
};

struct RingCiphertext {
  ContextPtr ctx;
  std::vector<RnsPoly> parts;  // 2 or 3 components, evaluation domain
  int depth = 0;               // ciphertext products in this value's history

  std::size_t size() const { return parts.size(); }
};

struct PublicKey {
  ContextPtr ctx;
  RnsPoly p0, p1;
};

struct SecretKey {
  ContextPtr ctx;
  std::vector<std::int8_t> ternary;  // coefficient form, values in {-1, 0, 1}
  RnsPoly s;                         // evaluation domain
};

// Encrypts (digit_i * gadget_i * target) under the secret key; one pair per
// gadget component.
struct KeySwitchKey {
  std::vector<RnsPoly> k0, k1;
};

struct EvaluationKey {
  ContextPtr ctx;
  KeySwitchKey relin;     // target s^2
  KeySwitchKey rotation;  // target s(X^3)
};

struct RingKeys {
  PublicKey public_key;
  SecretKey secret_key;
  EvaluationKey eval_key;
  std::string metadata;  // carries the security notice
};

// Deterministic in `seed`.
RingKeys keygen(const ContextPtr& ctx, const Seed& seed);

Plaintext encode(const ContextPtr& ctx, std::span<const u64> values);
PlaintextVec decode(const Plaintext& pt);

RingCiphertext encrypt(const PublicKey& pk, std::span<const u64> values, Prng& prng);
RingCiphertext encrypt(const PublicKey& pk, std::span<const u64> values);
PlaintextVec decrypt(const SecretKey& sk, const RingCiphertext& ct);

RingCiphertext add(const RingCiphertext& a, const RingCiphertext& b);
RingCiphertext sub(const RingCiphertext& a, const RingCiphertext& b);
RingCiphertext negate(const RingCiphertext& a);
RingCiphertext add_plain(const RingCiphertext& a, std::span<const u64> v);
RingCiphertext sub_plain(const RingCiphertext& a, std::span<const u64> v);
RingCiphertext plain_sub(std::span<const u64> v, const RingCiphertext& a);
RingCiphertext mul_plain(const RingCiphertext& a, std::span<const u64> v);

RingCiphertext add_plain(const RingCiphertext& a, const Plaintext& pt);
RingCiphertext mul_plain(const RingCiphertext& a, const Plaintext& pt);
// In-place accumulate: acc += a * pt.
void mul_plain_accumulate(RingCiphertext& acc, const RingCiphertext& a, const Plaintext& pt);

// Ciphertext product followed by relinearization; result has two components.
// Throws DepthExhausted past params.depth_budget.
RingCiphertext mul(const RingCiphertext& a, const RingCiphertext& b, const EvaluationKey& evk);
RingCiphertext square(const RingCiphertext& a, const EvaluationKey& evk);
// Three-component ciphertext back to two components.
RingCiphertext relinearize(const RingCiphertext& a, const EvaluationKey& evk);

// Rotates both slot rows left by `steps` positions (slot c takes the value of
// slot c + steps, within its row).
RingCiphertext rotate_rows(const RingCiphertext& a, std::size_t steps, const EvaluationKey& evk);

// Canonical encoding: 16-byte header (magic "HRCT", params hash, component
// count, depth, reserved) followed by coefficient-domain residues as
// little-endian u64, component-major then prime-major.
Bytes serialize(const RingCiphertext& ct);
RingCiphertext deserialize(const ContextPtr& ctx, std::span<const std::uint8_t> bytes);
std::size_t serialized_size(const HeContext& ctx, std::size_t components);

Bytes serialize(const PublicKey& pk);
PublicKey deserialize_public_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes);
Bytes serialize(const SecretKey& sk);
SecretKey deserialize_secret_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes);
Bytes serialize(const EvaluationKey& evk);
EvaluationKey deserialize_eval_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes);

// Remaining noise budget in bits: floor(log2(q/2) - log2 ||[t * (c0 + c1 s)]_q||).
// Zero means decryption can no longer be trusted.
int noise_budget(const SecretKey& sk, const RingCiphertext& ct);

}  // namespace hhefl::he

#endif  // HHEFL_HE_RING_HE_HPP_
