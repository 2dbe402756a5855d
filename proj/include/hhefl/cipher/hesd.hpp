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


// Homomorphic evaluation of the toy cipher's decryption (transciphering).
//
// The encrypted key is a single ring ciphertext whose slots repeat the key
// with period t_k. Rotating it by r gives, in slot k, key[(k + r) mod t_k],
// so the first affine layer becomes t_k diagonal products. After that the
// cipher state is held as t_k ciphertexts, one per state index, and every
// slot ("lane") runs the cipher for a different message element: lane k of a
// pass starting at element e0 evaluates block (e0 + k) / b, output row
// (e0 + k) mod b. One pass therefore converts up to N message elements.

#ifndef HHEFL_CIPHER_HESD_HPP_
#define HHEFL_CIPHER_HESD_HPP_

#include <cstddef>
#include <vector>

#include "hhefl/cipher/stream_cipher.hpp"
#include "hhefl/he/ring_he.hpp"

namespace hhefl::cipher {

// Periodic slot layout of a t_k-element vector (key or mask). Requires t_k to
// divide the slot row size.
he::PlaintextVec key_layout(const he::HeContext& ctx, const CipherParams& params,
                            std::span<const u64> values);

// Enc_HE of key_layout(key).
he::RingCiphertext encrypt_key(const he::PublicKey& pk, const CipherParams& params, const SymKey& key);

class HesdEvaluator {
 public:
  // Precomputes the t_k key rotations. Throws ParamMismatch when the cipher
  // does not fit the ring (modulus, layout, depth).
  HesdEvaluator(const CipherParams& params, const he::RingCiphertext& enc_key,
                const he::EvaluationKey& evk);

  // Slots 0..b-1 of the result hold message block j.
  he::RingCiphertext block(const Nonce& nonce, std::uint64_t j, std::span<const u64> c_block) const;

  // ceil(padded_len / N) ciphertexts; slot k of output i holds padded
  // message element i * N + k.
  std::vector<he::RingCiphertext> run(const SymCiphertext& ct) const;

 private:
  // Lanes 0..count-1 carry elements first..first+count-1 of the padded
  // message; `c` holds the matching symmetric-ciphertext elements.
  he::RingCiphertext pass(const Nonce& nonce, std::size_t first, std::span<const u64> c) const;

  CipherParams params_;
  he::ContextPtr ctx_;
  const he::EvaluationKey* evk_;
  std::vector<he::RingCiphertext> rotations_;  // rotations_[r] = key rotated by r
};

he::RingCiphertext hesd_block(const CipherParams& params, const he::RingCiphertext& enc_key,
                              const he::EvaluationKey& evk, const Nonce& nonce, std::uint64_t j,
                              std::span<const u64> c_block);

std::vector<he::RingCiphertext> hesd(const CipherParams& params, const he::RingCiphertext& enc_key,
                                     const he::EvaluationKey& evk, const SymCiphertext& ct);

// Decrypts hesd() output and returns the first `len` message elements.
std::vector<u64> decrypt_transciphered(const he::SecretKey& sk, std::span<const he::RingCiphertext> cts,
                                       std::size_t len);

}  // namespace hhefl::cipher

#endif  // HHEFL_CIPHER_HESD_HPP_
