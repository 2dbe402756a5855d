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


// Toy HE-friendly stream cipher over F_p: R rounds of a nonce-derived affine
// layer followed by the elementwise map x -> x^2 + x, then a final affine
// layer that truncates the state to one output block.
//
// NOT SECURITY-GRADE. The cipher keeps the shape that matters for
// transciphering (keystream is a depth-R polynomial in the key) and nothing
// else; it has not been analysed.

#ifndef HHEFL_CIPHER_STREAM_CIPHER_HPP_
#define HHEFL_CIPHER_STREAM_CIPHER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hhefl/bytes.hpp"
#include "hhefl/he/ring_he.hpp"

namespace hhefl::cipher {

using he::u64;

using Nonce = std::array<std::uint8_t, 16>;
using ElementMatrix = Eigen::Matrix<u64, Eigen::Dynamic, Eigen::Dynamic>;
using ElementVector = Eigen::Matrix<u64, Eigen::Dynamic, 1>;

struct CipherParams {
  u64 modulus = 65537;
  std::size_t key_len = 16;   // t_k
  std::size_t block_len = 8;  // b
  int rounds = 3;             // R
  Seed cipher_seed{};         // public constant

  // Default toy parameters with the built-in public seed.
  static CipherParams defaults();

  // Throws InvalidParams on b > t_k, p != 65537, R < 1 or zero lengths.
  void validate() const;
  std::uint64_t hash() const;
};

struct SymKey {
  std::vector<u64> elements;
};

SymKey random_sym_key(const CipherParams& params, he::Prng& prng);
Nonce random_nonce(he::Prng& prng);

struct SymCiphertext {
  Nonce nonce{};
  std::vector<std::vector<u64>> blocks;
  std::size_t true_len = 0;  // meaningful elements in the last block; 0 iff no blocks

  std::size_t element_count() const;   // padded length
  std::size_t message_length() const;  // unpadded length
};

struct RoundConstants {
  ElementMatrix a;  // t_k x t_k, or b x t_k for the final layer (round R + 1)
  ElementVector c;
};

// Affine material for block j and round r in [1, R + 1], sampled from
// SHAKE128(cipher_seed || nonce || le64(j) || le64(r)) by rejection.
RoundConstants round_constants(const CipherParams& params, const Nonce& nonce, std::uint64_t block,
                               int round);

std::vector<u64> keystream_block(const CipherParams& params, const SymKey& key, const Nonce& nonce,
                                 std::uint64_t block);

SymCiphertext sym_encrypt(const CipherParams& params, const SymKey& key, const Nonce& nonce,
                          std::span<const u64> message);
std::vector<u64> sym_decrypt(const CipherParams& params, const SymKey& key, const SymCiphertext& ct);

// Header (nonce, u32 block count, u32 true_len, u64 params hash) then
// every element as little-endian u32.
Bytes serialize(const CipherParams& params, const SymCiphertext& ct);
SymCiphertext deserialize_sym(const CipherParams& params, std::span<const std::uint8_t> bytes);

void validate_key(const CipherParams& params, const SymKey& key);

}  // namespace hhefl::cipher

#endif  // HHEFL_CIPHER_STREAM_CIPHER_HPP_
