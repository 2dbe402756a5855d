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


#include "hhefl/cipher/stream_cipher.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <memory>
#include <random>
#include <string_view>

#include "hhefl/error.hpp"

namespace hhefl::cipher {

namespace {

constexpr std::string_view kPublicSeedLabel = "hhefl toy cipher v1 public seed";

using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

Bytes shake128(std::span<const std::uint8_t> input, std::size_t out_len) {
  MdCtx md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  Bytes out(out_len);
  if (!md || EVP_DigestInit_ex(md.get(), EVP_shake128(), nullptr) != 1 ||
      EVP_DigestUpdate(md.get(), input.data(), input.size()) != 1 ||
      EVP_DigestFinalXOF(md.get(), out.data(), out.size()) != 1) {
    throw CryptoBackendError("SHAKE128 failed");
  }
  return out;
}

// Uniform elements of [0, p) from the XOF: 4-byte little-endian words masked
// to bit_width(p) bits, rejected when >= p.
std::vector<u64> sample_elements(std::span<const std::uint8_t> input, u64 p, std::size_t count) {
  const u64 mask = (u64{1} << std::bit_width(p)) - 1;
  std::size_t stream_len = 4 * (2 * count + 16);
  for (;;) {
    const Bytes stream = shake128(input, stream_len);
    std::vector<u64> out;
    out.reserve(count);
    for (std::size_t pos = 0; pos + 4 <= stream.size() && out.size() < count; pos += 4) {
      const u64 w = u64{stream[pos]} | u64{stream[pos + 1]} << 8 | u64{stream[pos + 2]} << 16 |
                    u64{stream[pos + 3]} << 24;
      const u64 v = w & mask;
      if (v < p) out.push_back(v);
    }
    if (out.size() == count) return out;
    // The XOF output is prefix-stable, so a longer read extends the same draws.
    stream_len *= 2;
  }
}

}  // namespace

CipherParams CipherParams::defaults() {
  CipherParams p;
  p.cipher_seed = sha256({reinterpret_cast<const std::uint8_t*>(kPublicSeedLabel.data()),
                          kPublicSeedLabel.size()});
  return p;
}

void CipherParams::validate() const {
  if (modulus != 65537) throw InvalidParams("cipher modulus must be 65537");
  if (key_len == 0 || block_len == 0) throw InvalidParams("key and block lengths must be positive");
  if (block_len > key_len) throw InvalidParams("block length exceeds key length");
  if (rounds < 1) throw InvalidParams("cipher needs at least one round");
}

std::uint64_t CipherParams::hash() const {
  ByteWriter w;
  w.str("hhefl-cipher-v1");
  w.u64(modulus);
  w.u64(key_len);
  w.u64(block_len);
  w.u32(static_cast<std::uint32_t>(rounds));
  w.raw(cipher_seed);
  return short_hash(w.bytes());
}

SymKey random_sym_key(const CipherParams& params, he::Prng& prng) {
  std::uniform_int_distribution<u64> dist(0, params.modulus - 1);
  SymKey key;
  key.elements.resize(params.key_len);
  for (auto& v : key.elements) v = dist(prng);
  return key;
}

Nonce random_nonce(he::Prng& prng) {
  Nonce n;
  for (std::size_t i = 0; i < n.size(); i += 8) {
    const u64 v = prng();
    for (std::size_t b = 0; b < 8; ++b) n[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return n;
}

std::size_t SymCiphertext::element_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

std::size_t SymCiphertext::message_length() const {
  if (blocks.empty()) return 0;
  return element_count() - blocks.back().size() + true_len;
}

void validate_key(const CipherParams& params, const SymKey& key) {
  if (key.elements.size() != params.key_len) throw InvalidArgument("symmetric key has wrong length");
  for (u64 v : key.elements) {
    if (v >= params.modulus) throw InvalidArgument("symmetric key element out of range");
  }
}

RoundConstants round_constants(const CipherParams& params, const Nonce& nonce, std::uint64_t block,
                               int round) {
  if (round < 1 || round > params.rounds + 1) throw InvalidArgument("round index out of range");
  const std::size_t rows = round == params.rounds + 1 ? params.block_len : params.key_len;
  const std::size_t cols = params.key_len;

  ByteWriter w;
  w.raw(params.cipher_seed);
  w.raw(nonce);
  w.u64(block);
  w.u64(static_cast<u64>(round));
  const auto draws = sample_elements(w.bytes(), params.modulus, rows * cols + rows);

  RoundConstants rc;
  rc.a.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  rc.c.resize(static_cast<Eigen::Index>(rows));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rc.a.rows(); ++i) {
    for (Eigen::Index j = 0; j < rc.a.cols(); ++j) rc.a(i, j) = draws[k++];
  }
  for (Eigen::Index i = 0; i < rc.c.size(); ++i) rc.c(i) = draws[k++];
  return rc;
}

std::vector<u64> keystream_block(const CipherParams& params, const SymKey& key, const Nonce& nonce,
                                 std::uint64_t block) {
  validate_key(params, key);
  const u64 p = params.modulus;
  const auto mod_p = [p](u64 x) { return x % p; };

  ElementVector s = Eigen::Map<const ElementVector>(key.elements.data(),
                                                    static_cast<Eigen::Index>(key.elements.size()));
  for (int r = 1; r <= params.rounds; ++r) {
    const RoundConstants rc = round_constants(params, nonce, block, r);
    s = ((rc.a * s).unaryExpr(mod_p) + rc.c).unaryExpr(mod_p);
    s = (s.cwiseProduct(s).unaryExpr(mod_p) + s).unaryExpr(mod_p);
  }
  const RoundConstants fin = round_constants(params, nonce, block, params.rounds + 1);
  const ElementVector out = ((fin.a * s).unaryExpr(mod_p) + fin.c).unaryExpr(mod_p);
  return {out.data(), out.data() + out.size()};
}

SymCiphertext sym_encrypt(const CipherParams& params, const SymKey& key, const Nonce& nonce,
                          std::span<const u64> message) {
  params.validate();
  validate_key(params, key);
  for (u64 v : message) {
    if (v >= params.modulus) throw InvalidArgument("message element out of range");
  }
  const std::size_t b = params.block_len;
  SymCiphertext ct;
  ct.nonce = nonce;
  const std::size_t nblocks = (message.size() + b - 1) / b;
  ct.true_len = nblocks == 0 ? 0 : message.size() - (nblocks - 1) * b;
  for (std::size_t j = 0; j < nblocks; ++j) {
    const auto ks = keystream_block(params, key, nonce, j);
    std::vector<u64> blk(b, 0);
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t idx = j * b + i;
      const u64 m = idx < message.size() ? message[idx] : 0;
      blk[i] = (m + ks[i]) % params.modulus;
    }
    ct.blocks.push_back(std::move(blk));
  }
  return ct;
}

std::vector<u64> sym_decrypt(const CipherParams& params, const SymKey& key, const SymCiphertext& ct) {
  params.validate();
  validate_key(params, key);
  std::vector<u64> out;
  out.reserve(ct.element_count());
  for (std::size_t j = 0; j < ct.blocks.size(); ++j) {
    if (ct.blocks[j].size() != params.block_len) throw InvalidArgument("block has wrong length");
    const auto ks = keystream_block(params, key, ct.nonce, j);
    for (std::size_t i = 0; i < params.block_len; ++i) {
      out.push_back((ct.blocks[j][i] + params.modulus - ks[i]) % params.modulus);
    }
  }
  out.resize(ct.message_length());
  return out;
}

Bytes serialize(const CipherParams& params, const SymCiphertext& ct) {
  ByteWriter w(16 + 16 + 4 * ct.element_count());
  w.raw(ct.nonce);
  w.u32(static_cast<std::uint32_t>(ct.blocks.size()));
  w.u32(static_cast<std::uint32_t>(ct.true_len));
  w.u64(params.hash());
  for (const auto& blk : ct.blocks) {
    for (u64 v : blk) w.u32(static_cast<std::uint32_t>(v));
  }
  return std::move(w).take();
}

SymCiphertext deserialize_sym(const CipherParams& params, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SymCiphertext ct;
  auto nonce = r.raw(ct.nonce.size());
  std::copy(nonce.begin(), nonce.end(), ct.nonce.begin());
  const std::uint32_t nblocks = r.u32();
  ct.true_len = r.u32();
  if (r.u64() != params.hash()) throw ParseError("cipher parameter hash mismatch");
  if ((nblocks == 0) != (ct.true_len == 0) || ct.true_len > params.block_len) {
    throw ParseError("invalid true_len");
  }
  if (r.remaining() != std::size_t{nblocks} * params.block_len * 4) {
    throw ParseError("symmetric ciphertext length mismatch");
  }
  ct.blocks.assign(nblocks, std::vector<u64>(params.block_len));
  for (auto& blk : ct.blocks) {
    for (auto& v : blk) {
      v = r.u32();
      if (v >= params.modulus) throw ParseError("symmetric ciphertext element out of range");
    }
  }
  return ct;
}

}  // namespace hhefl::cipher
