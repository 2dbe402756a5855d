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


#include "hhefl/cipher/hesd.hpp"

#include <algorithm>

#include "hhefl/error.hpp"

namespace hhefl::cipher {

he::PlaintextVec key_layout(const he::HeContext& ctx, const CipherParams& params,
                            std::span<const u64> values) {
  if (values.size() != params.key_len) throw InvalidArgument("layout input must have t_k elements");
  if (ctx.row_size() % params.key_len != 0) {
    throw ParamMismatch("key length must divide the slot row size");
  }
  he::PlaintextVec out(ctx.slot_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values[k % params.key_len];
  return out;
}

he::RingCiphertext encrypt_key(const he::PublicKey& pk, const CipherParams& params, const SymKey& key) {
  validate_key(params, key);
  return he::encrypt(pk, key_layout(*pk.ctx, params, key.elements));
}

HesdEvaluator::HesdEvaluator(const CipherParams& params, const he::RingCiphertext& enc_key,
                             const he::EvaluationKey& evk)
    : params_(params), ctx_(enc_key.ctx), evk_(&evk) {
  params_.validate();
  if (!ctx_) throw InvalidArgument("encrypted key has no context");
  if (ctx_->t().value() != params_.modulus) throw ParamMismatch("cipher and ring moduli differ");
  if (ctx_->row_size() % params_.key_len != 0) {
    throw ParamMismatch("key length must divide the slot row size");
  }
  if (enc_key.depth + params_.rounds > ctx_->params().depth_budget) {
    throw DepthExhausted("cipher rounds exceed the ring depth budget");
  }
  rotations_.reserve(params_.key_len);
  rotations_.push_back(enc_key);
  for (std::size_t r = 1; r < params_.key_len; ++r) {
    rotations_.push_back(he::rotate_rows(rotations_.back(), 1, evk));
  }
}

he::RingCiphertext HesdEvaluator::pass(const Nonce& nonce, std::size_t first,
                                       std::span<const u64> c) const {
  const std::size_t n = ctx_->slot_count();
  const std::size_t tk = params_.key_len;
  const std::size_t b = params_.block_len;
  const int rounds = params_.rounds;
  const std::size_t count = c.size();
  if (count > n || first % b != 0) throw InvalidArgument("pass does not fit the slot layout");

  const std::size_t nblk = (count + b - 1) / b;
  std::vector<std::vector<RoundConstants>> rc(nblk);
  for (std::size_t blk = 0; blk < nblk; ++blk) {
    for (int r = 1; r <= rounds + 1; ++r) rc[blk].push_back(round_constants(params_, nonce, first / b + blk, r));
  }
  const auto lane_plain = [&](auto&& value) {
    he::PlaintextVec v(n, 0);
    for (std::size_t k = 0; k < count; ++k) v[k] = value(rc[k / b], k);
    return he::encode(ctx_, v);
  };
  const auto nonlinear = [&](const he::RingCiphertext& x) {
    return he::add(he::square(x, *evk_), x);
  };

  // Round 1: diagonals of A against the rotated key.
  std::vector<he::RingCiphertext> state(tk);
  for (std::size_t i = 0; i < tk; ++i) {
    he::RingCiphertext acc;
    for (std::size_t r = 0; r < tk; ++r) {
      const auto diag = lane_plain([&](const auto& m, std::size_t k) {
        return m[0].a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((k + r) % tk));
      });
      he::mul_plain_accumulate(acc, rotations_[r], diag);
    }
    acc = he::add_plain(acc, lane_plain([&](const auto& m, std::size_t) { return m[0].c(static_cast<Eigen::Index>(i)); }));
    state[i] = nonlinear(acc);
  }

  for (int r = 1; r < rounds; ++r) {
    std::vector<he::RingCiphertext> next(tk);
    for (std::size_t i = 0; i < tk; ++i) {
      he::RingCiphertext acc;
      for (std::size_t l = 0; l < tk; ++l) {
        const auto col = lane_plain([&](const auto& m, std::size_t) {
          return m[r].a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
        });
        he::mul_plain_accumulate(acc, state[l], col);
      }
      acc = he::add_plain(acc, lane_plain([&](const auto& m, std::size_t) { return m[r].c(static_cast<Eigen::Index>(i)); }));
      next[i] = nonlinear(acc);
    }
    state = std::move(next);
  }

  // Final layer: lane k keeps output row k mod b.
  he::RingCiphertext ks;
  for (std::size_t l = 0; l < tk; ++l) {
    const auto col = lane_plain([&](const auto& m, std::size_t k) {
      return m[rounds].a(static_cast<Eigen::Index>(k % b), static_cast<Eigen::Index>(l));
    });
    he::mul_plain_accumulate(ks, state[l], col);
  }
  ks = he::add_plain(ks, lane_plain([&](const auto& m, std::size_t k) {
    return m[rounds].c(static_cast<Eigen::Index>(k % b));
  }));

  he::PlaintextVec cv(n, 0);
  std::copy(c.begin(), c.end(), cv.begin());
  return he::plain_sub(cv, ks);
}

he::RingCiphertext HesdEvaluator::block(const Nonce& nonce, std::uint64_t j,
                                        std::span<const u64> c_block) const {
  if (c_block.size() != params_.block_len) throw InvalidArgument("block has wrong length");
  return pass(nonce, static_cast<std::size_t>(j) * params_.block_len, c_block);
}

std::vector<he::RingCiphertext> HesdEvaluator::run(const SymCiphertext& ct) const {
  std::vector<u64> flat;
  flat.reserve(ct.element_count());
  for (const auto& blk : ct.blocks) {
    if (blk.size() != params_.block_len) throw InvalidArgument("block has wrong length");
    flat.insert(flat.end(), blk.begin(), blk.end());
  }
  const std::size_t n = ctx_->slot_count();
  std::vector<he::RingCiphertext> out;
  for (std::size_t first = 0; first < flat.size(); first += n) {
    const std::size_t count = std::min(n, flat.size() - first);
    out.push_back(pass(ct.nonce, first, {flat.data() + first, count}));
  }
  return out;
}

he::RingCiphertext hesd_block(const CipherParams& params, const he::RingCiphertext& enc_key,
                              const he::EvaluationKey& evk, const Nonce& nonce, std::uint64_t j,
                              std::span<const u64> c_block) {
  return HesdEvaluator(params, enc_key, evk).block(nonce, j, c_block);
}

std::vector<he::RingCiphertext> hesd(const CipherParams& params, const he::RingCiphertext& enc_key,
                                     const he::EvaluationKey& evk, const SymCiphertext& ct) {
  return HesdEvaluator(params, enc_key, evk).run(ct);
}

std::vector<u64> decrypt_transciphered(const he::SecretKey& sk, std::span<const he::RingCiphertext> cts,
                                       std::size_t len) {
  std::vector<u64> out;
  for (const auto& ct : cts) {
    const auto d = he::decrypt(sk, ct);
    out.insert(out.end(), d.begin(), d.end());
  }
  if (out.size() < len) throw InvalidArgument("transciphered output shorter than requested length");
  out.resize(len);
  return out;
}

}  // namespace hhefl::cipher
