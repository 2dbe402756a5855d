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

#include "hhefl/he/context.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "hhefl/bytes.hpp"
#include "hhefl/error.hpp"

namespace hhefl::he {

namespace {

constexpr int kPrimeBits = 60;
constexpr std::size_t kDefaultPrimeCount = 4;

}  // namespace

HeParams HeParams::desk_default(std::size_t poly_degree) {
  HeParams p;
  p.poly_degree = poly_degree;
  p.ciphertext_primes = find_ntt_primes(kPrimeBits, 2 * poly_degree, kDefaultPrimeCount);
  return p;
}

BaseConverter::BaseConverter(const std::vector<Modulus>& from, const std::vector<Modulus>& to)
    : from_(from), to_(to) {
  const std::size_t k = from.size();
  punct_inv_.resize(k);
  punct_inv_shoup_.resize(k);
  inv_from_.resize(k);
  punct_mod_to_.resize(k * to.size());
  m_mod_to_.assign(to.size(), 1);
  for (std::size_t i = 0; i < k; ++i) {
    u64 punct = 1;
    for (std::size_t l = 0; l < k; ++l) {
      if (l != i) punct = from[i].mul(punct, from[i].reduce(from[l].value()));
    }
    punct_inv_[i] = from[i].inv(punct);
    punct_inv_shoup_[i] = from[i].shoup(punct_inv_[i]);
    inv_from_[i] = 1.0L / static_cast<long double>(from[i].value());
    for (std::size_t j = 0; j < to.size(); ++j) {
      u64 v = 1;
      for (std::size_t l = 0; l < k; ++l) {
        if (l != i) v = to[j].mul(v, to[j].reduce(from[l].value()));
      }
      punct_mod_to_[i * to.size() + j] = v;
    }
  }
  for (std::size_t j = 0; j < to.size(); ++j) {
    for (std::size_t l = 0; l < k; ++l) m_mod_to_[j] = to[j].mul(m_mod_to_[j], to[j].reduce(from[l].value()));
  }
}

void BaseConverter::convert(const u64* in, u64* out, std::size_t n) const {
  const std::size_t k = from_.size();
  const std::size_t kt = to_.size();
  std::vector<u64> y(k * n);
  std::vector<u64> alpha(n);
  std::vector<long double> v(n, 0.0L);
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& m = from_[i];
    const u64 w = punct_inv_[i];
    const u64 ws = punct_inv_shoup_[i];
    const long double inv = inv_from_[i];
    for (std::size_t c = 0; c < n; ++c) {
      const u64 yi = m.mul_shoup(in[i * n + c], w, ws);
      y[i * n + c] = yi;
      v[c] += static_cast<long double>(yi) * inv;
    }
  }
  for (std::size_t c = 0; c < n; ++c) alpha[c] = static_cast<u64>(v[c] + 0.5L);  // v >= 0

  for (std::size_t j = 0; j < kt; ++j) {
    const Modulus& p = to_[j];
    u64* dst = out + j * n;
    std::vector<u128> acc(n, 0);
    // k <= 16 products of two 61-bit values stay below 2^126.
    for (std::size_t i = 0; i < k; ++i) {
      const u64 f = punct_mod_to_[i * kt + j];
      const u64* src = y.data() + i * n;
      for (std::size_t c = 0; c < n; ++c) acc[c] += static_cast<u128>(src[c]) * f;
    }
    const u64 mj = m_mod_to_[j];
    for (std::size_t c = 0; c < n; ++c) {
      // alpha <= k, so alpha * [M]_p needs no pre-reduction.
      dst[c] = p.sub(p.reduce128(acc[c]), p.reduce128(static_cast<u128>(alpha[c]) * mj));
    }
  }
}

std::shared_ptr<const HeContext> HeContext::create(const HeParams& params) {
  const std::size_t n = params.poly_degree;
  if (n < 16 || !std::has_single_bit(n)) throw InvalidParams("poly_degree must be a power of two >= 16");
  if (!is_prime(params.plaintext_modulus)) throw InvalidParams("plaintext modulus must be prime");
  if ((params.plaintext_modulus - 1) % (2 * n) != 0) {
    throw InvalidParams("plaintext modulus must be 1 mod 2N for slot batching");
  }
  if (params.ciphertext_primes.empty()) throw InvalidParams("ciphertext modulus has no primes");
  if (params.ciphertext_primes.size() > 12) throw InvalidParams("too many ciphertext primes");
  if (params.depth_budget < 1) throw InvalidParams("depth_budget must be positive");
  std::set<u64> seen;
  for (u64 q : params.ciphertext_primes) {
    if (q >= (u64{1} << 61) || !is_prime(q)) throw InvalidParams("ciphertext prime invalid");
    if ((q - 1) % (2 * n) != 0) throw InvalidParams("ciphertext prime must be 1 mod 2N");
    if (q == params.plaintext_modulus || !seen.insert(q).second) {
      throw InvalidParams("ciphertext primes must be distinct and differ from t");
    }
  }

  std::shared_ptr<HeContext> ctx(new HeContext());
  ctx->params_ = params;
  ctx->t_ = Modulus(params.plaintext_modulus);
  for (u64 q : params.ciphertext_primes) ctx->q_.emplace_back(q);

  ctx->log2_q_ = 0;
  for (u64 q : params.ciphertext_primes) ctx->log2_q_ += std::log2(static_cast<double>(q));

  // Auxiliary base for exact tensoring: P > 16 * t * N * q.
  const double need_bits = ctx->log2_q_ + std::log2(static_cast<double>(n)) +
                           std::log2(static_cast<double>(params.plaintext_modulus)) + 4;
  const std::size_t aux_count = static_cast<std::size_t>(std::ceil(need_bits / (kPrimeBits - 1)));
  std::vector<u64> exclude = params.ciphertext_primes;
  exclude.push_back(params.plaintext_modulus);
  for (u64 p : find_ntt_primes(kPrimeBits, 2 * n, aux_count, exclude)) ctx->aux_.emplace_back(p);

  for (const auto& q : ctx->q_) ctx->q_ntt_.emplace_back(q, n);
  for (const auto& p : ctx->aux_) ctx->aux_ntt_.emplace_back(p, n);
  ctx->t_ntt_ = std::make_unique<NttTables>(ctx->t_, n);

  const Modulus& t = ctx->t_;
  u64 q_mod_t = 1;
  for (const auto& q : ctx->q_) q_mod_t = t.mul(q_mod_t, t.reduce(q.value()));
  ctx->q_inv_mod_t_ = t.inv(q_mod_t);
  for (const auto& q : ctx->q_) {
    const u64 neg_rem = q.neg(q.reduce(q_mod_t));
    ctx->delta_.push_back(q.mul(neg_rem, q.inv(q.reduce(t.value()))));
  }
  for (const auto& p : ctx->aux_) {
    u64 qp = 1;
    for (const auto& q : ctx->q_) qp = p.mul(qp, p.reduce(q.value()));
    ctx->q_inv_mod_aux_.push_back(p.inv(qp));
  }

  ctx->q_to_aux_ = std::make_unique<BaseConverter>(ctx->q_, ctx->aux_);
  ctx->aux_to_q_ = std::make_unique<BaseConverter>(ctx->aux_, ctx->q_);
  ctx->q_to_t_ = std::make_unique<BaseConverter>(ctx->q_, std::vector<Modulus>{t});

  // Slot (row, col) evaluates the plaintext at psi^(+-3^col); evaluation index j
  // of the NTT holds psi^(2j+1).
  const u64 two_n = 2 * n;
  ctx->slot_to_eval_.resize(n);
  u64 e = 1;
  for (std::size_t col = 0; col < n / 2; ++col) {
    ctx->slot_to_eval_[col] = static_cast<std::uint32_t>((e - 1) / 2);
    ctx->slot_to_eval_[n / 2 + col] = static_cast<std::uint32_t>((two_n - e - 1) / 2);
    e = (e * 3) % two_n;
  }
  ctx->rotation_perm_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const u64 img = ((2 * j + 1) * 3) % two_n;
    ctx->rotation_perm_[j] = static_cast<std::uint32_t>((img - 1) / 2);
  }

  int max_bits = 0;
  for (u64 q : params.ciphertext_primes) max_bits = std::max(max_bits, static_cast<int>(std::bit_width(q)));
  ctx->digits_per_prime_ = static_cast<std::size_t>((max_bits + ctx->digit_bits() - 1) / ctx->digit_bits());

  ByteWriter w;
  w.str("hhefl-bfv-v1");
  w.u64(n);
  w.u64(params.plaintext_modulus);
  w.u32(static_cast<std::uint32_t>(params.ciphertext_primes.size()));
  for (u64 q : params.ciphertext_primes) w.u64(q);
  w.u32(static_cast<std::uint32_t>(params.depth_budget));
  ctx->hash_ = short_hash(w.bytes());
  return ctx;
}

}  // namespace hhefl::he
