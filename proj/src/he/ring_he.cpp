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

#include "hhefl/he/ring_he.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "hhefl/error.hpp"

namespace hhefl::he {

namespace {

constexpr double kErrorStddev = 3.2;
constexpr std::int64_t kErrorBound = 19;  // ~6 sigma

void check_same(const HeContext& a, const HeContext& b) {
  if (a.params_hash() != b.params_hash()) throw ParamMismatch("operands use different parameters");
}

const ContextPtr& require_ctx(const ContextPtr& ctx) {
  if (!ctx) throw InvalidArgument("object has no parameter context");
  return ctx;
}

RnsPoly zero_poly(const HeContext& ctx) { return RnsPoly(ctx.q_count() * ctx.n(), 0); }

std::span<u64> row(RnsPoly& p, std::size_t i, std::size_t n) { return {p.data() + i * n, n}; }

void to_eval(const HeContext& ctx, RnsPoly& p) {
  for (std::size_t i = 0; i < ctx.q_count(); ++i) ctx.q_ntt(i).forward(row(p, i, ctx.n()));
}

void to_coeff(const HeContext& ctx, RnsPoly& p) {
  for (std::size_t i = 0; i < ctx.q_count(); ++i) ctx.q_ntt(i).inverse(row(p, i, ctx.n()));
}

// Small signed coefficients into RNS coefficient form.
RnsPoly lift_signed(const HeContext& ctx, std::span<const std::int64_t> c) {
  const std::size_t n = ctx.n();
  RnsPoly p(ctx.q_count() * n);
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) p[i * n + j] = q.from_signed(c[j]);
  }
  return p;
}

std::vector<std::int64_t> sample_ternary(Prng& prng, std::size_t n) {
  std::uniform_int_distribution<int> dist(-1, 1);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = dist(prng);
  return out;
}

std::vector<std::int64_t> sample_error(Prng& prng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, kErrorStddev);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) {
    auto x = static_cast<std::int64_t>(std::llround(dist(prng)));
    v = std::clamp(x, -kErrorBound, kErrorBound);
  }
  return out;
}

RnsPoly sample_uniform_eval(const HeContext& ctx, Prng& prng) {
  const std::size_t n = ctx.n();
  RnsPoly p(ctx.q_count() * n);
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    std::uniform_int_distribution<u64> dist(0, ctx.q()[i].value() - 1);
    for (std::size_t j = 0; j < n; ++j) p[i * n + j] = dist(prng);
  }
  return p;
}

RnsPoly small_eval(const HeContext& ctx, std::span<const std::int64_t> c) {
  RnsPoly p = lift_signed(ctx, c);
  to_eval(ctx, p);
  return p;
}

// out = a * b (pointwise, evaluation domain)
RnsPoly mul_eval(const HeContext& ctx, const RnsPoly& a, const RnsPoly& b) {
  const std::size_t n = ctx.n();
  RnsPoly out(a.size());
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = q.mul(a[i * n + j], b[i * n + j]);
  }
  return out;
}

void add_inplace(const HeContext& ctx, RnsPoly& a, const RnsPoly& b) {
  const std::size_t n = ctx.n();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = q.add(a[i * n + j], b[i * n + j]);
  }
}

void sub_inplace(const HeContext& ctx, RnsPoly& a, const RnsPoly& b) {
  const std::size_t n = ctx.n();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = q.sub(a[i * n + j], b[i * n + j]);
  }
}

void negate_inplace(const HeContext& ctx, RnsPoly& a) {
  const std::size_t n = ctx.n();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = q.neg(a[i * n + j]);
  }
}

// acc += a * b
void fma_eval(const HeContext& ctx, RnsPoly& acc, const RnsPoly& a, const RnsPoly& b) {
  const std::size_t n = ctx.n();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    u64* out = acc.data() + i * n;
    const u64* x = a.data() + i * n;
    const u64* y = b.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] = q.add(out[j], q.mul(x[j], y[j]));
  }
}

// Plaintext coefficients lifted to (-t/2, t/2] and moved to the evaluation
// domain; the small-norm representative keeps plaintext products quiet.
RnsPoly plain_centered_eval(const HeContext& ctx, const Plaintext& pt) {
  const std::size_t n = ctx.n();
  const u64 t = ctx.t().value();
  RnsPoly p(ctx.q_count() * n);
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    for (std::size_t j = 0; j < n; ++j) {
      const u64 c = pt.coeffs[j];
      p[i * n + j] = c > t / 2 ? q.value() - (t - c) : c;
    }
  }
  to_eval(ctx, p);
  return p;
}

// Delta * m in the evaluation domain.
RnsPoly plain_scaled_eval(const HeContext& ctx, const Plaintext& pt) {
  const std::size_t n = ctx.n();
  RnsPoly p(ctx.q_count() * n);
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    const u64 d = ctx.delta(i);
    const u64 ds = q.shoup(d);
    for (std::size_t j = 0; j < n; ++j) p[i * n + j] = q.mul_shoup(pt.coeffs[j], d, ds);
  }
  to_eval(ctx, p);
  return p;
}

KeySwitchKey make_ksk(const HeContext& ctx, const RnsPoly& s, const RnsPoly& target, Prng& prng) {
  const std::size_t n = ctx.n();
  const std::size_t k = ctx.q_count();
  const std::size_t digits = ctx.digits_per_prime();
  KeySwitchKey ksk;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t u = 0; u < digits; ++u) {
      RnsPoly a = sample_uniform_eval(ctx, prng);
      auto e = sample_error(prng, n);
      RnsPoly k0 = small_eval(ctx, e);
      fma_eval(ctx, k0, a, s);
      negate_inplace(ctx, k0);
      // gadget_i = (q / q_i) * [(q / q_i)^-1]_{q_i} is 1 mod q_i and 0 elsewhere
      const Modulus& qi = ctx.q()[i];
      const u64 scale = qi.pow(2, static_cast<u64>(ctx.digit_bits()) * u);
      for (std::size_t j = 0; j < n; ++j) {
        k0[i * n + j] = qi.add(k0[i * n + j], qi.mul(scale, target[i * n + j]));
      }
      ksk.k0.push_back(std::move(k0));
      ksk.k1.push_back(std::move(a));
    }
  }
  return ksk;
}

// Key-switches a coefficient-domain polynomial c: returns (d0, d1) in the
// evaluation domain with d0 + d1 * s = c * target + small.
std::pair<RnsPoly, RnsPoly> key_switch(const HeContext& ctx, const RnsPoly& c_coeff,
                                       const KeySwitchKey& ksk) {
  const std::size_t n = ctx.n();
  const std::size_t k = ctx.q_count();
  const std::size_t digits = ctx.digits_per_prime();
  if (ksk.k0.size() != k * digits) throw ParamMismatch("key-switching key has wrong gadget size");
  const u64 mask = (u64{1} << ctx.digit_bits()) - 1;
  RnsPoly d0 = zero_poly(ctx);
  RnsPoly d1 = zero_poly(ctx);
  RnsPoly digit(k * n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t u = 0; u < digits; ++u) {
      const int shift = ctx.digit_bits() * static_cast<int>(u);
      for (std::size_t j = 0; j < n; ++j) {
        const u64 dg = (c_coeff[i * n + j] >> shift) & mask;
        for (std::size_t l = 0; l < k; ++l) digit[l * n + j] = dg;
      }
      to_eval(ctx, digit);
      fma_eval(ctx, d0, digit, ksk.k0[i * digits + u]);
      fma_eval(ctx, d1, digit, ksk.k1[i * digits + u]);
    }
  }
  return {std::move(d0), std::move(d1)};
}

void check_values(const HeContext& ctx, std::span<const u64> values) {
  if (values.size() > ctx.slot_count()) throw InvalidArgument("plaintext vector longer than slot count");
  const u64 t = ctx.t().value();
  for (u64 v : values) {
    if (v >= t) throw InvalidArgument("plaintext element out of range [0, t)");
  }
}

RingCiphertext like(const RingCiphertext& a) {
  RingCiphertext out;
  out.ctx = a.ctx;
  out.depth = a.depth;
  return out;
}

}  // namespace

Prng make_prng(const Seed& seed) {
  std::vector<std::uint32_t> words(seed.size() / 4);
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = static_cast<std::uint32_t>(seed[4 * i]) | static_cast<std::uint32_t>(seed[4 * i + 1]) << 8 |
               static_cast<std::uint32_t>(seed[4 * i + 2]) << 16 |
               static_cast<std::uint32_t>(seed[4 * i + 3]) << 24;
  }
  std::seed_seq seq(words.begin(), words.end());
  return Prng(seq);
}

Prng make_random_prng() {
  std::random_device rd;
  Seed s{};
  for (std::size_t i = 0; i < s.size(); i += 4) {
    auto v = rd();
    for (int b = 0; b < 4; ++b) s[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return make_prng(s);
}

RingKeys keygen(const ContextPtr& ctx_ptr, const Seed& seed) {
  const HeContext& ctx = *require_ctx(ctx_ptr);
  const std::size_t n = ctx.n();
  Prng prng = make_prng(seed);

  auto s_coeffs = sample_ternary(prng, n);
  RingKeys keys;
  keys.secret_key.ctx = ctx_ptr;
  keys.secret_key.ternary.resize(n);
  for (std::size_t j = 0; j < n; ++j) keys.secret_key.ternary[j] = static_cast<std::int8_t>(s_coeffs[j]);
  keys.secret_key.s = small_eval(ctx, s_coeffs);
  const RnsPoly& s = keys.secret_key.s;

  RnsPoly a = sample_uniform_eval(ctx, prng);
  auto e = sample_error(prng, n);
  RnsPoly p0 = small_eval(ctx, e);
  fma_eval(ctx, p0, a, s);
  negate_inplace(ctx, p0);
  keys.public_key = PublicKey{ctx_ptr, std::move(p0), std::move(a)};

  RnsPoly s2 = mul_eval(ctx, s, s);
  RnsPoly s_rot(s.size());
  const auto& perm = ctx.rotation_perm();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    for (std::size_t j = 0; j < n; ++j) s_rot[i * n + j] = s[i * n + perm[j]];
  }
  keys.eval_key.ctx = ctx_ptr;
  keys.eval_key.relin = make_ksk(ctx, s, s2, prng);
  keys.eval_key.rotation = make_ksk(ctx, s, s_rot, prng);
  keys.metadata = ctx.params().security_note;
  return keys;
}

Plaintext encode(const ContextPtr& ctx_ptr, std::span<const u64> values) {
  const HeContext& ctx = *require_ctx(ctx_ptr);
  check_values(ctx, values);
  Plaintext pt{ctx_ptr, std::vector<u64>(ctx.n(), 0)};
  const auto& map = ctx.slot_to_eval();
  for (std::size_t s = 0; s < values.size(); ++s) pt.coeffs[map[s]] = values[s];
  ctx.t_ntt().inverse(pt.coeffs);
  return pt;
}

PlaintextVec decode(const Plaintext& pt) {
  const HeContext& ctx = *require_ctx(pt.ctx);
  std::vector<u64> eval = pt.coeffs;
  ctx.t_ntt().forward(eval);
  PlaintextVec out(ctx.n());
  const auto& map = ctx.slot_to_eval();
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = eval[map[s]];
  return out;
}

RingCiphertext encrypt(const PublicKey& pk, std::span<const u64> values, Prng& prng) {
  const HeContext& ctx = *require_ctx(pk.ctx);
  const Plaintext pt = encode(pk.ctx, values);
  const std::size_t n = ctx.n();
  RnsPoly u = small_eval(ctx, sample_ternary(prng, n));
  RnsPoly c0 = small_eval(ctx, sample_error(prng, n));
  RnsPoly c1 = small_eval(ctx, sample_error(prng, n));
  fma_eval(ctx, c0, pk.p0, u);
  fma_eval(ctx, c1, pk.p1, u);
  add_inplace(ctx, c0, plain_scaled_eval(ctx, pt));
  RingCiphertext ct;
  ct.ctx = pk.ctx;
  ct.parts.push_back(std::move(c0));
  ct.parts.push_back(std::move(c1));
  return ct;
}

RingCiphertext encrypt(const PublicKey& pk, std::span<const u64> values) {
  thread_local Prng prng = make_random_prng();
  return encrypt(pk, values, prng);
}

namespace {

// c0 + c1 s (+ c2 s^2), coefficient domain.
RnsPoly phase(const SecretKey& sk, const RingCiphertext& ct) {
  const HeContext& ctx = *ct.ctx;
  if (ct.parts.size() < 2 || ct.parts.size() > 3) throw InvalidArgument("ciphertext must have 2 or 3 parts");
  RnsPoly v = ct.parts[0];
  fma_eval(ctx, v, ct.parts[1], sk.s);
  if (ct.parts.size() == 3) fma_eval(ctx, v, ct.parts[2], mul_eval(ctx, sk.s, sk.s));
  to_coeff(ctx, v);
  return v;
}

}  // namespace

PlaintextVec decrypt(const SecretKey& sk, const RingCiphertext& ct) {
  const HeContext& ctx = *require_ctx(ct.ctx);
  check_same(*require_ctx(sk.ctx), ctx);
  const std::size_t n = ctx.n();
  RnsPoly v = phase(sk, ct);
  const u64 t = ctx.t().value();
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const Modulus& q = ctx.q()[i];
    const u64 tq = q.reduce(t);
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = q.mul(v[i * n + j], tq);
  }
  // m = round(t v / q) = (t v - [t v]_q) / q, so m = -[t v]_q * q^-1 (mod t).
  std::vector<u64> x(n);
  ctx.q_to_t().convert(v.data(), x.data(), n);
  Plaintext pt{ct.ctx, std::vector<u64>(n)};
  const Modulus& tm = ctx.t();
  for (std::size_t j = 0; j < n; ++j) pt.coeffs[j] = tm.mul(tm.neg(x[j]), ctx.q_inv_mod_t());
  return decode(pt);
}

RingCiphertext add(const RingCiphertext& a, const RingCiphertext& b) {
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(b.ctx));
  RingCiphertext out = like(a);
  out.depth = std::max(a.depth, b.depth);
  const std::size_t parts = std::max(a.size(), b.size());
  for (std::size_t p = 0; p < parts; ++p) {
    RnsPoly v = p < a.size() ? a.parts[p] : zero_poly(ctx);
    if (p < b.size()) add_inplace(ctx, v, b.parts[p]);
    out.parts.push_back(std::move(v));
  }
  return out;
}

RingCiphertext negate(const RingCiphertext& a) {
  const HeContext& ctx = *require_ctx(a.ctx);
  RingCiphertext out = a;
  for (auto& p : out.parts) negate_inplace(ctx, p);
  return out;
}

RingCiphertext sub(const RingCiphertext& a, const RingCiphertext& b) { return add(a, negate(b)); }

RingCiphertext add_plain(const RingCiphertext& a, const Plaintext& pt) {
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(pt.ctx));
  RingCiphertext out = a;
  add_inplace(ctx, out.parts[0], plain_scaled_eval(ctx, pt));
  return out;
}

RingCiphertext add_plain(const RingCiphertext& a, std::span<const u64> v) {
  return add_plain(a, encode(a.ctx, v));
}

RingCiphertext sub_plain(const RingCiphertext& a, std::span<const u64> v) {
  const HeContext& ctx = *require_ctx(a.ctx);
  RingCiphertext out = a;
  sub_inplace(ctx, out.parts[0], plain_scaled_eval(ctx, encode(a.ctx, v)));
  return out;
}

RingCiphertext plain_sub(std::span<const u64> v, const RingCiphertext& a) {
  return add_plain(negate(a), v);
}

RingCiphertext mul_plain(const RingCiphertext& a, const Plaintext& pt) {
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(pt.ctx));
  const RnsPoly m = plain_centered_eval(ctx, pt);
  RingCiphertext out = like(a);
  for (const auto& p : a.parts) out.parts.push_back(mul_eval(ctx, p, m));
  return out;
}

RingCiphertext mul_plain(const RingCiphertext& a, std::span<const u64> v) {
  return mul_plain(a, encode(a.ctx, v));
}

void mul_plain_accumulate(RingCiphertext& acc, const RingCiphertext& a, const Plaintext& pt) {
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(pt.ctx));
  if (!acc.ctx) {
    acc.ctx = a.ctx;
    acc.depth = a.depth;
  }
  check_same(ctx, *acc.ctx);
  while (acc.parts.size() < a.parts.size()) acc.parts.push_back(zero_poly(ctx));
  acc.depth = std::max(acc.depth, a.depth);
  const RnsPoly m = plain_centered_eval(ctx, pt);
  for (std::size_t p = 0; p < a.parts.size(); ++p) fma_eval(ctx, acc.parts[p], a.parts[p], m);
}

RingCiphertext relinearize(const RingCiphertext& a, const EvaluationKey& evk) {
  if (a.size() == 2) return a;
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(evk.ctx));
  RnsPoly c2 = a.parts[2];
  to_coeff(ctx, c2);
  auto [d0, d1] = key_switch(ctx, c2, evk.relin);
  RingCiphertext out = like(a);
  out.parts = {a.parts[0], a.parts[1]};
  add_inplace(ctx, out.parts[0], d0);
  add_inplace(ctx, out.parts[1], d1);
  return out;
}

RingCiphertext mul(const RingCiphertext& a_in, const RingCiphertext& b_in, const EvaluationKey& evk) {
  const HeContext& ctx = *require_ctx(a_in.ctx);
  check_same(ctx, *require_ctx(b_in.ctx));
  check_same(ctx, *require_ctx(evk.ctx));
  const int depth = std::max(a_in.depth, b_in.depth) + 1;
  if (depth > ctx.params().depth_budget) {
    throw DepthExhausted("ciphertext product exceeds depth budget of " +
                         std::to_string(ctx.params().depth_budget));
  }
  const RingCiphertext a = relinearize(a_in, evk);
  const RingCiphertext b = &a_in == &b_in ? a : relinearize(b_in, evk);

  const std::size_t n = ctx.n();
  const std::size_t k = ctx.q_count();
  const std::size_t ka = ctx.aux().size();

  // Each input component in both bases, evaluation domain.
  auto extend = [&](const RnsPoly& eval_q) {
    RnsPoly coeff = eval_q;
    to_coeff(ctx, coeff);
    RnsPoly aux(ka * n);
    ctx.q_to_aux().convert(coeff.data(), aux.data(), n);
    for (std::size_t j = 0; j < ka; ++j) ctx.aux_ntt(j).forward({aux.data() + j * n, n});
    return aux;
  };
  const RnsPoly a0p = extend(a.parts[0]);
  const RnsPoly a1p = extend(a.parts[1]);
  const bool same = &a_in == &b_in;
  const RnsPoly b0p = same ? a0p : extend(b.parts[0]);
  const RnsPoly b1p = same ? a1p : extend(b.parts[1]);

  // Tensor product d0 = a0 b0, d1 = a0 b1 + a1 b0, d2 = a1 b1 in each base.
  std::array<RnsPoly, 3> dq;
  std::array<RnsPoly, 3> dp;
  for (auto& d : dq) d.assign(k * n, 0);
  for (auto& d : dp) d.assign(ka * n, 0);
  auto tensor = [n](const Modulus& m, const u64* x0, const u64* x1, const u64* y0, const u64* y1,
                    u64* d0, u64* d1, u64* d2) {
    for (std::size_t j = 0; j < n; ++j) {
      d0[j] = m.mul(x0[j], y0[j]);
      d1[j] = m.add(m.mul(x0[j], y1[j]), m.mul(x1[j], y0[j]));
      d2[j] = m.mul(x1[j], y1[j]);
    }
  };
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t o = i * n;
    tensor(ctx.q()[i], a.parts[0].data() + o, a.parts[1].data() + o, b.parts[0].data() + o,
           b.parts[1].data() + o, dq[0].data() + o, dq[1].data() + o, dq[2].data() + o);
  }
  for (std::size_t j = 0; j < ka; ++j) {
    const std::size_t o = j * n;
    tensor(ctx.aux()[j], a0p.data() + o, a1p.data() + o, b0p.data() + o, b1p.data() + o,
           dp[0].data() + o, dp[1].data() + o, dp[2].data() + o);
  }

  // Scale each component by t/q with rounding: r = (t d - [t d]_q) / q,
  // computed exactly in the auxiliary base and brought back to base q.
  const u64 t = ctx.t().value();
  std::array<RnsPoly, 3> r;
  RnsPoly xq(k * n);
  RnsPoly xp(ka * n);
  for (int c = 0; c < 3; ++c) {
    to_coeff(ctx, dq[c]);
    for (std::size_t j = 0; j < ka; ++j) ctx.aux_ntt(j).inverse({dp[c].data() + j * n, n});
    for (std::size_t i = 0; i < k; ++i) {
      const Modulus& q = ctx.q()[i];
      const u64 tq = q.reduce(t);
      for (std::size_t x = 0; x < n; ++x) xq[i * n + x] = q.mul(dq[c][i * n + x], tq);
    }
    ctx.q_to_aux().convert(xq.data(), xp.data(), n);
    RnsPoly rp(ka * n);
    for (std::size_t j = 0; j < ka; ++j) {
      const Modulus& p = ctx.aux()[j];
      const u64 tp = p.reduce(t);
      const u64 qinv = ctx.q_inv_mod_aux(j);
      for (std::size_t x = 0; x < n; ++x) {
        const u64 td = p.mul(dp[c][j * n + x], tp);
        rp[j * n + x] = p.mul(p.sub(td, xp[j * n + x]), qinv);
      }
    }
    r[c].assign(k * n, 0);
    ctx.aux_to_q().convert(rp.data(), r[c].data(), n);
  }

  auto [k0, k1] = key_switch(ctx, r[2], evk.relin);
  to_eval(ctx, r[0]);
  to_eval(ctx, r[1]);
  add_inplace(ctx, r[0], k0);
  add_inplace(ctx, r[1], k1);

  RingCiphertext out;
  out.ctx = a.ctx;
  out.depth = depth;
  out.parts.push_back(std::move(r[0]));
  out.parts.push_back(std::move(r[1]));
  return out;
}

RingCiphertext square(const RingCiphertext& a, const EvaluationKey& evk) { return mul(a, a, evk); }

RingCiphertext rotate_rows(const RingCiphertext& a, std::size_t steps, const EvaluationKey& evk) {
  const HeContext& ctx = *require_ctx(a.ctx);
  check_same(ctx, *require_ctx(evk.ctx));
  steps %= ctx.row_size();
  RingCiphertext cur = relinearize(a, evk);
  const std::size_t n = ctx.n();
  const auto& perm = ctx.rotation_perm();
  for (std::size_t s = 0; s < steps; ++s) {
    std::array<RnsPoly, 2> p;
    for (int c = 0; c < 2; ++c) {
      p[c].resize(cur.parts[c].size());
      for (std::size_t i = 0; i < ctx.q_count(); ++i) {
        const u64* src = cur.parts[c].data() + i * n;
        u64* dst = p[c].data() + i * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] = src[perm[j]];
      }
    }
    to_coeff(ctx, p[1]);
    auto [k0, k1] = key_switch(ctx, p[1], evk.rotation);
    add_inplace(ctx, p[0], k0);
    cur.parts[0] = std::move(p[0]);
    cur.parts[1] = std::move(k1);
  }
  return cur;
}

int noise_budget(const SecretKey& sk, const RingCiphertext& ct) {
  using boost::multiprecision::cpp_int;
  const HeContext& ctx = *require_ctx(ct.ctx);
  check_same(*require_ctx(sk.ctx), ctx);
  const std::size_t n = ctx.n();
  const std::size_t k = ctx.q_count();
  const RnsPoly v = phase(sk, ct);

  cpp_int q = 1;
  for (const auto& m : ctx.q()) q *= m.value();
  std::vector<cpp_int> basis(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& qi = ctx.q()[i];
    cpp_int punct = q / qi.value();
    const u64 punct_mod = static_cast<u64>(punct % qi.value());
    basis[i] = punct * qi.inv(punct_mod);
  }
  const cpp_int half = q / 2;
  const u64 t = ctx.t().value();
  cpp_int worst = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cpp_int x = 0;
    for (std::size_t i = 0; i < k; ++i) x += basis[i] * v[i * n + j];
    x = (x * t) % q;
    if (x > half) x = q - x;
    if (x > worst) worst = x;
  }
  if (worst == 0) return static_cast<int>(std::floor(ctx.log2_q())) - 1;
  const double log_worst = std::log2(worst.convert_to<double>());
  const double bits = ctx.log2_q() - 1.0 - log_worst;
  return bits <= 0 ? 0 : static_cast<int>(std::floor(bits));
}

}  // namespace hhefl::he
