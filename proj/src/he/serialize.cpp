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

#include <array>
#include <cstring>

#include "hhefl/error.hpp"
#include "hhefl/he/ring_he.hpp"

namespace hhefl::he {

namespace {

using Magic = std::array<char, 4>;
constexpr Magic kCiphertextMagic = {'H', 'R', 'C', 'T'};
constexpr Magic kPublicKeyMagic = {'H', 'R', 'P', 'K'};
constexpr Magic kSecretKeyMagic = {'H', 'R', 'S', 'K'};
constexpr Magic kEvalKeyMagic = {'H', 'R', 'E', 'K'};
constexpr std::size_t kHeaderSize = 16;

void write_header(ByteWriter& w, const Magic& magic, const HeContext& ctx, std::uint8_t a,
                  std::uint8_t b) {
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u64(ctx.params_hash());
  w.u8(a);
  w.u8(b);
  w.u8(0);
  w.u8(0);
}

struct Header {
  std::uint8_t a;
  std::uint8_t b;
};

Header read_header(ByteReader& r, const Magic& magic, const HeContext& ctx) {
  auto m = r.raw(4);
  if (std::memcmp(m.data(), magic.data(), 4) != 0) throw ParseError("bad magic");
  if (r.u64() != ctx.params_hash()) throw ParseError("parameter hash mismatch");
  Header h{r.u8(), r.u8()};
  if (r.u8() != 0 || r.u8() != 0) throw ParseError("reserved header bytes must be zero");
  return h;
}

void write_poly(ByteWriter& w, const HeContext& ctx, const RnsPoly& p, bool to_coeff_domain) {
  RnsPoly c = p;
  if (to_coeff_domain) {
    for (std::size_t i = 0; i < ctx.q_count(); ++i) ctx.q_ntt(i).inverse({c.data() + i * ctx.n(), ctx.n()});
  }
  for (u64 v : c) w.u64(v);
}

RnsPoly read_poly(ByteReader& r, const HeContext& ctx, bool from_coeff_domain) {
  const std::size_t n = ctx.n();
  RnsPoly p(ctx.q_count() * n);
  for (std::size_t i = 0; i < ctx.q_count(); ++i) {
    const u64 q = ctx.q()[i].value();
    for (std::size_t j = 0; j < n; ++j) {
      const u64 v = r.u64();
      if (v >= q) throw ParseError("residue out of range");
      p[i * n + j] = v;
    }
    if (from_coeff_domain) ctx.q_ntt(i).forward({p.data() + i * n, n});
  }
  return p;
}

}  // namespace

std::size_t serialized_size(const HeContext& ctx, std::size_t components) {
  return kHeaderSize + components * ctx.q_count() * ctx.n() * sizeof(u64);
}

Bytes serialize(const RingCiphertext& ct) {
  if (!ct.ctx) throw InvalidArgument("ciphertext has no context");
  const HeContext& ctx = *ct.ctx;
  ByteWriter w(serialized_size(ctx, ct.size()));
  write_header(w, kCiphertextMagic, ctx, static_cast<std::uint8_t>(ct.size()),
               static_cast<std::uint8_t>(ct.depth));
  for (const auto& p : ct.parts) write_poly(w, ctx, p, true);
  return std::move(w).take();
}

RingCiphertext deserialize(const ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  if (!ctx) throw InvalidArgument("no context");
  ByteReader r(bytes);
  const Header h = read_header(r, kCiphertextMagic, *ctx);
  if (h.a != 2 && h.a != 3) throw ParseError("ciphertext component count must be 2 or 3");
  if (bytes.size() != serialized_size(*ctx, h.a)) throw ParseError("ciphertext length mismatch");
  RingCiphertext ct;
  ct.ctx = ctx;
  ct.depth = h.b;
  for (int c = 0; c < h.a; ++c) ct.parts.push_back(read_poly(r, *ctx, true));
  r.expect_end();
  return ct;
}

Bytes serialize(const PublicKey& pk) {
  const HeContext& ctx = *pk.ctx;
  ByteWriter w(serialized_size(ctx, 2));
  write_header(w, kPublicKeyMagic, ctx, 2, 0);
  write_poly(w, ctx, pk.p0, true);
  write_poly(w, ctx, pk.p1, true);
  return std::move(w).take();
}

PublicKey deserialize_public_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, kPublicKeyMagic, *ctx);
  PublicKey pk{ctx, read_poly(r, *ctx, true), read_poly(r, *ctx, true)};
  r.expect_end();
  return pk;
}

Bytes serialize(const SecretKey& sk) {
  const HeContext& ctx = *sk.ctx;
  ByteWriter w;
  write_header(w, kSecretKeyMagic, ctx, 1, 0);
  for (auto v : sk.ternary) w.u8(static_cast<std::uint8_t>(v));
  return std::move(w).take();
}

SecretKey deserialize_secret_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, kSecretKeyMagic, *ctx);
  const std::size_t n = ctx->n();
  SecretKey sk;
  sk.ctx = ctx;
  sk.ternary.resize(n);
  RnsPoly s(ctx->q_count() * n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto v = static_cast<std::int8_t>(r.u8());
    if (v < -1 || v > 1) throw ParseError("secret key coefficient not ternary");
    sk.ternary[j] = v;
  }
  r.expect_end();
  for (std::size_t i = 0; i < ctx->q_count(); ++i) {
    for (std::size_t j = 0; j < n; ++j) s[i * n + j] = ctx->q()[i].from_signed(sk.ternary[j]);
    ctx->q_ntt(i).forward({s.data() + i * n, n});
  }
  sk.s = std::move(s);
  return sk;
}

// Evaluation keys are stored in the evaluation domain as-is.
Bytes serialize(const EvaluationKey& evk) {
  const HeContext& ctx = *evk.ctx;
  ByteWriter w;
  write_header(w, kEvalKeyMagic, ctx, static_cast<std::uint8_t>(ctx.gadget_size()), 2);
  for (const KeySwitchKey* ksk : {&evk.relin, &evk.rotation}) {
    for (std::size_t g = 0; g < ksk->k0.size(); ++g) {
      write_poly(w, ctx, ksk->k0[g], false);
      write_poly(w, ctx, ksk->k1[g], false);
    }
  }
  return std::move(w).take();
}

EvaluationKey deserialize_eval_key(const ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const Header h = read_header(r, kEvalKeyMagic, *ctx);
  if (h.a != ctx->gadget_size() || h.b != 2) throw ParseError("evaluation key shape mismatch");
  EvaluationKey evk;
  evk.ctx = ctx;
  for (KeySwitchKey* ksk : {&evk.relin, &evk.rotation}) {
    for (std::size_t g = 0; g < ctx->gadget_size(); ++g) {
      ksk->k0.push_back(read_poly(r, *ctx, false));
      ksk->k1.push_back(read_poly(r, *ctx, false));
    }
  }
  r.expect_end();
  return evk;
}

}  // namespace hhefl::he
