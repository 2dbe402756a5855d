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


#include "hhefl/protocol/messages.hpp"

#include <type_traits>

#include "hhefl/error.hpp"

namespace hhefl::protocol {

namespace {

constexpr std::string_view kTagNames[] = {"KeyIssue",       "CertificateRequest", "Certificate",
                                          "InitModel",      "TrainRequest",       "ClientUpdate",
                                          "GlobalModel",    "EvalRequest",        "EvalReport"};

void put_u64s(ByteWriter& w, std::span<const u64> v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (u64 x : v) w.u64(x);
}

std::vector<u64> get_u64s(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 8) throw ParseError("vector length exceeds frame");
  std::vector<u64> v(n);
  for (auto& x : v) x = r.u64();
  return v;
}

template <typename T>
void put_opt(ByteWriter& w, const std::optional<T>& v, auto&& fn) {
  w.u8(v ? 1 : 0);
  if (v) fn(*v);
}

bool get_flag(ByteReader& r) {
  const std::uint8_t f = r.u8();
  if (f > 1) throw ParseError("bad presence flag");
  return f == 1;
}

void put_weights(ByteWriter& w, const fl::ModelWeights& m) {
  w.u32(static_cast<std::uint32_t>(m.shape.input));
  w.u32(static_cast<std::uint32_t>(m.shape.hidden));
  w.u32(static_cast<std::uint32_t>(m.shape.classes));
  w.u32(static_cast<std::uint32_t>(m.values.size()));
  for (double v : m.values) w.f64(v);
}

fl::ModelWeights get_weights(ByteReader& r) {
  fl::ModelWeights m;
  m.shape.input = r.u32();
  m.shape.hidden = r.u32();
  m.shape.classes = r.u32();
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 8 || n != m.shape.parameter_count()) throw ParseError("weight vector length mismatch");
  m.values.resize(n);
  for (double& v : m.values) v = r.f64();
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return m;
}

void encode_payload(ByteWriter& w, const WireContext& wc, const Payload& p) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KeyIssue>) {
          put_opt(w, m.he_pk, [&](const auto& v) { w.blob(he::serialize(v)); });
          put_opt(w, m.he_sk, [&](const auto& v) { w.blob(he::serialize(v)); });
          put_opt(w, m.he_eval, [&](const auto& v) { w.blob(he::serialize(v)); });
          put_opt(w, m.sym_key, [&](const auto& v) { put_u64s(w, v.elements); });
          w.u32(static_cast<std::uint32_t>(m.masks.size()));
          for (const auto& mask : m.masks) {
            w.u32(mask.owner);
            put_u64s(w, mask.elements);
          }
          put_opt(w, m.tpa_key, [&](const auto& v) {
            w.blob(v.modulus());
            w.blob(v.exponent());
          });
        } else if constexpr (std::is_same_v<T, CertificateRequest>) {
          w.blob(m.server_key.modulus());
          w.blob(m.server_key.exponent());
        } else if constexpr (std::is_same_v<T, CertificateMsg>) {
          w.blob(keyprot::serialize(m.cert));
        } else if constexpr (std::is_same_v<T, InitModel>) {
          put_weights(w, m.weights);
        } else if constexpr (std::is_same_v<T, ClientUpdateMsg>) {
          w.blob(cipher::serialize(wc.cipher, m.w_ske));
          w.blob(keyprot::serialize(m.protected_key));
          w.u64(m.n);
        } else if constexpr (std::is_same_v<T, GlobalModelMsg>) {
          w.u32(static_cast<std::uint32_t>(m.cts.size()));
          for (const auto& ct : m.cts) w.blob(he::serialize(ct));
          w.u64(m.n);
        } else if constexpr (std::is_same_v<T, EvalReport>) {
          w.f64(m.metrics.accuracy);
          w.f64(m.metrics.loss);
          w.u64(m.metrics.test_sample_count);
        }
        // TrainRequest and EvalRequest carry only the header.
      },
      p);
}

Payload decode_payload(ByteReader& r, const WireContext& wc, std::uint8_t tag) {
  switch (tag) {
    case 0: {
      KeyIssue m;
      if (get_flag(r)) m.he_pk = he::deserialize_public_key(wc.ctx, r.blob());
      if (get_flag(r)) m.he_sk = he::deserialize_secret_key(wc.ctx, r.blob());
      if (get_flag(r)) m.he_eval = he::deserialize_eval_key(wc.ctx, r.blob());
      if (get_flag(r)) m.sym_key = cipher::SymKey{get_u64s(r)};
      const std::uint32_t masks = r.u32();
      if (masks > r.remaining() / 8) throw ParseError("mask count exceeds frame");
      for (std::uint32_t i = 0; i < masks; ++i) {
        keyprot::Mask mask;
        mask.owner = r.u32();
        mask.elements = get_u64s(r);
        m.masks.push_back(std::move(mask));
      }
      if (get_flag(r)) {
        const Bytes n = r.blob();
        const Bytes e = r.blob();
        m.tpa_key = keyprot::RsaPublicKey::from_components(n, e);
      }
      return m;
    }
    case 1: {
      const Bytes n = r.blob();
      const Bytes e = r.blob();
      return CertificateRequest{keyprot::RsaPublicKey::from_components(n, e)};
    }
    case 2:
      return CertificateMsg{keyprot::deserialize_certificate(r.blob())};
    case 3:
      return InitModel{get_weights(r)};
    case 4:
      return TrainRequest{};
    case 5: {
      ClientUpdateMsg m;
      m.w_ske = cipher::deserialize_sym(wc.cipher, r.blob());
      m.protected_key = keyprot::deserialize_protected(wc.ctx, r.blob());
      m.n = r.u64();
      return m;
    }
    case 6: {
      GlobalModelMsg m;
      const std::uint32_t count = r.u32();
      if (count > r.remaining() / 4) throw ParseError("ciphertext count exceeds frame");
      for (std::uint32_t i = 0; i < count; ++i) m.cts.push_back(he::deserialize(wc.ctx, r.blob()));
      m.n = r.u64();
      return m;
    }
    case 7:
      return EvalRequest{};
    case 8: {
      EvalReport m;
      m.metrics.accuracy = r.f64();
      m.metrics.loss = r.f64();
      m.metrics.test_sample_count = r.u64();
      return m;
    }
    default:
      throw ParseError("unknown message tag " + std::to_string(tag));
  }
}

}  // namespace

std::uint8_t tag_of(const Payload& p) { return static_cast<std::uint8_t>(p.index()); }

std::string_view tag_name(std::uint8_t tag) {
  return tag < std::size(kTagNames) ? kTagNames[tag] : std::string_view("Unknown");
}

Bytes encode(const WireContext& wc, const Message& m) {
  ByteWriter body;
  body.u8(tag_of(m.payload));
  body.u32(m.header.sender);
  body.u32(m.header.recipient);
  body.u32(m.header.round);
  encode_payload(body, wc, m.payload);
  ByteWriter w(body.size() + 4);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(body.bytes());
  return std::move(w).take();
}

std::pair<Header, std::uint8_t> peek(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  const std::uint32_t len = r.u32();
  if (len != r.remaining()) throw ParseError("frame length mismatch");
  const std::uint8_t tag = r.u8();
  Header h;
  h.sender = r.u32();
  h.recipient = r.u32();
  h.round = r.u32();
  return {h, tag};
}

Message decode(const WireContext& wc, std::span<const std::uint8_t> frame) {
  const auto [header, tag] = peek(frame);
  ByteReader r(frame.subspan(4 + 1 + 12));
  try {
    Message m{header, decode_payload(r, wc, tag)};
    r.expect_end();
    return m;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("bad ") + std::string(tag_name(tag)) + " payload: " + e.what());
  }
}

}  // namespace hhefl::protocol
