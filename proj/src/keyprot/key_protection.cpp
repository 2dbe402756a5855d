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


#include "hhefl/keyprot/key_protection.hpp"

#include <random>

#include "hhefl/cipher/hesd.hpp"
#include "hhefl/error.hpp"

namespace hhefl::keyprot {

namespace {

constexpr std::size_t kHashLen = 32;

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kBaseline:
      return "baseline";
    case Mode::kMasking:
      return "masking";
    case Mode::kRsaWrapping:
      return "rsa";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::kBaseline;
  if (s == "masking" || s == "masked") return Mode::kMasking;
  if (s == "rsa" || s == "rsa_wrapping" || s == "rsawrapping") return Mode::kRsaWrapping;
  throw InvalidParams("unknown key-protection mode: " + std::string(s));
}

Mask random_mask(const cipher::CipherParams& params, std::uint32_t owner, he::Prng& prng) {
  std::uniform_int_distribution<u64> dist(0, params.modulus - 1);
  Mask m;
  m.owner = owner;
  m.elements.resize(params.key_len);
  for (auto& v : m.elements) v = dist(prng);
  return m;
}

Mode mode_of(const ProtectedKey& k) {
  if (std::holds_alternative<BaselineKey>(k)) return Mode::kBaseline;
  if (std::holds_alternative<MaskedKey>(k)) return Mode::kMasking;
  return Mode::kRsaWrapping;
}

ProtectedKey protect_baseline(const cipher::CipherParams& params, const cipher::SymKey& sk,
                              const he::PublicKey& pk) {
  return BaselineKey{cipher::encrypt_key(pk, params, sk)};
}

ProtectedKey protect_masked(const cipher::CipherParams& params, const cipher::SymKey& sk, const Mask& mask,
                            const he::PublicKey& pk) {
  cipher::validate_key(params, sk);
  if (mask.elements.size() != sk.elements.size()) throw InvalidArgument("mask and key lengths differ");
  cipher::SymKey blinded;
  blinded.elements.resize(sk.elements.size());
  for (std::size_t i = 0; i < sk.elements.size(); ++i) {
    if (mask.elements[i] >= params.modulus) throw InvalidArgument("mask element out of range");
    blinded.elements[i] = (sk.elements[i] + mask.elements[i]) % params.modulus;
  }
  return MaskedKey{cipher::encrypt_key(pk, params, blinded)};
}

he::RingCiphertext unmask(const cipher::CipherParams& params, const MaskedKey& key, const Mask& mask) {
  if (mask.elements.size() != params.key_len) throw InvalidArgument("mask has wrong length");
  return he::sub_plain(key.ct, cipher::key_layout(*key.ct.ctx, params, mask.elements));
}

std::size_t max_plaintext_size(int modulus_bits) {
  const std::size_t k = static_cast<std::size_t>((modulus_bits + 7) / 8);
  if (k <= 2 * kHashLen + 2) throw InvalidParams("RSA modulus too small for OAEP/SHA-256");
  return k - 2 * kHashLen - 2;
}

std::size_t chunk_count(std::size_t input_bytes, int modulus_bits) {
  const std::size_t m = max_plaintext_size(modulus_bits);
  return (input_bytes + m - 1) / m;
}

RsaPublicKey ServerCertificate::public_key() const { return RsaPublicKey::from_components(modulus, exponent); }

Bytes ServerCertificate::signed_payload() const {
  ByteWriter w;
  w.blob(modulus);
  w.blob(exponent);
  return std::move(w).take();
}

ServerCertificate issue_certificate(const RsaPrivateKey& tpa_signing_key, const RsaPublicKey& server_key) {
  ServerCertificate cert;
  cert.modulus = server_key.modulus();
  cert.exponent = server_key.exponent();
  cert.tpa_signature = tpa_signing_key.pss_sign(cert.signed_payload());
  return cert;
}

bool verify_certificate(const RsaPublicKey& tpa_verifying_key, const ServerCertificate& cert) {
  if (cert.modulus.empty() || cert.exponent.empty() || cert.tpa_signature.empty()) return false;
  return tpa_verifying_key.pss_verify(cert.signed_payload(), cert.tpa_signature);
}

ProtectedKey rsa_wrap(std::span<const std::uint8_t> sk_he_bytes, const ServerCertificate& cert,
                      const RsaPublicKey& tpa_verifying_key) {
  if (sk_he_bytes.empty()) throw InvalidArgument("nothing to wrap");
  if (!verify_certificate(tpa_verifying_key, cert)) throw IntegrityError("server certificate does not verify");
  const RsaPublicKey server = cert.public_key();
  return RsaWrappedKey{server.oaep_encrypt_chunks(sk_he_bytes, max_plaintext_size(server.bits()))};
}

Bytes rsa_unwrap(const RsaWrappedKey& key, const RsaPrivateKey& rsa_sk) {
  if (key.chunks.empty()) throw IntegrityError("no chunks to unwrap");
  OaepDecryptor dec(rsa_sk);
  Bytes out;
  for (std::size_t i = 0; i < key.chunks.size(); ++i) {
    const Bytes part = dec.decrypt(key.chunks[i], chunk_label(i, key.chunks.size()));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Bytes serialize(const ProtectedKey& k) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(k.index()));
  if (const auto* b = std::get_if<BaselineKey>(&k)) {
    w.raw(he::serialize(b->ct));
  } else if (const auto* m = std::get_if<MaskedKey>(&k)) {
    w.raw(he::serialize(m->ct));
  } else {
    const auto& r = std::get<RsaWrappedKey>(k);
    w.u32(static_cast<std::uint32_t>(r.chunks.size()));
    for (const auto& c : r.chunks) w.blob(c);
  }
  return std::move(w).take();
}

ProtectedKey deserialize_protected(const he::ContextPtr& ctx, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::uint8_t tag = r.u8();
  const auto rest = bytes.subspan(1);
  switch (tag) {
    case 0:
      return BaselineKey{he::deserialize(ctx, rest)};
    case 1:
      return MaskedKey{he::deserialize(ctx, rest)};
    case 2: {
      RsaWrappedKey k;
      const std::uint32_t count = r.u32();
      if (count > r.remaining() / 4) throw ParseError("chunk count exceeds input");
      k.chunks.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) k.chunks.push_back(r.blob());
      r.expect_end();
      return k;
    }
    default:
      throw ParseError("unknown protected-key tag");
  }
}

Bytes serialize(const ServerCertificate& cert) {
  ByteWriter w;
  w.blob(cert.modulus);
  w.blob(cert.exponent);
  w.blob(cert.tpa_signature);
  return std::move(w).take();
}

ServerCertificate deserialize_certificate(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ServerCertificate c;
  c.modulus = r.blob();
  c.exponent = r.blob();
  c.tpa_signature = r.blob();
  r.expect_end();
  return c;
}

}  // namespace hhefl::keyprot
