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


#include "hhefl/adversary/adversary.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hhefl/cipher/hesd.hpp"
#include "hhefl/error.hpp"

namespace hhefl::adversary {

AdversaryKnowledge eve_knowledge(const protocol::Client& eve, const protocol::TranscriptLog& log,
                                 const protocol::WireContext& wire, const cipher::CipherParams& cipher) {
  AdversaryKnowledge k;
  k.eve = eve.id();
  k.he_pk = eve.he_pk();
  k.he_sk = eve.he_sk();
  k.own_key = eve.sym_key();
  k.own_mask = eve.mask();
  k.tap = log.tapped();
  k.wire = wire;
  k.cipher = cipher;
  return k;
}

protocol::ClientUpdateMsg intercept(const AdversaryKnowledge& k, PartyId victim, std::uint32_t round) {
  const auto update_tag = protocol::tag_of(protocol::Payload{protocol::ClientUpdateMsg{}});
  for (const auto& e : k.tap) {
    if (e.tag == update_tag && e.header.sender == victim && e.header.round == round) {
      return std::get<protocol::ClientUpdateMsg>(protocol::decode(k.wire, e.frame).payload);
    }
  }
  throw InvalidArgument("no update from client " + std::to_string(victim) + " in round " + std::to_string(round));
}

AttackOutcome attack(const protocol::ClientUpdateMsg& update, const AdversaryKnowledge& k) {
  AttackOutcome out;
  out.mode = keyprot::mode_of(update.protected_key);
  const he::RingCiphertext* ct = nullptr;
  if (const auto* b = std::get_if<keyprot::BaselineKey>(&update.protected_key)) ct = &b->ct;
  if (const auto* m = std::get_if<keyprot::MaskedKey>(&update.protected_key)) ct = &m->ct;
  if (!ct) {
    out.note = "RSA-wrapped key: no decryption path without the server's RSA key";
    return out;
  }
  try {
    const he::PlaintextVec slots = he::decrypt(k.he_sk, *ct);
    cipher::SymKey key{{slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(k.cipher.key_len)}};
    out.recovered_weights = cipher::sym_decrypt(k.cipher, key, update.w_ske);
    out.recovered_key = std::move(key);
    out.note = out.mode == keyprot::Mode::kBaseline ? "decrypted the key ciphertext with the shared HE key"
                                                    : "decrypted to key + unknown mask";
  } catch (const Error& e) {
    out.note = std::string("decryption failed: ") + e.what();
  }
  return out;
}

void judge(AttackOutcome& outcome, const cipher::SymKey& true_key) {
  outcome.success = outcome.recovered_key && outcome.recovered_key->elements == true_key.elements;
}

double chi_square_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::array<double, 256> ha{}, hb{};
  for (auto v : a) ha[v] += 1;
  for (auto v : b) hb[v] += 1;
  const double ka = std::sqrt(static_cast<double>(b.size()) / static_cast<double>(a.size()));
  const double kb = 1.0 / ka;
  double stat = 0;
  for (int i = 0; i < 256; ++i) {
    if (ha[i] + hb[i] == 0) continue;
    const double d = ka * ha[i] - kb * hb[i];
    stat += d * d / (ha[i] + hb[i]);
  }
  return stat;
}

namespace {

// What goes on the wire for a given key vector under each mode.
struct Protector {
  keyprot::Mode mode;
  cipher::CipherParams params;
  he::PublicKey pk;
  std::optional<keyprot::ServerCertificate> cert;
  std::optional<keyprot::RsaPublicKey> tpa_pub;

  keyprot::ProtectedKey protect(const cipher::SymKey& key, he::Prng& prng) const {
    switch (mode) {
      case keyprot::Mode::kBaseline:
        return keyprot::protect_baseline(params, key, pk);
      case keyprot::Mode::kMasking:
        return keyprot::protect_masked(params, key, keyprot::random_mask(params, 0, prng), pk);
      case keyprot::Mode::kRsaWrapping: {
        const auto base = keyprot::protect_baseline(params, key, pk);
        return keyprot::rsa_wrap(he::serialize(std::get<keyprot::BaselineKey>(base).ct), *cert, *tpa_pub);
      }
    }
    throw InvalidArgument("unknown mode");
  }

  // Enc_HE of the key vector with no mask, in the same wire form.
  keyprot::ProtectedKey unmasked_like(const cipher::SymKey& key, he::Prng& prng) const {
    if (mode != keyprot::Mode::kMasking) return protect(key, prng);
    auto base = keyprot::protect_baseline(params, key, pk);
    return keyprot::MaskedKey{std::move(std::get<keyprot::BaselineKey>(base).ct)};
  }
};

// Wire bytes without the variant tag, so only the payload is compared.
Bytes payload_bytes(const keyprot::ProtectedKey& k) {
  Bytes b = keyprot::serialize(k);
  return {b.begin() + 1, b.end()};
}

bool looks_real(const AdversaryKnowledge& k, const protocol::ClientUpdateMsg& u, const fl::QuantParams& qp) {
  const AttackOutcome o = attack(u, k);
  if (!o.recovered_weights) return false;
  const auto limit = static_cast<std::int64_t>(qp.max_level());
  return std::all_of(o.recovered_weights->begin(), o.recovered_weights->end(),
                     [&](u64 v) { return std::llabs(fl::centered(v, qp.modulus)) <= limit; });
}

}  // namespace

ProbeResult distinguishability_probe(keyprot::Mode mode, std::size_t trials, std::uint64_t seed,
                                     std::size_t poly_degree, int rsa_bits) {
  if (trials == 0) throw InvalidArgument("need at least one trial");
  const auto ctx = he::HeContext::create(he::HeParams::desk_default(poly_degree));
  const he::RingKeys keys = he::keygen(ctx, derive_seed(seed_from_u64(seed), "probe-keys"));
  Protector prot{mode, cipher::CipherParams::defaults(), keys.public_key, std::nullopt, std::nullopt};
  if (mode == keyprot::Mode::kRsaWrapping) {
    const auto tpa = keyprot::RsaPrivateKey::generate(rsa_bits);
    const auto server = keyprot::RsaPrivateKey::generate(rsa_bits);
    prot.cert = keyprot::issue_certificate(tpa, server.public_key());
    prot.tpa_pub = tpa.public_key();
  }
  const fl::QuantParams qp = fl::QuantParams::for_bound(ctx->t().value(), 5.0, 8);
  he::Prng prng = he::make_prng(derive_seed(seed_from_u64(seed), "probe"));

  AdversaryKnowledge k;
  k.he_pk = keys.public_key;
  k.he_sk = keys.secret_key;
  k.cipher = prot.params;

  ProbeResult r;
  r.mode = mode;
  r.trials = trials;
  double calibration_max = 0;
  std::size_t real_says_real = 0, random_says_real = 0;
  std::uniform_real_distribution<double> w(-5.0, 5.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const cipher::SymKey sk = cipher::random_sym_key(prot.params, prng);
    const cipher::SymKey decoy = cipher::random_sym_key(prot.params, prng);
    const cipher::SymKey decoy2 = cipher::random_sym_key(prot.params, prng);

    const keyprot::ProtectedKey real = prot.protect(sk, prng);
    const keyprot::ProtectedKey fake = prot.unmasked_like(decoy, prng);
    const keyprot::ProtectedKey fake2 = prot.unmasked_like(decoy2, prng);
    const Bytes a = payload_bytes(real), b = payload_bytes(fake), c = payload_bytes(fake2);
    r.lengths_equal = r.lengths_equal && a.size() == b.size();
    r.max_statistic = std::max(r.max_statistic, chi_square_bytes(a, b));
    calibration_max = std::max(calibration_max, chi_square_bytes(b, c));

    // a known update under the real key, presented with either key blob
    std::vector<u64> q(64);
    for (auto& v : q) {
      const auto level = static_cast<std::int64_t>(std::round(w(prng) * static_cast<double>(qp.scale)));
      v = level >= 0 ? static_cast<u64>(level) : qp.modulus - static_cast<u64>(-level);
    }
    const auto w_ske = cipher::sym_encrypt(prot.params, sk, cipher::random_nonce(prng), q);
    if (looks_real(k, {w_ske, real, 1}, qp)) ++real_says_real;
    if (looks_real(k, {w_ske, fake, 1}, qp)) ++random_says_real;
  }
  r.threshold = 1.25 * calibration_max;
  r.key_aware_advantage =
      std::abs(static_cast<double>(real_says_real) - static_cast<double>(random_says_real)) / static_cast<double>(trials);
  r.distinguishable = !r.lengths_equal || r.max_statistic > r.threshold || r.key_aware_advantage > 0.5;
  return r;
}

}  // namespace hhefl::adversary
