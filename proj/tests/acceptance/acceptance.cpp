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


// Acceptance run. One PASS/FAIL line per criterion; exit status 1 if any
// fails. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hhefl/adversary/adversary.hpp"
#include "hhefl/cipher/hesd.hpp"
#include "hhefl/error.hpp"
#include "hhefl/fl/aggregate.hpp"
#include "hhefl/keyprot/key_protection.hpp"
#include "hhefl/protocol/experiment.hpp"

namespace {

using namespace hhefl;
using he::u64;
using keyprot::Mode;
using protocol::PartyId;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::array<Mode, 3> kModes = {Mode::kBaseline, Mode::kMasking, Mode::kRsaWrapping};

// Shared N=4096 keys for the primitive-level checks.
struct Ring {
  he::ContextPtr ctx = he::HeContext::create(he::HeParams::desk_default());
  he::RingKeys keys = he::keygen(ctx, seed_from_u64(2026));
  cipher::CipherParams cp = cipher::CipherParams::defaults();
};

Ring& ring() {
  static Ring r;
  return r;
}

// The three full runs on the digits configuration, kept alive for the
// attack, learning and cost checks.
struct Runs {
  std::vector<std::unique_ptr<protocol::Simulation>> sims;
  std::vector<protocol::ExperimentResult> results;
  std::vector<double> seconds;
};

protocol::ExperimentConfig digits_config() {
  return protocol::load_config(std::string(HHEFL_SOURCE_DIR) + "/configs/default.toml");
}

Runs& runs() {
  static Runs r = [] {
    Runs out;
    for (Mode m : kModes) {
      auto cfg = digits_config();
      cfg.mode = m;
      const auto t0 = Clock::now();
      out.sims.push_back(std::make_unique<protocol::Simulation>(cfg));
      out.results.push_back(out.sims.back()->run());
      out.seconds.push_back(since(t0));
      std::printf("  .. %s run: %.1f s, final accuracy %.4f\n", std::string(keyprot::to_string(m)).c_str(),
                  out.seconds.back(), out.results.back().reports.back().metrics.accuracy);
      std::fflush(stdout);
    }
    return out;
  }();
  return r;
}

const protocol::ExperimentResult& run_of(Mode m) {
  return runs().results[static_cast<std::size_t>(std::find(kModes.begin(), kModes.end(), m) - kModes.begin())];
}
protocol::Simulation& sim_of(Mode m) {
  return *runs().sims[static_cast<std::size_t>(std::find(kModes.begin(), kModes.end(), m) - kModes.begin())];
}

Verdict oaep_capacity() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<int, std::size_t>> table = {{1024, 62}, {2048, 190}, {3072, 318}, {4096, 446}};
  bool ok = true;
  std::string got;
  for (auto [bits, want] : table) {
    const std::size_t have = keyprot::max_plaintext_size(bits);
    ok = ok && have == want;
    got += fmt("%d->%zu ", bits, have);
  }
  // the live key agrees at the boundary
  const auto key = keyprot::RsaPrivateKey::generate(1024);
  Bytes fits(62, 0xAB), over(63, 0xAB);
  const bool boundary = key.oaep_decrypt(key.public_key().oaep_encrypt(fits, {})) == fits;
  bool rejected = false;
  try {
    key.public_key().oaep_encrypt(over, {});
  } catch (const Error&) {
    rejected = true;
  }
  const double s = since(t0);
  ok = ok && boundary && rejected && s < 1.0;
  return {ok, got + fmt("(62 B fits, 63 B %s; %.3f s)", rejected ? "rejected" : "ACCEPTED", s)};
}

Verdict hesd_exact() {
  Ring& r = ring();
  std::mt19937_64 rng(101);
  he::Prng prng = he::make_prng(seed_from_u64(102));
  const auto t0 = Clock::now();
  int good = 0;
  for (int i = 0; i < 100; ++i) {
    const auto key = cipher::random_sym_key(r.cp, prng);
    const std::size_t len = 1 + rng() % 512;
    std::vector<u64> msg(len);
    for (auto& v : msg) v = rng() % r.cp.modulus;
    const auto ct = cipher::sym_encrypt(r.cp, key, cipher::random_nonce(prng), msg);
    const auto enc_key = cipher::encrypt_key(r.keys.public_key, r.cp, key);
    const auto out = cipher::hesd(r.cp, enc_key, r.keys.eval_key, ct);
    if (cipher::decrypt_transciphered(r.keys.secret_key, out, len) == msg) ++good;
  }
  const double s = since(t0);
  return {good == 100 && s < 300, fmt("%d/100 exact (N=%zu, %.1f s)", good, r.ctx->n(), s)};
}

Verdict masking_exact() {
  Ring& r = ring();
  he::Prng prng = he::make_prng(seed_from_u64(201));
  int good = 0;
  for (int i = 0; i < 100; ++i) {
    const auto key = cipher::random_sym_key(r.cp, prng);
    const auto mask = keyprot::random_mask(r.cp, static_cast<std::uint32_t>(i), prng);
    const auto prot = keyprot::protect_masked(r.cp, key, mask, r.keys.public_key);
    const auto ct = keyprot::unmask(r.cp, std::get<keyprot::MaskedKey>(prot), mask);
    if (he::decrypt(r.keys.secret_key, ct) == cipher::key_layout(*r.ctx, r.cp, key.elements)) ++good;
  }
  return {good == 100, fmt("%d/100 pairs decrypt to the key", good)};
}

Verdict rsa_roundtrip() {
  Ring& r = ring();
  he::Prng prng = he::make_prng(seed_from_u64(301));
  std::mt19937_64 rng(302);
  const auto tpa = keyprot::RsaPrivateKey::generate(2048);
  const std::vector<int> sizes = {1024, 2048, 3072, 4096};
  std::vector<keyprot::RsaPrivateKey> servers;
  std::vector<keyprot::ServerCertificate> certs;
  for (int b : sizes) {
    servers.push_back(keyprot::RsaPrivateKey::generate(b));
    certs.push_back(keyprot::issue_certificate(tpa, servers.back().public_key()));
  }
  int exact = 0, rejected = 0, tampers = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = static_cast<std::size_t>(i) % sizes.size();
    const auto key = cipher::random_sym_key(r.cp, prng);
    const Bytes ser = he::serialize(cipher::encrypt_key(r.keys.public_key, r.cp, key));
    const auto wrapped = std::get<keyprot::RsaWrappedKey>(keyprot::rsa_wrap(ser, certs[k], tpa.public_key()));
    if (wrapped.chunks.size() == keyprot::chunk_count(ser.size(), sizes[k]) &&
        keyprot::rsa_unwrap(wrapped, servers[k]) == ser) {
      ++exact;
    }
    // one flipped byte inside a chunk
    auto bad = wrapped;
    auto& chunk = bad.chunks[rng() % bad.chunks.size()];
    chunk[rng() % chunk.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    ++tampers;
    try {
      keyprot::rsa_unwrap(bad, servers[k]);
    } catch (const IntegrityError&) {
      ++rejected;
    }
    // one flipped byte anywhere in the serialized form
    Bytes wire = keyprot::serialize(keyprot::ProtectedKey{wrapped});
    wire[rng() % wire.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    ++tampers;
    try {
      const auto back = keyprot::deserialize_protected(r.ctx, wire);
      const auto* w = std::get_if<keyprot::RsaWrappedKey>(&back);
      if (w == nullptr) throw ParseError("variant changed");
      keyprot::rsa_unwrap(*w, servers[k]);
    } catch (const Error&) {
      ++rejected;
    }
  }
  return {exact == 20 && rejected == tampers,
          fmt("%d/20 bit-exact (%zu B inputs, 1024..4096 bit), %d/%d tampered inputs rejected", exact,
              he::serialized_size(*r.ctx, 2), rejected, tampers)};
}

std::vector<he::RingCiphertext> encrypt_vec(const he::PublicKey& pk, const std::vector<u64>& v, he::Prng& prng) {
  std::vector<he::RingCiphertext> out;
  const std::size_t n = pk.ctx->slot_count();
  for (std::size_t off = 0; off < v.size(); off += n) {
    out.push_back(he::encrypt(pk, std::span(v).subspan(off, std::min(n, v.size() - off)), prng));
  }
  return out;
}

Verdict aggregation_match() {
  Ring& r = ring();
  const fl::ModelShape shape{64, 106, 10};
  const fl::QuantParams qp = fl::QuantParams::for_bound(r.cp.modulus, 5.0, 8);
  const double tol = 1.0 / (2.0 * static_cast<double>(qp.scale));
  std::mt19937_64 rng(501);
  he::Prng prng = he::make_prng(seed_from_u64(502));
  std::uniform_real_distribution<double> w(-6.0, 6.0);
  int good = 0;
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    std::vector<fl::PlainUpdate> plain;
    std::vector<fl::EncryptedUpdate> enc;
    for (int c = 0; c < 4; ++c) {
      fl::ModelWeights m{shape, std::vector<double>(shape.parameter_count())};
      for (auto& v : m.values) v = w(rng);
      const fl::SampleCount n = 1 + rng() % 2;
      plain.push_back({fl::clip(m, qp.clip_range), n});
      enc.push_back({encrypt_vec(r.keys.public_key, fl::quantize(m, qp), prng), n});
    }
    const auto got = fl::decrypt_aggregate(r.keys.secret_key, fl::fedavg_encrypted(enc, qp), qp, shape);
    const auto want = fl::fedavg_plain(plain);
    double err = 0;
    for (std::size_t j = 0; j < want.values.size(); ++j) err = std::max(err, std::abs(got.values[j] - want.values[j]));
    worst = std::max(worst, err);
    if (err <= tol) ++good;
  }
  return {good == 20, fmt("%d/20 within 1/(2S)=%.3g (S=%llu, worst %.3g, %zu params)", good, tol,
                          static_cast<unsigned long long>(qp.scale), worst, shape.parameter_count())};
}

Verdict mode_transparency() {
  Runs& r = runs();
  const auto& base = r.results.front();
  int identical = 0;
  std::size_t excluded = 0;
  const std::size_t rounds = base.global_models.size();
  for (std::size_t k = 0; k < rounds; ++k) {
    bool same = true;
    for (const auto& res : r.results) {
      same = same && res.global_models.size() == rounds && res.global_models[k] == base.global_models[k] &&
             res.reports[k].model_digest == base.reports[k].model_digest;
      excluded += res.reports[k].excluded.size();
    }
    if (same) ++identical;
  }
  const auto& cfg = base.config;
  const bool shape_ok = rounds == 10 && cfg.clients == 12 && cfg.clients_per_round == 4;
  return {shape_ok && identical == static_cast<int>(rounds) && rounds > 0 && excluded == 0,
          fmt("%d/%zu rounds bit-identical across 3 modes (%zu clients, %zu per round, %zu exclusions, %.0f/%.0f/%.0f s)",
              identical, rounds, cfg.clients, cfg.clients_per_round, excluded, r.seconds[0], r.seconds[1],
              r.seconds[2])};
}

Verdict threat_model() {
  const PartyId eve = 0;
  std::string detail;
  bool ok = true;
  for (Mode m : kModes) {
    auto& sim = sim_of(m);
    const auto& res = run_of(m);
    const auto k = adversary::eve_knowledge(sim.client(eve), *sim.transcript(), sim.transport().wire(),
                                            sim.params().cipher);
    int trials = 0, wins = 0;
    for (const auto& rep : res.reports) {
      for (PartyId v : rep.training) {
        if (v == eve || trials == 20) continue;
        ++trials;
        const auto& victim = sim.client(v);
        const auto sent = std::find_if(victim.sent().begin(), victim.sent().end(),
                                       [&](const auto& s) { return s.round == rep.round; });
        auto o = adversary::attack(adversary::intercept(k, v, rep.round), k);
        adversary::judge(o, victim.sym_key());
        const bool exact = o.recovered_weights && sent != victim.sent().end() && *o.recovered_weights == sent->quantized;
        const bool key_match = o.recovered_key && o.recovered_key->elements == victim.sym_key().elements;
        if (m == Mode::kBaseline ? (o.success && exact && key_match) : (!o.success && !key_match && !exact)) ++wins;
      }
    }
    ok = ok && trials == 20 && wins == 20;
    detail += fmt("%s %d/%d %s; ", std::string(keyprot::to_string(m)).c_str(), wins, trials,
                  m == Mode::kBaseline ? "recovered" : "resisted");
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Verdict overflow_guard() {
  std::mt19937_64 rng(801);
  const u64 p = he::kDefaultPlaintextModulus;
  int violating = 0, rejected = 0, compliant = 0, accepted = 0;
  for (int i = 0; i < 200; ++i) {
    protocol::ExperimentConfig cfg;
    cfg.clients = 4;
    cfg.rounds = 1;
    cfg.clients_per_round = 2;
    cfg.eval_clients = 4;
    cfg.epochs = 1;
    cfg.batch_size = 32;
    cfg.hidden = 4;
    cfg.poly_degree = 1024;
    cfg.rsa_bits = 1024;
    cfg.synthetic_samples = 100;  // 20 train rows per client: one batch each
    cfg.seed = rng();
    cfg.mode = kModes[rng() % 3];
    const u64 quarter = 1 + rng() % 40;  // alpha in steps of 1/4
    cfg.clip_range = static_cast<double>(quarter) / 4.0;
    cfg.n_max = 2 + rng() % 64;
    const u64 edge = 2 * p / (quarter * cfg.n_max);  // alpha*S*n_max*2 == p near here
    cfg.scale = std::max<u64>(1, edge + (rng() % 7) - 3);
    // 2 * alpha * S * n_max < p, in integers: quarter * S * n_max < 2p
    const bool violates = quarter * cfg.scale * cfg.n_max >= 2 * p;
    const u64 level = static_cast<u64>(std::llround(cfg.clip_range * static_cast<double>(cfg.scale)));
    const bool guard = level * cfg.n_max > (p - 1) / 2;
    bool threw = false;
    try {
      protocol::Simulation sim(cfg);
      sim.setup();
    } catch (const InvalidParams&) {
      threw = true;
    }
    if (violates) {
      ++violating;
      if (threw) ++rejected;
    } else if (!guard) {
      ++compliant;
      if (!threw) ++accepted;
    }
  }
  return {violating > 0 && rejected == violating && accepted == compliant,
          fmt("%d/%d violating configs rejected at setup, %d/%d compliant accepted", rejected, violating, accepted,
              compliant)};
}

Verdict learning() {
  const auto t0 = Clock::now();
  auto cfg = digits_config();
  cfg.mode = Mode::kMasking;
  const auto plain = protocol::run_plaintext_experiment(cfg);
  const double plain_s = since(t0);
  const double enc_s = runs().seconds[1];
  const double a_enc = run_of(Mode::kMasking).reports.back().metrics.accuracy;
  const double a_plain = plain.reports.back().metrics.accuracy;
  const double gap = std::abs(a_enc - a_plain);
  return {gap <= 0.01 && a_enc > 0.85 && a_plain > 0.85 && enc_s + plain_s < 900,
          fmt("encrypted %.2f%%, plaintext %.2f%%, gap %.2f pp (%zu test rows, %.0f s)", 100 * a_enc, 100 * a_plain,
              100 * gap, plain.reports.back().metrics.test_sample_count, enc_s + plain_s)};
}

Verdict cost_structure() {
  std::string detail;
  bool ok = true;
  for (Mode m : kModes) {
    double lo = 1.0;
    for (const auto& rep : run_of(m).reports) lo = std::min(lo, rep.timings.hesd_total / rep.timings.aggregation_phase);
    // the share bound applies to the HE-only key paths; RSA mode is reported
    if (m != Mode::kRsaWrapping) ok = ok && lo > 0.9;
    detail += fmt("%s min HESD share %.1f%%%s; ", std::string(keyprot::to_string(m)).c_str(), 100 * lo,
                  m == Mode::kRsaWrapping ? " (info)" : "");
  }

  Ring& r = ring();
  he::Prng prng = he::make_prng(seed_from_u64(1001));
  const auto key = cipher::random_sym_key(r.cp, prng);
  const auto mask = keyprot::random_mask(r.cp, 1, prng);
  const auto masked = std::get<keyprot::MaskedKey>(keyprot::protect_masked(r.cp, key, mask, r.keys.public_key));
  constexpr int kReps = 50;
  auto t0 = Clock::now();
  for (int i = 0; i < kReps; ++i) {
    const auto ct = keyprot::unmask(r.cp, masked, mask);
    if (ct.parts.empty()) ok = false;
  }
  const double unmask_s = since(t0) / kReps;

  const auto tpa = keyprot::RsaPrivateKey::generate(2048);
  const auto server = keyprot::RsaPrivateKey::generate(3072);
  const auto cert = keyprot::issue_certificate(tpa, server.public_key());
  const Bytes ser = he::serialize(cipher::encrypt_key(r.keys.public_key, r.cp, key));
  const auto wrapped = std::get<keyprot::RsaWrappedKey>(keyprot::rsa_wrap(ser, cert, tpa.public_key()));
  constexpr int kRsaReps = 3;
  t0 = Clock::now();
  for (int i = 0; i < kRsaReps; ++i) {
    if (keyprot::rsa_unwrap(wrapped, server) != ser) ok = false;
  }
  const double unwrap_s = since(t0) / kRsaReps;
  const double ratio = unwrap_s / unmask_s;
  ok = ok && ratio >= 100;
  detail += fmt("unmask %.3g s vs RSA-3072 unwrap %.3g s (%zu chunks): %.0fx", unmask_s, unwrap_s,
                wrapped.chunks.size(), ratio);
  return {ok, detail};
}

struct Criterion {
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"oaep-capacity", oaep_capacity},       {"hesd-exactness", hesd_exact},
      {"masking-exactness", masking_exact},   {"rsa-wrap-roundtrip", rsa_roundtrip},
      {"encrypted-aggregation", aggregation_match}, {"mode-transparency", mode_transparency},
      {"threat-model", threat_model},         {"overflow-guard", overflow_guard},
      {"learning-sanity", learning},          {"cost-structure", cost_structure},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = all[i].check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s  %2d %-22s %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, all[i].name, v.detail.c_str(), since(t0));
    std::fflush(stdout);
  }
  std::printf("%s: %d failed\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", failed);
  return failed ? 1 : 0;
}
