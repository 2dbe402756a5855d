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


#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hhefl/cipher/hesd.hpp"
#include "hhefl/cipher/stream_cipher.hpp"
#include "hhefl/error.hpp"

namespace hhefl::cipher {
namespace {

constexpr u64 kP = 65537;

Nonce counting_nonce() {
  Nonce n;
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = static_cast<std::uint8_t>(i);
  return n;
}

std::vector<u64> random_message(std::mt19937_64& rng, std::size_t len) {
  std::vector<u64> m(len);
  for (auto& v : m) v = rng() % kP;
  return m;
}

TEST(RoundConstants, Deterministic) {
  const auto p = CipherParams::defaults();
  const auto a = round_constants(p, counting_nonce(), 3, 2);
  const auto b = round_constants(p, counting_nonce(), 3, 2);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.a.rows(), 16);
  EXPECT_EQ(round_constants(p, counting_nonce(), 3, 4).a.rows(), 8);
}

TEST(RoundConstants, EntriesInField) {
  const auto p = CipherParams::defaults();
  for (int r = 1; r <= p.rounds + 1; ++r) {
    const auto rc = round_constants(p, counting_nonce(), 0, r);
    EXPECT_LT(rc.a.maxCoeff(), kP);
    EXPECT_LT(rc.c.maxCoeff(), kP);
  }
}

TEST(RoundConstants, DistinctAcrossBlockIndices) {
  const auto p = CipherParams::defaults();
  std::set<std::vector<u64>> seen;
  for (std::uint64_t j = 0; j < 100; ++j) {
    const auto rc = round_constants(p, counting_nonce(), j, 1);
    seen.insert(std::vector<u64>(rc.a.data(), rc.a.data() + rc.a.size()));
  }
  EXPECT_EQ(seen.size(), 100u);
}

// Values produced by tests/oracles/toy_cipher.py.
TEST(RoundConstants, MatchesReferenceModel) {
  const auto rc = round_constants(CipherParams::defaults(), counting_nonce(), 0, 1);
  EXPECT_EQ(rc.a(0, 0), 15952u);
  EXPECT_EQ(rc.a(0, 1), 32516u);
  EXPECT_EQ(rc.a(0, 2), 48747u);
  EXPECT_EQ(rc.a(0, 3), 43073u);
  EXPECT_EQ(rc.c(0), 7979u);
  EXPECT_EQ(rc.c(3), 219u);
}

TEST(Keystream, GoldenVectors) {
  const auto p = CipherParams::defaults();
  const SymKey zero{std::vector<u64>(16, 0)};
  EXPECT_EQ(keystream_block(p, zero, counting_nonce(), 0),
            (std::vector<u64>{34381, 36495, 26409, 39154, 42383, 61602, 48893, 35591}));
  EXPECT_EQ(keystream_block(p, zero, counting_nonce(), 5),
            (std::vector<u64>{16771, 52367, 22766, 19046, 36895, 45988, 13279, 62266}));
  SymKey counting{{}};
  for (u64 i = 1; i <= 16; ++i) counting.elements.push_back(i);
  EXPECT_EQ(keystream_block(p, counting, counting_nonce(), 1),
            (std::vector<u64>{12689, 46435, 42780, 44698, 32032, 5612, 31948, 44839}));
}

TEST(Keystream, DistinctKeysGiveDistinctBlocks) {
  const auto p = CipherParams::defaults();
  auto prng = he::make_prng(seed_from_u64(21));
  for (int i = 0; i < 100; ++i) {
    const auto k1 = random_sym_key(p, prng);
    const auto k2 = random_sym_key(p, prng);
    ASSERT_NE(keystream_block(p, k1, counting_nonce(), 0), keystream_block(p, k2, counting_nonce(), 0));
  }
}

TEST(Keystream, RejectsMalformedKey) {
  const auto p = CipherParams::defaults();
  EXPECT_THROW(keystream_block(p, SymKey{std::vector<u64>(15, 0)}, counting_nonce(), 0), InvalidArgument);
  EXPECT_THROW(keystream_block(p, SymKey{std::vector<u64>(16, kP)}, counting_nonce(), 0), InvalidArgument);
}

TEST(CipherParams, Validation) {
  auto p = CipherParams::defaults();
  p.block_len = 17;
  EXPECT_THROW(p.validate(), InvalidParams);
  p = CipherParams::defaults();
  p.modulus = 65521;
  EXPECT_THROW(p.validate(), InvalidParams);
}

TEST(SymEncrypt, EmptyMessage) {
  const auto p = CipherParams::defaults();
  const SymKey key{std::vector<u64>(16, 1)};
  const auto ct = sym_encrypt(p, key, counting_nonce(), {});
  EXPECT_TRUE(ct.blocks.empty());
  EXPECT_TRUE(sym_decrypt(p, key, ct).empty());
}

TEST(SymEncrypt, RoundtripAndExpansion) {
  const auto p = CipherParams::defaults();
  auto prng = he::make_prng(seed_from_u64(22));
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto key = random_sym_key(p, prng);
    const auto m = random_message(rng, 1 + rng() % 100);
    const auto ct = sym_encrypt(p, key, random_nonce(prng), m);
    ASSERT_EQ(ct.element_count(), (m.size() + 7) / 8 * 8);
    ASSERT_GT(ct.true_len, 0u);
    ASSERT_LE(ct.true_len, 8u);
    ASSERT_EQ(sym_decrypt(p, key, ct), m);
  }
}

TEST(SymEncrypt, WrongKeyDoesNotDecrypt) {
  const auto p = CipherParams::defaults();
  auto prng = he::make_prng(seed_from_u64(23));
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto key = random_sym_key(p, prng);
    const auto other = random_sym_key(p, prng);
    const auto m = random_message(rng, 8 + rng() % 40);
    ASSERT_NE(sym_decrypt(p, other, sym_encrypt(p, key, counting_nonce(), m)), m);
  }
}

TEST(SymEncrypt, RejectsOutOfRangeElement) {
  const auto p = CipherParams::defaults();
  const SymKey key{std::vector<u64>(16, 1)};
  const std::vector<u64> m{1, kP};
  EXPECT_THROW(sym_encrypt(p, key, counting_nonce(), m), InvalidArgument);
}

TEST(SymEncrypt, SerializationRoundtrip) {
  const auto p = CipherParams::defaults();
  const SymKey key{std::vector<u64>(16, 3)};
  std::mt19937_64 rng(24);
  const auto ct = sym_encrypt(p, key, counting_nonce(), random_message(rng, 21));
  const auto bytes = serialize(p, ct);
  EXPECT_EQ(bytes.size(), 32u + 4 * 24);
  const auto back = deserialize_sym(p, bytes);
  EXPECT_EQ(back.blocks, ct.blocks);
  EXPECT_EQ(back.true_len, ct.true_len);
  EXPECT_EQ(back.nonce, ct.nonce);
  EXPECT_THROW(deserialize_sym(p, std::span(bytes).first(bytes.size() - 1)), ParseError);
}

// Transciphering runs on a reduced ring (N = 1024) to keep the unit suite
// quick; the acceptance binary repeats the check at default parameters.
class HesdTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new he::ContextPtr(he::HeContext::create(he::HeParams::desk_default(1024)));
    keys_ = new he::RingKeys(he::keygen(*ctx_, seed_from_u64(31)));
  }
  static void TearDownTestSuite() {
    delete keys_;
    delete ctx_;
  }
  static he::ContextPtr* ctx_;
  static he::RingKeys* keys_;
  const CipherParams params_ = CipherParams::defaults();
};

he::ContextPtr* HesdTest::ctx_ = nullptr;
he::RingKeys* HesdTest::keys_ = nullptr;

TEST_F(HesdTest, BlockMatchesSymmetricDecryption) {
  auto prng = he::make_prng(seed_from_u64(32));
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 25; ++trial) {
    const auto key = random_sym_key(params_, prng);
    const auto m = random_message(rng, 8 * (1 + rng() % 6));
    const auto nonce = random_nonce(prng);
    const auto ct = sym_encrypt(params_, key, nonce, m);
    const std::uint64_t j = rng() % ct.blocks.size();
    const auto enc_key = encrypt_key(keys_->public_key, params_, key);
    const auto out = hesd_block(params_, enc_key, keys_->eval_key, nonce, j, ct.blocks[j]);
    const auto d = he::decrypt(keys_->secret_key, out);
    for (std::size_t i = 0; i < 8; ++i) ASSERT_EQ(d[i], m[j * 8 + i]) << "trial " << trial;
    for (std::size_t i = 8; i < d.size(); ++i) ASSERT_EQ(d[i], 0u);
  }
}

TEST_F(HesdTest, ZeroMessage) {
  auto prng = he::make_prng(seed_from_u64(33));
  const auto key = random_sym_key(params_, prng);
  const auto ct = sym_encrypt(params_, key, counting_nonce(), std::vector<u64>(8, 0));
  const auto out = hesd_block(params_, encrypt_key(keys_->public_key, params_, key), keys_->eval_key,
                              counting_nonce(), 0, ct.blocks[0]);
  const auto d = he::decrypt(keys_->secret_key, out);
  EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](u64 v) { return v == 0; }));
}

TEST_F(HesdTest, TamperedElementShiftsOnlyThatPosition) {
  auto prng = he::make_prng(seed_from_u64(34));
  std::mt19937_64 rng(34);
  const auto key = random_sym_key(params_, prng);
  const auto m = random_message(rng, 8);
  auto ct = sym_encrypt(params_, key, counting_nonce(), m);
  ct.blocks[0][5] = (ct.blocks[0][5] + 1000) % kP;
  const auto out = hesd_block(params_, encrypt_key(keys_->public_key, params_, key), keys_->eval_key,
                              counting_nonce(), 0, ct.blocks[0]);
  const auto d = he::decrypt(keys_->secret_key, out);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(d[i], i == 5 ? (m[i] + 1000) % kP : m[i]);
  }
}

TEST_F(HesdTest, FullMessageAcrossSeveralPasses) {
  auto prng = he::make_prng(seed_from_u64(35));
  std::mt19937_64 rng(35);
  const auto key = random_sym_key(params_, prng);
  const auto m = random_message(rng, 2500);
  const auto ct = sym_encrypt(params_, key, random_nonce(prng), m);
  const auto out = hesd(params_, encrypt_key(keys_->public_key, params_, key), keys_->eval_key, ct);
  EXPECT_EQ(out.size(), 3u);
  EXPECT_EQ(decrypt_transciphered(keys_->secret_key, out, m.size()), m);
  for (const auto& c : out) EXPECT_GT(he::noise_budget(keys_->secret_key, c), 0);
}

TEST_F(HesdTest, CircuitDepthEqualsRounds) {
  auto prng = he::make_prng(seed_from_u64(36));
  const auto key = random_sym_key(params_, prng);
  const auto ct = sym_encrypt(params_, key, counting_nonce(), std::vector<u64>(8, 1));
  const auto out = hesd(params_, encrypt_key(keys_->public_key, params_, key), keys_->eval_key, ct);
  EXPECT_EQ(out[0].depth, params_.rounds);

  CipherParams deep = params_;
  deep.rounds = (*ctx_)->params().depth_budget + 1;
  EXPECT_THROW(HesdEvaluator(deep, encrypt_key(keys_->public_key, params_, key), keys_->eval_key),
               DepthExhausted);
}

TEST_F(HesdTest, RejectsIncompatibleRing) {
  auto p = params_;
  p.key_len = 24;
  const SymKey key{std::vector<u64>(24, 1)};
  EXPECT_THROW(encrypt_key(keys_->public_key, p, key), ParamMismatch);
}

}  // namespace
}  // namespace hhefl::cipher
