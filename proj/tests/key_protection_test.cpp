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

#include <algorithm>
#include <random>

#include "hhefl/cipher/hesd.hpp"
#include "hhefl/error.hpp"
#include "hhefl/keyprot/key_protection.hpp"

namespace hhefl::keyprot {
namespace {

constexpr u64 kP = 65537;

std::vector<u64> first_tk(const he::PlaintextVec& v) { return {v.begin(), v.begin() + 16}; }

class KeyProtectionTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new he::ContextPtr(he::HeContext::create(he::HeParams::desk_default(1024)));
    keys_ = new he::RingKeys(he::keygen(*ctx_, seed_from_u64(41)));
    rsa1024_ = new RsaPrivateKey(RsaPrivateKey::generate(1024));
    tpa_ = new RsaPrivateKey(RsaPrivateKey::generate(2048));
  }
  static void TearDownTestSuite() {
    delete keys_;
    delete ctx_;
    delete rsa1024_;
    delete tpa_;
  }

  static he::ContextPtr* ctx_;
  static he::RingKeys* keys_;
  static RsaPrivateKey* rsa1024_;
  static RsaPrivateKey* tpa_;
  const cipher::CipherParams params_ = cipher::CipherParams::defaults();
  he::Prng prng_ = he::make_prng(seed_from_u64(42));

  std::vector<u64> dec(const he::RingCiphertext& ct) { return first_tk(he::decrypt(keys_->secret_key, ct)); }
};

he::ContextPtr* KeyProtectionTest::ctx_ = nullptr;
he::RingKeys* KeyProtectionTest::keys_ = nullptr;
RsaPrivateKey* KeyProtectionTest::rsa1024_ = nullptr;
RsaPrivateKey* KeyProtectionTest::tpa_ = nullptr;

TEST(MaxPlaintextSize, MatchesOaepSha256Table) {
  EXPECT_EQ(max_plaintext_size(1024), 62u);
  EXPECT_EQ(max_plaintext_size(2048), 190u);
  EXPECT_EQ(max_plaintext_size(3072), 318u);
  EXPECT_EQ(max_plaintext_size(4096), 446u);
}

TEST(MaxPlaintextSize, ChunkCountFormula) {
  EXPECT_EQ(chunk_count(100, 1024), 2u);
  for (int bits : {1024, 2048, 3072, 4096}) {
    const std::size_t m = max_plaintext_size(bits);
    for (std::size_t k = 1; k <= 5; ++k) {
      EXPECT_EQ(chunk_count(k * m, bits), k);
      EXPECT_EQ(chunk_count(k * m + 1, bits), k + 1);
    }
  }
  std::size_t prev = SIZE_MAX;
  for (int bits : {1024, 2048, 3072, 4096}) {
    const std::size_t c = chunk_count(262160, bits);
    EXPECT_LT(c, prev);
    prev = c;
  }
}

TEST(Mode, ParseAndPrint) {
  for (Mode m : {Mode::kBaseline, Mode::kMasking, Mode::kRsaWrapping}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_mode("nope"), InvalidParams);
}

TEST_F(KeyProtectionTest, BaselineDecryptsToKey) {
  const auto sk = cipher::random_sym_key(params_, prng_);
  const auto pk = protect_baseline(params_, sk, keys_->public_key);
  ASSERT_EQ(mode_of(pk), Mode::kBaseline);
  const auto& ct = std::get<BaselineKey>(pk).ct;
  EXPECT_EQ(dec(ct), sk.elements);
  const auto back = deserialize_protected(*ctx_, serialize(pk));
  EXPECT_EQ(dec(std::get<BaselineKey>(back).ct), sk.elements);
}

TEST_F(KeyProtectionTest, ZeroMaskEquivalentToBaseline) {
  const auto sk = cipher::random_sym_key(params_, prng_);
  const Mask zero{std::vector<u64>(16, 0), 1};
  const auto pk = protect_masked(params_, sk, zero, keys_->public_key);
  EXPECT_EQ(dec(std::get<MaskedKey>(pk).ct), sk.elements);
  EXPECT_EQ(dec(unmask(params_, std::get<MaskedKey>(pk), zero)), sk.elements);
}

TEST_F(KeyProtectionTest, MaskedCiphertextHidesKey) {
  for (int i = 0; i < 100; ++i) {
    const auto sk = cipher::random_sym_key(params_, prng_);
    const auto mask = random_mask(params_, 1, prng_);
    const auto pk = protect_masked(params_, sk, mask, keys_->public_key);
    const auto d = dec(std::get<MaskedKey>(pk).ct);
    for (std::size_t k = 0; k < 16; ++k) ASSERT_EQ(d[k], (sk.elements[k] + mask.elements[k]) % kP);
    ASSERT_NE(d, sk.elements);
  }
}

TEST_F(KeyProtectionTest, MaskAdditionWrapsModP) {
  const cipher::SymKey sk{std::vector<u64>(16, 65530)};
  const Mask mask{std::vector<u64>(16, 10), 1};
  const auto pk = protect_masked(params_, sk, mask, keys_->public_key);
  EXPECT_EQ(dec(std::get<MaskedKey>(pk).ct)[0], 3u);
}

TEST_F(KeyProtectionTest, UnmaskRecoversKey) {
  for (int i = 0; i < 100; ++i) {
    const auto sk = cipher::random_sym_key(params_, prng_);
    const auto mask = random_mask(params_, 1, prng_);
    const auto pk = protect_masked(params_, sk, mask, keys_->public_key);
    const auto ct = unmask(params_, std::get<MaskedKey>(pk), mask);
    // Every slot of the layout must hold the key, since HESD reads all of them.
    ASSERT_EQ(he::decrypt(keys_->secret_key, ct), cipher::key_layout(**ctx_, params_, sk.elements));
  }
}

TEST_F(KeyProtectionTest, UnmaskWithWrongMaskFails) {
  for (int i = 0; i < 20; ++i) {
    const auto sk = cipher::random_sym_key(params_, prng_);
    const auto mask = random_mask(params_, 1, prng_);
    const auto other = random_mask(params_, 2, prng_);
    const auto pk = protect_masked(params_, sk, mask, keys_->public_key);
    const auto d = dec(unmask(params_, std::get<MaskedKey>(pk), other));
    for (std::size_t k = 0; k < 16; ++k) {
      ASSERT_EQ(d[k], (sk.elements[k] + mask.elements[k] + kP - other.elements[k]) % kP);
    }
    ASSERT_NE(d, sk.elements);
  }
}

TEST_F(KeyProtectionTest, MaskLengthMismatch) {
  const auto sk = cipher::random_sym_key(params_, prng_);
  const Mask short_mask{std::vector<u64>(15, 1), 1};
  EXPECT_THROW(protect_masked(params_, sk, short_mask, keys_->public_key), InvalidArgument);
  const auto pk = protect_masked(params_, sk, random_mask(params_, 1, prng_), keys_->public_key);
  EXPECT_THROW(unmask(params_, std::get<MaskedKey>(pk), short_mask), InvalidArgument);
}

TEST_F(KeyProtectionTest, CertificateVerifiesAndRejectsMutation) {
  const auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  EXPECT_TRUE(verify_certificate(tpa_->public_key(), cert));
  auto bad = cert;
  bad.modulus.back() ^= 2;
  EXPECT_FALSE(verify_certificate(tpa_->public_key(), bad));
  bad = cert;
  bad.exponent.back() ^= 2;
  EXPECT_FALSE(verify_certificate(tpa_->public_key(), bad));
  bad = cert;
  bad.tpa_signature[5] ^= 1;
  EXPECT_FALSE(verify_certificate(tpa_->public_key(), bad));
  // Signed by someone else.
  EXPECT_FALSE(verify_certificate(rsa1024_->public_key(), cert));
  const auto back = deserialize_certificate(serialize(cert));
  EXPECT_TRUE(verify_certificate(tpa_->public_key(), back));
}

TEST_F(KeyProtectionTest, WrapRefusesUnverifiedCertificate) {
  auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  cert.tpa_signature[0] ^= 1;
  const Bytes data(10, 1);
  EXPECT_THROW(rsa_wrap(data, cert, tpa_->public_key()), IntegrityError);
  EXPECT_THROW(rsa_wrap({}, issue_certificate(*tpa_, rsa1024_->public_key()), tpa_->public_key()),
               InvalidArgument);
}

TEST_F(KeyProtectionTest, WrapChunking) {
  const auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  const Bytes hundred(100, 7);
  const auto w = std::get<RsaWrappedKey>(rsa_wrap(hundred, cert, tpa_->public_key()));
  EXPECT_EQ(w.chunks.size(), 2u);
  for (const auto& c : w.chunks) EXPECT_EQ(c.size(), 128u);
  const Bytes exact(3 * 62, 9);
  EXPECT_EQ(std::get<RsaWrappedKey>(rsa_wrap(exact, cert, tpa_->public_key())).chunks.size(), 3u);
}

TEST_F(KeyProtectionTest, WrapUnwrapIdentity) {
  const auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    Bytes data(1 + rng() % 2000);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const auto pk = rsa_wrap(data, cert, tpa_->public_key());
    ASSERT_EQ(rsa_unwrap(std::get<RsaWrappedKey>(pk), *rsa1024_), data);
    const auto back = deserialize_protected(*ctx_, serialize(pk));
    ASSERT_EQ(rsa_unwrap(std::get<RsaWrappedKey>(back), *rsa1024_), data);
  }
}

TEST_F(KeyProtectionTest, FullPipelineWithRsa3072) {
  const auto server = RsaPrivateKey::generate(3072);
  const auto cert = issue_certificate(*tpa_, server.public_key());
  const auto sk = cipher::random_sym_key(params_, prng_);
  const Bytes ser = he::serialize(cipher::encrypt_key(keys_->public_key, params_, sk));
  const auto pk = rsa_wrap(ser, cert, tpa_->public_key());
  const auto& chunks = std::get<RsaWrappedKey>(pk).chunks;
  EXPECT_EQ(chunks.size(), chunk_count(ser.size(), 3072));
  for (const auto& c : chunks) ASSERT_EQ(c.size(), 384u);
  const Bytes unwrapped = rsa_unwrap(std::get<RsaWrappedKey>(pk), server);
  EXPECT_EQ(dec(he::deserialize(*ctx_, unwrapped)), sk.elements);
}

TEST_F(KeyProtectionTest, TamperingIsRejected) {
  const auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  std::mt19937_64 rng(44);
  Bytes data(500);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  const auto w = std::get<RsaWrappedKey>(rsa_wrap(data, cert, tpa_->public_key()));
  for (int i = 0; i < 20; ++i) {
    auto t = w;
    auto& chunk = t.chunks[rng() % t.chunks.size()];
    chunk[rng() % chunk.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    ASSERT_THROW(rsa_unwrap(t, *rsa1024_), IntegrityError);
  }
}

TEST_F(KeyProtectionTest, ReorderedOrTruncatedChunksAreRejected) {
  const auto cert = issue_certificate(*tpa_, rsa1024_->public_key());
  const auto sk = cipher::random_sym_key(params_, prng_);
  const Bytes ser = he::serialize(cipher::encrypt_key(keys_->public_key, params_, sk));
  const auto w = std::get<RsaWrappedKey>(rsa_wrap(ser, cert, tpa_->public_key()));
  std::mt19937_64 rng(45);
  for (int i = 0; i < 20; ++i) {
    auto t = w;
    const std::size_t a = rng() % t.chunks.size();
    std::size_t b = rng() % t.chunks.size();
    if (a == b) b = (a + 4) % t.chunks.size();
    std::swap(t.chunks[a], t.chunks[b]);
    ASSERT_THROW(he::deserialize(*ctx_, rsa_unwrap(t, *rsa1024_)), Error);
  }
  auto truncated = w;
  truncated.chunks.pop_back();
  EXPECT_THROW(rsa_unwrap(truncated, *rsa1024_), IntegrityError);
}

TEST_F(KeyProtectionTest, MalformedWireRejected) {
  EXPECT_THROW(deserialize_protected(*ctx_, Bytes{7}), ParseError);
  EXPECT_THROW(deserialize_protected(*ctx_, Bytes{2, 5, 0, 0, 0}), ParseError);
  EXPECT_THROW(deserialize_protected(*ctx_, Bytes{}), ParseError);
}

TEST_F(KeyProtectionTest, PemRoundtrip) {
  const auto back = RsaPrivateKey::from_pem(rsa1024_->to_pem());
  const Bytes msg(30, 3);
  EXPECT_EQ(back.oaep_decrypt(rsa1024_->public_key().oaep_encrypt(msg)), msg);
  EXPECT_THROW(RsaPrivateKey::from_pem("garbage"), ParseError);
}

}  // namespace
}  // namespace hhefl::keyprot
