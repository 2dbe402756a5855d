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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "hhefl/error.hpp"
#include "hhefl/fl/aggregate.hpp"
#include "hhefl/fl/dataset.hpp"
#include "hhefl/fl/model.hpp"

namespace hhefl::fl {
namespace {

constexpr u64 kP = 65537;

const ModelShape kSmall{8, 12, 3};

ModelWeights random_weights(const ModelShape& s, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  ModelWeights w{s, std::vector<double>(s.parameter_count())};
  for (double& v : w.values) v = u(rng);
  return w;
}

TEST(Model, ParameterCountOfDefaultShape) { EXPECT_EQ(ModelShape{}.parameter_count(), 7960u); }

TEST(Model, BatchCountIsCeilingDivision) {
  EXPECT_EQ(batch_count(640, 64), 10u);
  EXPECT_EQ(batch_count(641, 64), 11u);
  EXPECT_EQ(batch_count(1, 64), 1u);
  EXPECT_THROW(batch_count(10, 0), InvalidArgument);
}

TEST(Model, ZeroEpochsLeavesWeightsUnchanged) {
  const Dataset d = make_synthetic(640, 8, 3);
  const ModelShape s{8, 12, 2};
  const ModelWeights w = init_weights(s, 11);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train_local(w, d, cfg);
  EXPECT_EQ(r.weights, w);
  EXPECT_EQ(r.n, 10u);
}

TEST(Model, TrainingReducesLossOnSyntheticTask) {
  const Dataset d = make_synthetic(400, 8, 5);
  const ModelShape s{8, 12, 2};
  const ModelWeights w = init_weights(s, 1);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 32;
  cfg.seed = 9;
  const TrainResult r = train_local(w, d, cfg);
  EXPECT_LT(mean_loss(r.weights, d), mean_loss(w, d));
  EXPECT_GT(evaluate(r.weights, d).accuracy, 0.65);
}

TEST(Model, TrainingIsDeterministicInSeed) {
  const Dataset d = make_synthetic(200, 8, 5);
  const ModelWeights w = init_weights({8, 12, 2}, 1);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 4;
  EXPECT_EQ(train_local(w, d, cfg).weights, train_local(w, d, cfg).weights);
  TrainConfig other = cfg;
  other.seed = 5;
  EXPECT_NE(train_local(w, d, cfg).weights, train_local(w, d, other).weights);
}

TEST(Model, RejectsEmptyOrMismatchedData) {
  const ModelWeights w = init_weights({8, 12, 2}, 1);
  Dataset empty;
  empty.features.resize(0, 8);
  EXPECT_THROW(train_local(w, empty, {}), InvalidArgument);
  EXPECT_THROW(train_local(w, make_synthetic(10, 5, 1), {}), InvalidArgument);
  ModelWeights bad = w;
  bad.values[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train_local(bad, make_synthetic(10, 8, 1), {}), InvalidArgument);
}

TEST(Metrics, AggregationIsSampleWeighted) {
  const EvalMetrics one{0.75, 0.4, 30};
  const EvalMetrics single = aggregate_metrics(std::span(&one, 1));
  EXPECT_DOUBLE_EQ(single.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(single.loss, 0.4);
  EXPECT_EQ(single.test_sample_count, 30u);

  const std::vector<EvalMetrics> pair{{0.9, 1.0, 50}, {0.7, 3.0, 50}};
  const EvalMetrics m = aggregate_metrics(pair);
  EXPECT_NEAR(m.accuracy, 0.8, 1e-12);
  EXPECT_NEAR(m.loss, 2.0, 1e-12);
  EXPECT_EQ(m.test_sample_count, 100u);
}

TEST(Metrics, RandomInstancesMatchWeightedMean) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvalMetrics> ms(1 + rng() % 8);
    double acc = 0, loss = 0, total = 0;
    for (auto& m : ms) {
      m = {u(rng), 5 * u(rng), 1 + rng() % 200};
      acc += m.accuracy * m.test_sample_count;
      loss += m.loss * m.test_sample_count;
      total += m.test_sample_count;
    }
    const EvalMetrics got = aggregate_metrics(ms);
    EXPECT_NEAR(got.accuracy, acc / total, 1e-12);
    EXPECT_NEAR(got.loss, loss / total, 1e-12);
  }
}

TEST(Quant, DefaultScaleAndGuard) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  EXPECT_EQ(qp.scale, 819u);
  EXPECT_LT(2 * 5 * qp.scale * qp.n_max, kP);
  QuantParams bad = qp;
  bad.scale = 820;  // 2 * 5 * 820 * 8 = 65600 >= p
  EXPECT_THROW(bad.validate(), InvalidParams);
}

TEST(Quant, OverflowGuardPropertyOverRandomConfigs) {
  std::mt19937_64 rng(33);
  int rejected = 0, admitted = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    QuantParams qp;
    qp.modulus = kP;
    qp.clip_range = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    qp.n_max = 1 + rng() % 64;
    qp.scale = 1 + rng() % 8000;
    const bool violates = 2.0L * qp.clip_range * qp.scale * qp.n_max >= kP;
    if (violates) {
      EXPECT_THROW(qp.validate(), InvalidParams);
      ++rejected;
    } else {
      try {
        qp.validate();
        ++admitted;
      } catch (const InvalidParams&) {
        // only the rounding guard may reject a config under the bound
        EXPECT_GT(qp.max_level() * qp.n_max, (kP - 1) / 2);
      }
    }
  }
  EXPECT_GT(rejected, 100);
  EXPECT_GT(admitted, 100);
}

TEST(Quant, EndpointsAndZero) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  const ModelShape s{1, 1, 2};  // 6 parameters
  ModelWeights w{s, {0.0, 5.0, -5.0, 7.5, -100.0, 0.0}};
  const auto q = quantize(w, qp);
  EXPECT_EQ(q[0], 0u);
  EXPECT_EQ(q[1], 5 * qp.scale);
  EXPECT_EQ(q[2], kP - 5 * qp.scale);
  EXPECT_EQ(q[3], 5 * qp.scale);
  EXPECT_EQ(q[4], kP - 5 * qp.scale);
  const ModelWeights back = dequantize(q, qp, 1, s);
  EXPECT_EQ(back.values[0], 0.0);
  EXPECT_DOUBLE_EQ(back.values[1], 5.0);
  EXPECT_DOUBLE_EQ(back.values[2], -5.0);
}

TEST(Quant, RoundsHalfAwayFromZero) {
  QuantParams qp;
  qp.scale = 2;
  qp.n_max = 1;
  const ModelShape s{1, 1, 2};
  ModelWeights w{s, {0.25, -0.25, 0.75, -0.75, 0.2, -0.2}};
  const auto q = quantize(w, qp);
  EXPECT_EQ(centered(q[0], kP), 1);
  EXPECT_EQ(centered(q[1], kP), -1);
  EXPECT_EQ(centered(q[2], kP), 2);
  EXPECT_EQ(centered(q[3], kP), -2);
  EXPECT_EQ(centered(q[4], kP), 0);
  EXPECT_EQ(centered(q[5], kP), 0);
}

TEST(Quant, RoundingErrorBound) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 16);
  std::mt19937_64 rng(44);
  const ModelShape s{10, 90, 10};  // 1000 + 90 + 900 + 10 parameters
  ModelWeights w = random_weights(s, rng, 8.0);
  const ModelWeights back = dequantize(quantize(w, qp), qp, 1, s);
  const ModelWeights clipped = clip(w, qp.clip_range);
  const double bound = 1.0 / (2.0 * qp.scale);
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_LE(std::abs(back.values[i] - clipped.values[i]), bound + 1e-15);
}

TEST(Quant, RejectsNonFiniteWeight) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  ModelWeights w{{1, 1, 2}, std::vector<double>(6, 0.0)};
  w.values[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(quantize(w, qp), InvalidArgument);
}

TEST(FedAvgPlain, IdentitySymmetryPermutation) {
  std::mt19937_64 rng(55);
  const ModelWeights w = random_weights(kSmall, rng, 3.0);
  const std::vector<PlainUpdate> one{{w, 7}};
  EXPECT_EQ(fedavg_plain(one).values, w.values);

  ModelWeights neg = w;
  for (double& v : neg.values) v = -v;
  const std::vector<PlainUpdate> pair{{w, 4}, {neg, 4}};
  for (double v : fedavg_plain(pair).values) EXPECT_EQ(v, 0.0);

  std::vector<PlainUpdate> ups;
  for (int k = 0; k < 5; ++k) ups.push_back({random_weights(kSmall, rng, 3.0), 1 + rng() % 9});
  const ModelWeights base = fedavg_plain(ups);
  std::shuffle(ups.begin(), ups.end(), rng);
  const ModelWeights shuffled = fedavg_plain(ups);
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base.values[i], shuffled.values[i], 1e-12);
}

TEST(FedAvgPlain, FourClientsMatchDirectFormula) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PlainUpdate> ups;
    for (int k = 0; k < 4; ++k) ups.push_back({random_weights(kSmall, rng, 4.0), 1 + rng() % 5});
    const ModelWeights got = fedavg_plain(ups);
    double n = 0;
    for (const auto& u : ups) n += static_cast<double>(u.n);
    for (std::size_t i = 0; i < got.size(); ++i) {
      double expect = 0;
      for (const auto& u : ups) expect += (static_cast<double>(u.n) / n) * u.weights.values[i];
      ASSERT_NEAR(got.values[i], expect, 1e-12);
    }
  }
}

TEST(FedAvgPlain, RejectsBadInput) {
  EXPECT_THROW(fedavg_plain({}), InvalidArgument);
  std::mt19937_64 rng(1);
  const std::vector<PlainUpdate> zero_n{{random_weights(kSmall, rng, 1.0), 0}};
  EXPECT_THROW(fedavg_plain(zero_n), InvalidArgument);
  const std::vector<PlainUpdate> shapes{{random_weights(kSmall, rng, 1.0), 1},
                                        {random_weights({8, 11, 3}, rng, 1.0), 1}};
  EXPECT_THROW(fedavg_plain(shapes), InvalidArgument);
}

TEST(Shadow, WorstCaseAdmittedConfigDoesNotWrap) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  const ModelShape s{1, 1, 2};
  const std::vector<std::vector<u64>> q{quantize({s, std::vector<double>(6, 9.0)}, qp),
                                        quantize({s, std::vector<double>(6, 9.0)}, qp)};
  const std::vector<SampleCount> counts{5, 3};
  const auto sum = shadow_aggregate(q, counts, qp);
  EXPECT_EQ(sum[0], static_cast<std::int64_t>(8 * 5 * qp.scale));

  QuantParams loose = qp;
  const std::vector<SampleCount> too_many{9, 9};
  EXPECT_THROW(shadow_aggregate(q, too_many, loose), InvalidParams);
}

class FedAvgEncrypted : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = he::HeContext::create(he::HeParams::desk_default(1024));
    keys_ = new he::RingKeys(he::keygen(ctx_, seed_from_u64(17)));
  }
  static void TearDownTestSuite() {
    delete keys_;
    ctx_.reset();
  }

  // Splits the vector into slot-sized chunks and encrypts each.
  static std::vector<he::RingCiphertext> encrypt_vec(const std::vector<u64>& v, he::Prng& prng) {
    std::vector<he::RingCiphertext> out;
    const std::size_t n = ctx_->slot_count();
    for (std::size_t off = 0; off < v.size(); off += n) {
      const std::size_t len = std::min(n, v.size() - off);
      out.push_back(he::encrypt(keys_->public_key, std::span(v).subspan(off, len), prng));
    }
    return out;
  }

  static he::ContextPtr ctx_;
  static he::RingKeys* keys_;
};
he::ContextPtr FedAvgEncrypted::ctx_;
he::RingKeys* FedAvgEncrypted::keys_ = nullptr;

TEST_F(FedAvgEncrypted, SingleClientDecryptsToQuantizedWeights) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  std::mt19937_64 rng(77);
  he::Prng prng = he::make_prng(seed_from_u64(1));
  const ModelShape s{16, 60, 10};  // 1630 parameters, two ciphertexts
  const auto q = quantize(random_weights(s, rng, 6.0), qp);
  const std::vector<EncryptedUpdate> ups{{encrypt_vec(q, prng), 1}};
  const EncryptedAggregate agg = fedavg_encrypted(ups, qp);
  EXPECT_EQ(agg.total_n, 1u);
  ASSERT_EQ(agg.cts.size(), 2u);
  std::vector<u64> slots;
  for (const auto& ct : agg.cts) {
    const auto v = he::decrypt(keys_->secret_key, ct);
    slots.insert(slots.end(), v.begin(), v.end());
  }
  slots.resize(q.size());
  EXPECT_EQ(slots, q);
}

TEST_F(FedAvgEncrypted, MatchesPlainFedAvgWithinQuantizationError) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 16);
  std::mt19937_64 rng(88);
  he::Prng prng = he::make_prng(seed_from_u64(2));
  const double half_step = 1.0 / (2.0 * qp.scale);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PlainUpdate> plain;
    std::vector<EncryptedUpdate> enc;
    std::vector<std::vector<u64>> quantized;
    std::vector<SampleCount> counts;
    for (int k = 0; k < 4; ++k) {
      const ModelWeights w = random_weights(kSmall, rng, 6.0);
      const SampleCount n = 1 + rng() % 4;
      plain.push_back({clip(w, qp.clip_range), n});
      quantized.push_back(quantize(w, qp));
      counts.push_back(n);
      enc.push_back({encrypt_vec(quantized.back(), prng), n});
    }
    const EncryptedAggregate agg = fedavg_encrypted(enc, qp);
    const ModelWeights got = decrypt_aggregate(keys_->secret_key, agg, qp, kSmall);
    const ModelWeights expect = fedavg_plain(plain);
    SampleCount total = 0, largest = 0;
    for (SampleCount n : counts) {
      total += n;
      largest = std::max(largest, n);
    }
    ASSERT_EQ(agg.total_n, total);
    const double tol = half_step * (static_cast<double>(largest) / total) * 4;
    const auto shadow = shadow_aggregate(quantized, counts, qp);
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_LE(std::abs(got.values[i] - expect.values[i]), tol + 1e-12);
      ASSERT_LE(std::abs(got.values[i] - expect.values[i]), half_step + 1e-12);
      ASSERT_DOUBLE_EQ(got.values[i], static_cast<double>(shadow[i]) / (qp.scale * total));
    }
  }
}

TEST_F(FedAvgEncrypted, DecryptedSumIsPermutationInvariant) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 16);
  std::mt19937_64 rng(99);
  he::Prng prng = he::make_prng(seed_from_u64(3));
  std::vector<EncryptedUpdate> enc;
  for (int k = 0; k < 4; ++k) enc.push_back({encrypt_vec(quantize(random_weights(kSmall, rng, 6.0), qp), prng), 1 + rng() % 3});
  const ModelWeights a = decrypt_aggregate(keys_->secret_key, fedavg_encrypted(enc, qp), qp, kSmall);
  std::reverse(enc.begin(), enc.end());
  const ModelWeights b = decrypt_aggregate(keys_->secret_key, fedavg_encrypted(enc, qp), qp, kSmall);
  EXPECT_EQ(a.values, b.values);
}

TEST_F(FedAvgEncrypted, RefusesOverflowAndMismatch) {
  const QuantParams qp = QuantParams::for_bound(kP, 5.0, 8);
  std::mt19937_64 rng(5);
  he::Prng prng = he::make_prng(seed_from_u64(4));
  const auto q = quantize(random_weights(kSmall, rng, 1.0), qp);
  const std::vector<EncryptedUpdate> over{{encrypt_vec(q, prng), 5}, {encrypt_vec(q, prng), 4}};
  EXPECT_THROW(fedavg_encrypted(over, qp), InvalidArgument);

  std::vector<u64> longer(ctx_->slot_count() + 3, 1);
  const std::vector<EncryptedUpdate> mismatch{{encrypt_vec(q, prng), 1}, {encrypt_vec(longer, prng), 1}};
  EXPECT_THROW(fedavg_encrypted(mismatch, qp), InvalidArgument);

  QuantParams bad = qp;
  bad.scale = 5000;
  const std::vector<EncryptedUpdate> ok{{encrypt_vec(q, prng), 1}};
  EXPECT_THROW(fedavg_encrypted(ok, bad), InvalidParams);
}

TEST(Dataset, DigitsCsvLoads) {
  const Dataset d = load_csv(std::string(HHEFL_SOURCE_DIR) + "/data/digits.csv");
  EXPECT_EQ(d.size(), 1797u);
  EXPECT_EQ(d.feature_count(), 64u);
  EXPECT_EQ(d.num_classes, 10);
  EXPECT_GE(d.features.minCoeff(), 0.0);
  EXPECT_LE(d.features.maxCoeff(), 1.0);
}

TEST(Dataset, MalformedCsvIsRejected) {
  const std::string path = ::testing::TempDir() + "hhefl_bad.csv";
  {
    std::ofstream out(path);
    out << "a,b,label\n0.1,0.2,1\n0.3,oops,0\n";
  }
  EXPECT_THROW(load_csv(path), ParseError);
  {
    std::ofstream out(path);
    out << "a,b,label\n0.1,0.2,1\n0.3,0\n";
  }
  EXPECT_THROW(load_csv(path), ParseError);
  std::remove(path.c_str());
  EXPECT_THROW(load_csv(path), InvalidArgument);
}

TEST(Dataset, RoundRobinPartitionAndSplit) {
  const Dataset d = make_synthetic(103, 4, 2);
  const auto parts = partition_iid(d, 12);
  ASSERT_EQ(parts.size(), 12u);
  std::size_t total = 0;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    total += parts[c].size();
    for (std::size_t i = 0; i < parts[c].size(); ++i) {
      EXPECT_EQ(parts[c].labels(static_cast<Eigen::Index>(i)), d.labels(static_cast<Eigen::Index>(c + 12 * i)));
    }
  }
  EXPECT_EQ(total, 103u);
  const auto [train, test] = train_test_split(parts[0], 0.8);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(test.size(), 2u);
  EXPECT_THROW(partition_iid(d, 0), InvalidArgument);
}

}  // namespace
}  // namespace hhefl::fl
