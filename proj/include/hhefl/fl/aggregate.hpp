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


// Weight quantization into Z_p and federated averaging, in the clear and
// over ring ciphertexts.

#ifndef HHEFL_FL_AGGREGATE_HPP_
#define HHEFL_FL_AGGREGATE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hhefl/fl/model.hpp"
#include "hhefl/he/ring_he.hpp"

namespace hhefl::fl {

using u64 = std::uint64_t;

struct QuantParams {
  double clip_range = 5.0;  // alpha
  u64 scale = 0;            // S
  u64 modulus = 65537;      // p
  u64 n_max = 16;           // bound on the sum of sample counts in a round

  // S = floor((p - 1) / (2 alpha n_max)).
  static QuantParams for_bound(u64 modulus, double clip_range, u64 n_max);

  // Largest quantized magnitude, round_half_away(alpha * S).
  u64 max_level() const;
  // Throws InvalidParams unless 2 alpha S n_max < p and the worst-case
  // weighted sum stays inside the centered range.
  void validate() const;
};

// Residue of v in (-p/2, p/2].
std::int64_t centered(u64 v, u64 p);

ModelWeights clip(const ModelWeights& w, double clip_range);

// clip, scale, round half away from zero, centered residue in [0, p).
std::vector<u64> quantize(const ModelWeights& w, const QuantParams& qp);
// centered lift, then divide by S * n.
ModelWeights dequantize(std::span<const u64> v, const QuantParams& qp, u64 n, const ModelShape& shape);

struct PlainUpdate {
  ModelWeights weights;
  SampleCount n = 0;
};

// sum_k (n_k / n) w_k with n = sum_k n_k.
ModelWeights fedavg_plain(std::span<const PlainUpdate> updates);

// Integer sum_k n_k * centered(q_k) computed without reduction. Throws
// InvalidParams if any entry leaves (-p/2, p/2], i.e. the modular sum wrapped.
std::vector<std::int64_t> shadow_aggregate(std::span<const std::vector<u64>> quantized,
                                           std::span<const SampleCount> counts, const QuantParams& qp);

struct EncryptedUpdate {
  std::vector<he::RingCiphertext> cts;
  SampleCount n = 0;
};

struct EncryptedAggregate {
  std::vector<he::RingCiphertext> cts;  // Enc(sum_k n_k q(w_k) mod p)
  SampleCount total_n = 0;
};

// No division happens here; clients divide by total_n after decrypting.
EncryptedAggregate fedavg_encrypted(std::span<const EncryptedUpdate> updates, const QuantParams& qp);

// Decrypts, takes the first parameter_count slots and dequantizes by total_n.
ModelWeights decrypt_aggregate(const he::SecretKey& sk, const EncryptedAggregate& agg, const QuantParams& qp,
                               const ModelShape& shape);

}  // namespace hhefl::fl

#endif  // HHEFL_FL_AGGREGATE_HPP_
