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


#include "hhefl/fl/aggregate.hpp"

#include <cmath>
#include <algorithm>

#include "hhefl/error.hpp"

namespace hhefl::fl {

QuantParams QuantParams::for_bound(u64 modulus, double clip_range, u64 n_max) {
  if (!(clip_range > 0) || n_max == 0 || modulus < 3) throw InvalidParams("bad quantization bound");
  QuantParams qp;
  qp.clip_range = clip_range;
  qp.modulus = modulus;
  qp.n_max = n_max;
  qp.scale = static_cast<u64>(std::floor(static_cast<double>(modulus - 1) / (2.0 * clip_range * n_max)));
  qp.validate();
  return qp;
}

u64 QuantParams::max_level() const { return static_cast<u64>(std::round(clip_range * static_cast<double>(scale))); }

void QuantParams::validate() const {
  if (!std::isfinite(clip_range) || clip_range <= 0) throw InvalidParams("clip range must be positive");
  if (scale == 0) throw InvalidParams("scale must be a positive integer");
  if (n_max == 0) throw InvalidParams("n_max must be positive");
  if (modulus < 3 || modulus % 2 == 0) throw InvalidParams("modulus must be an odd prime");
  const long double bound = 2.0L * clip_range * scale * n_max;
  if (!(bound < static_cast<long double>(modulus))) {
    throw InvalidParams("2 * alpha * S * n_max must stay below the plaintext modulus");
  }
  if (static_cast<long double>(max_level()) * n_max > static_cast<long double>((modulus - 1) / 2)) {
    throw InvalidParams("rounded weighted sum can leave the centered range");
  }
}

std::int64_t centered(u64 v, u64 p) {
  v %= p;
  return v > p / 2 ? static_cast<std::int64_t>(v) - static_cast<std::int64_t>(p) : static_cast<std::int64_t>(v);
}

ModelWeights clip(const ModelWeights& w, double clip_range) {
  ModelWeights out = w;
  for (double& v : out.values) v = std::clamp(v, -clip_range, clip_range);
  return out;
}

std::vector<u64> quantize(const ModelWeights& w, const QuantParams& qp) {
  qp.validate();
  std::vector<u64> out(w.size());
  const double s = static_cast<double>(qp.scale);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = w.values[i];
    if (!std::isfinite(v)) throw InvalidArgument("non-finite weight");
    // std::round is half away from zero
    const auto level = static_cast<std::int64_t>(std::round(std::clamp(v, -qp.clip_range, qp.clip_range) * s));
    out[i] = level >= 0 ? static_cast<u64>(level) : qp.modulus - static_cast<u64>(-level);
  }
  return out;
}

ModelWeights dequantize(std::span<const u64> v, const QuantParams& qp, u64 n, const ModelShape& shape) {
  if (n == 0) throw InvalidArgument("divisor must be positive");
  if (v.size() < shape.parameter_count()) throw InvalidArgument("too few values for the model shape");
  ModelWeights w{shape, std::vector<double>(shape.parameter_count())};
  const double denom = static_cast<double>(qp.scale) * static_cast<double>(n);
  for (std::size_t i = 0; i < w.size(); ++i) w.values[i] = static_cast<double>(centered(v[i], qp.modulus)) / denom;
  return w;
}

ModelWeights fedavg_plain(std::span<const PlainUpdate> updates) {
  if (updates.empty()) throw InvalidArgument("no updates");
  const ModelShape& shape = updates.front().weights.shape;
  long double total = 0;
  for (const auto& u : updates) {
    u.weights.validate();
    if (!(u.weights.shape == shape)) throw InvalidArgument("model shape mismatch");
    if (u.n == 0) throw InvalidArgument("sample count must be positive");
    total += u.n;
  }
  std::vector<long double> acc(shape.parameter_count(), 0.0L);
  for (const auto& u : updates) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<long double>(u.n) * u.weights.values[i];
  }
  ModelWeights out{shape, std::vector<double>(acc.size())};
  for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = static_cast<double>(acc[i] / total);
  return out;
}

std::vector<std::int64_t> shadow_aggregate(std::span<const std::vector<u64>> quantized,
                                           std::span<const SampleCount> counts, const QuantParams& qp) {
  if (quantized.size() != counts.size() || quantized.empty()) throw InvalidArgument("update/count mismatch");
  const std::size_t len = quantized.front().size();
  std::vector<std::int64_t> sum(len, 0);
  for (std::size_t k = 0; k < quantized.size(); ++k) {
    if (quantized[k].size() != len) throw InvalidArgument("update length mismatch");
    for (std::size_t i = 0; i < len; ++i) {
      sum[i] += static_cast<std::int64_t>(counts[k]) * centered(quantized[k][i], qp.modulus);
    }
  }
  const auto half = static_cast<std::int64_t>(qp.modulus / 2);
  for (std::int64_t v : sum) {
    if (v <= -half - 1 || v > half) throw InvalidParams("weighted sum wrapped around the plaintext modulus");
  }
  return sum;
}

EncryptedAggregate fedavg_encrypted(std::span<const EncryptedUpdate> updates, const QuantParams& qp) {
  qp.validate();
  if (updates.empty()) throw InvalidArgument("no updates");
  const std::size_t len = updates.front().cts.size();
  if (len == 0) throw InvalidArgument("empty update");
  const he::ContextPtr& ctx = updates.front().cts.front().ctx;
  if (ctx->t().value() != qp.modulus) throw ParamMismatch("quantization modulus differs from plaintext modulus");

  SampleCount total = 0;
  for (const auto& u : updates) {
    if (u.cts.size() != len) throw InvalidArgument("update length mismatch");
    if (u.n == 0) throw InvalidArgument("sample count must be positive");
    if (u.n > qp.n_max - total) throw InvalidArgument("sum of sample counts exceeds n_max");
    total += u.n;
  }

  EncryptedAggregate agg;
  agg.total_n = total;
  agg.cts.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    he::RingCiphertext acc;
    for (const auto& u : updates) {
      const std::vector<u64> weight(ctx->n(), u.n % qp.modulus);
      he::RingCiphertext term = u.n == 1 ? u.cts[i] : he::mul_plain(u.cts[i], weight);
      acc = acc.parts.empty() ? std::move(term) : he::add(acc, term);
    }
    agg.cts.push_back(std::move(acc));
  }
  return agg;
}

ModelWeights decrypt_aggregate(const he::SecretKey& sk, const EncryptedAggregate& agg, const QuantParams& qp,
                               const ModelShape& shape) {
  std::vector<u64> slots;
  for (const auto& ct : agg.cts) {
    const auto v = he::decrypt(sk, ct);
    slots.insert(slots.end(), v.begin(), v.end());
  }
  return dequantize(slots, qp, agg.total_n, shape);
}

}  // namespace hhefl::fl
