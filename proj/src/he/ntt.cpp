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

#include "hhefl/he/ntt.hpp"

#include <bit>
#include <utility>

#include "hhefl/error.hpp"

namespace hhefl::he {

NttTables::NttTables(const Modulus& q, std::size_t n) : q_(q), n_(n) {
  if (n < 2 || !std::has_single_bit(n)) throw InvalidParams("ring degree must be a power of two");
  psi_ = minimal_root_of_unity(q.value(), 2 * n);
  const u64 omega = q_.mul(psi_, psi_);
  const u64 psi_inv = q_.inv(psi_);
  const u64 omega_inv = q_.inv(omega);
  const u64 n_inv = q_.inv(n % q_.value());

  const int logn = std::countr_zero(n);
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (int b = 0; b < logn; ++b) r |= static_cast<std::uint32_t>((i >> b) & 1) << (logn - 1 - b);
    bitrev_[i] = r;
  }

  psi_pow_.resize(n);
  psi_inv_pow_.resize(n);
  u64 p = 1;
  u64 pi = n_inv;
  for (std::size_t i = 0; i < n; ++i) {
    psi_pow_[i] = p;
    psi_inv_pow_[i] = pi;
    p = q_.mul(p, psi_);
    pi = q_.mul(pi, psi_inv);
  }
  // Stage-major twiddles: entries [half, 2 half) hold w^(j n / (2 half)).
  omega_.assign(n, 0);
  omega_inv_.assign(n, 0);
  for (std::size_t half = 1; half < n; half <<= 1) {
    const u64 step = q_.pow(omega, n / (2 * half));
    const u64 step_inv = q_.pow(omega_inv, n / (2 * half));
    u64 w = 1;
    u64 wi = 1;
    for (std::size_t j = 0; j < half; ++j) {
      omega_[half + j] = w;
      omega_inv_[half + j] = wi;
      w = q_.mul(w, step);
      wi = q_.mul(wi, step_inv);
    }
  }
  auto shoup_all = [&](const std::vector<u64>& v) {
    std::vector<u64> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s[i] = q_.shoup(v[i]);
    return s;
  };
  psi_pow_shoup_ = shoup_all(psi_pow_);
  psi_inv_pow_shoup_ = shoup_all(psi_inv_pow_);
  omega_shoup_ = shoup_all(omega_);
  omega_inv_shoup_ = shoup_all(omega_inv_);
}

// Harvey butterflies: values stay in [0, 4q) between stages and are fully
// reduced once at the end (q < 2^62).
void NttTables::cyclic(std::span<u64> a, const std::vector<u64>& w,
                       const std::vector<u64>& w_shoup) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t r = bitrev_[i];
    if (i < r) std::swap(a[i], a[r]);
  }
  const u64 q = q_.value();
  const u64 two_q = 2 * q;
  u64* data = a.data();
  for (std::size_t half = 1; half < n_; half <<= 1) {
    const u64* tw = w.data() + half;
    const u64* tws = w_shoup.data() + half;
    for (std::size_t i = 0; i < n_; i += 2 * half) {
      u64* x = data + i;
      u64* y = x + half;
      for (std::size_t j = 0; j < half; ++j) {
        u64 u = x[j];
        u -= (u >= two_q) ? two_q : 0;
        const u64 qt = static_cast<u64>((static_cast<u128>(y[j]) * tws[j]) >> 64);
        const u64 v = y[j] * tw[j] - qt * q;  // [0, 2q)
        x[j] = u + v;
        y[j] = u - v + two_q;
      }
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    u64 v = data[i];
    v -= (v >= two_q) ? two_q : 0;
    data[i] = v - ((v >= q) ? q : 0);
  }
}

void NttTables::forward(std::span<u64> a) const {
  if (a.size() != n_) throw InvalidArgument("NTT size mismatch");
  for (std::size_t i = 0; i < n_; ++i) a[i] = q_.mul_shoup(a[i], psi_pow_[i], psi_pow_shoup_[i]);
  cyclic(a, omega_, omega_shoup_);
}

void NttTables::inverse(std::span<u64> a) const {
  if (a.size() != n_) throw InvalidArgument("NTT size mismatch");
  cyclic(a, omega_inv_, omega_inv_shoup_);
  for (std::size_t i = 0; i < n_; ++i) {
    a[i] = q_.mul_shoup(a[i], psi_inv_pow_[i], psi_inv_pow_shoup_[i]);
  }
}

}  // namespace hhefl::he
