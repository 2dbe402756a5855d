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

// Word-sized modular arithmetic for moduli below 2^62.

#ifndef HHEFL_HE_MODARITH_HPP_
#define HHEFL_HE_MODARITH_HPP_

#include <cstdint>
#include <vector>

namespace hhefl::he {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// A modulus with its Barrett constant floor(2^128 / q).
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 q);

  u64 value() const { return q_; }

  // Arithmetic helpers are branch-free; operands are random residues, so
  // conditional jumps would mispredict half the time.
  static u64 select(bool c, u64 v) { return v & (u64{0} - static_cast<u64>(c)); }

  u64 add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s - select(s >= q_, q_);
  }
  u64 sub(u64 a, u64 b) const { return a - b + select(a < b, q_); }
  u64 neg(u64 a) const { return select(a != 0, q_ - a); }

  // Reduces a 128-bit value.
  u64 reduce128(u128 x) const {
    const u64 lo = static_cast<u64>(x);
    const u64 hi = static_cast<u64>(x >> 64);
    u64 carry = static_cast<u64>((static_cast<u128>(lo) * ratio_lo_) >> 64);
    u128 t2 = static_cast<u128>(lo) * ratio_hi_;
    u128 acc = static_cast<u128>(static_cast<u64>(t2)) + carry;
    u64 tmp1 = static_cast<u64>(acc);
    u64 tmp3 = static_cast<u64>(t2 >> 64) + static_cast<u64>(acc >> 64);
    u128 t3 = static_cast<u128>(hi) * ratio_lo_;
    u128 acc2 = static_cast<u128>(tmp1) + static_cast<u64>(t3);
    carry = static_cast<u64>(t3 >> 64) + static_cast<u64>(acc2 >> 64);
    u64 quot = hi * ratio_hi_ + tmp3 + carry;
    u64 r = lo - quot * q_;
    r -= select(r >= q_, q_);
    return r - select(r >= q_, q_);
  }
  u64 reduce(u64 x) const { return x >= q_ ? x % q_ : x; }
  u64 mul(u64 a, u64 b) const { return reduce128(static_cast<u128>(a) * b); }

  // Shoup precomputation for a fixed multiplicand w < q.
  u64 shoup(u64 w) const { return static_cast<u64>((static_cast<u128>(w) << 64) / q_); }
  u64 mul_shoup(u64 a, u64 w, u64 w_shoup) const {
    u64 qt = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
    const u64 r = a * w - qt * q_;
    return r - select(r >= q_, q_);
  }

  u64 pow(u64 base, u64 exp) const;
  u64 inv(u64 a) const;  // q must be prime

  // Maps a signed value into [0, q).
  u64 from_signed(std::int64_t v) const {
    if (v >= 0) return reduce(static_cast<u64>(v));
    u64 m = static_cast<u64>(-(v + 1)) + 1;
    m = reduce(m);
    return m == 0 ? 0 : q_ - m;
  }

 private:
  u64 q_ = 0;
  u64 ratio_hi_ = 0;
  u64 ratio_lo_ = 0;
};

bool is_prime(u64 n);

// Primes q < 2^bits with q = 1 (mod step), scanning downward; skips values in
// `exclude`.
std::vector<u64> find_ntt_primes(int bits, u64 step, std::size_t count,
                                 const std::vector<u64>& exclude = {});

// The smallest primitive 2n-th root of unity mod q (2n a power of two,
// q = 1 mod 2n).
u64 minimal_root_of_unity(u64 q, u64 two_n);

}  // namespace hhefl::he

#endif  // HHEFL_HE_MODARITH_HPP_
