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

#include "hhefl/he/modarith.hpp"

#include <algorithm>

#include "hhefl/error.hpp"

namespace hhefl::he {

Modulus::Modulus(u64 q) : q_(q) {
  if (q < 2 || q >= (u64{1} << 62)) throw InvalidParams("modulus out of range");
  const u128 two64 = static_cast<u128>(1) << 64;
  ratio_hi_ = static_cast<u64>(two64 / q);
  const u128 rem = two64 % q;
  ratio_lo_ = static_cast<u64>((rem << 64) / q);
}

u64 Modulus::pow(u64 base, u64 exp) const {
  u64 result = 1 % q_;
  base = reduce(base);
  while (exp != 0) {
    if (exp & 1) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return result;
}

u64 Modulus::inv(u64 a) const {
  a = reduce(a);
  if (a == 0) throw InvalidArgument("zero has no inverse");
  return pow(a, q_ - 2);
}

namespace {

u64 mulmod_slow(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod_slow(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_slow(r, a, m);
    a = mulmod_slow(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic witness set for all 64-bit n.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod_slow(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod_slow(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> find_ntt_primes(int bits, u64 step, std::size_t count,
                                 const std::vector<u64>& exclude) {
  if (bits < 2 || bits > 61) throw InvalidParams("prime size must be in [2, 61] bits");
  std::vector<u64> out;
  u64 upper = u64{1} << bits;
  u64 candidate = ((upper - 1) / step) * step + 1;
  if (candidate >= upper) candidate -= step;
  while (out.size() < count && candidate > step) {
    if (is_prime(candidate) &&
        std::find(exclude.begin(), exclude.end(), candidate) == exclude.end()) {
      out.push_back(candidate);
    }
    candidate -= step;
  }
  if (out.size() < count) throw InvalidParams("not enough NTT-friendly primes");
  return out;
}

u64 minimal_root_of_unity(u64 q, u64 two_n) {
  if ((two_n & (two_n - 1)) != 0) throw InvalidParams("root order must be a power of two");
  if ((q - 1) % two_n != 0) throw InvalidParams("modulus is not 1 mod 2N");
  // For a power-of-two order, r is primitive iff r^(order/2) = -1.
  u64 root = 0;
  for (u64 x = 2; x < q; ++x) {
    u64 r = powmod_slow(x, (q - 1) / two_n, q);
    if (powmod_slow(r, two_n / 2, q) == q - 1) {
      root = r;
      break;
    }
  }
  if (root == 0) throw InvalidParams("no primitive root of unity");
  // Smallest primitive root so tables are canonical.
  u64 best = root;
  u64 step = mulmod_slow(root, root, q);
  u64 cur = root;
  for (u64 i = 0; i < two_n / 2; ++i) {
    if (cur < best) best = cur;
    cur = mulmod_slow(cur, step, q);
  }
  return best;
}

}  // namespace hhefl::he
