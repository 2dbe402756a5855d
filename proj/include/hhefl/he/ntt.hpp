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

#ifndef HHEFL_HE_NTT_HPP_
#define HHEFL_HE_NTT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hhefl/he/modarith.hpp"

namespace hhefl::he {

// Negacyclic transform over Z_q[X]/(X^N + 1).
//
// forward() maps coefficients a_0..a_{N-1} to evaluations
// A_j = a(psi^(2j+1)), j = 0..N-1, in natural order, where psi is the
// smallest primitive 2N-th root of unity mod q. Evaluation index j therefore
// corresponds to the odd exponent 2j+1, which is what the slot encoder and
// the Galois permutation rely on.
class NttTables {
 public:
  NttTables(const Modulus& q, std::size_t n);

  void forward(std::span<u64> a) const;
  void inverse(std::span<u64> a) const;

  const Modulus& modulus() const { return q_; }
  std::size_t size() const { return n_; }
  u64 psi() const { return psi_; }

 private:
  void cyclic(std::span<u64> a, const std::vector<u64>& w, const std::vector<u64>& w_shoup) const;

  Modulus q_;
  std::size_t n_;
  u64 psi_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<u64> psi_pow_, psi_pow_shoup_;          // psi^i
  std::vector<u64> psi_inv_pow_, psi_inv_pow_shoup_;  // psi^-i / N
  std::vector<u64> omega_, omega_shoup_;              // per-stage twiddles
  std::vector<u64> omega_inv_, omega_inv_shoup_;
};

}  // namespace hhefl::he

#endif  // HHEFL_HE_NTT_HPP_
