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

#ifndef HHEFL_HE_CONTEXT_HPP_
#define HHEFL_HE_CONTEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hhefl/he/modarith.hpp"
#include "hhefl/he/ntt.hpp"

namespace hhefl::he {

inline constexpr u64 kDefaultPlaintextModulus = 65537;
inline constexpr std::size_t kDefaultPolyDegree = 4096;
inline constexpr int kDefaultDepthBudget = 3;

inline constexpr const char* kSecurityNotice =
    "NOT SECURITY-GRADE: reduced ring parameters sized for a desk-scale "
    "demonstration; do not protect real data with these keys.";

struct HeParams {
  std::size_t poly_degree = kDefaultPolyDegree;
  u64 plaintext_modulus = kDefaultPlaintextModulus;
  // The ciphertext modulus q is the product of these NTT-friendly primes.
  std::vector<u64> ciphertext_primes;
  int depth_budget = kDefaultDepthBudget;
  std::string security_note = kSecurityNotice;

  // Desk-scale defaults: four 60-bit primes (q of about 240 bits). Depth 3 and
  // the transciphering circuit are verified by the test suite.
  static HeParams desk_default(std::size_t poly_degree = kDefaultPolyDegree);
};

// Fast RNS base conversion of a centered value: given residues of
// x in (-M/2, M/2] over the source primes, produce x modulo every target
// prime. The correction multiple of M is recovered in floating point, exact
// whenever |x| stays clear of M/2.
class BaseConverter {
 public:
  BaseConverter(const std::vector<Modulus>& from, const std::vector<Modulus>& to);

  // in: from.size() rows of n values; out: to.size() rows of n values.
  void convert(const u64* in, u64* out, std::size_t n) const;

 private:
  std::vector<Modulus> from_, to_;
  std::vector<u64> punct_inv_, punct_inv_shoup_;  // [(M/q_i)^-1]_{q_i}
  std::vector<u64> punct_mod_to_;                 // [M/q_i]_{p_j}, i-major
  std::vector<u64> m_mod_to_;                     // [M]_{p_j}
  std::vector<long double> inv_from_;
};

// Immutable, validated parameter set with every precomputed table the scheme
// needs. Shared by keys and ciphertexts through shared_ptr<const HeContext>.
class HeContext {
 public:
  static std::shared_ptr<const HeContext> create(const HeParams& params);

  const HeParams& params() const { return params_; }
  std::uint64_t params_hash() const { return hash_; }
  std::size_t n() const { return params_.poly_degree; }
  std::size_t slot_count() const { return params_.poly_degree; }
  std::size_t row_size() const { return params_.poly_degree / 2; }
  const Modulus& t() const { return t_; }
  std::size_t q_count() const { return q_.size(); }
  const std::vector<Modulus>& q() const { return q_; }
  const std::vector<Modulus>& aux() const { return aux_; }
  const NttTables& q_ntt(std::size_t i) const { return q_ntt_[i]; }
  const NttTables& aux_ntt(std::size_t i) const { return aux_ntt_[i]; }
  const NttTables& t_ntt() const { return *t_ntt_; }
  double log2_q() const { return log2_q_; }

  // [floor(q/t)]_{q_i}
  u64 delta(std::size_t i) const { return delta_[i]; }
  // slot index -> evaluation index of the plaintext NTT
  const std::vector<std::uint32_t>& slot_to_eval() const { return slot_to_eval_; }
  // Evaluation-domain permutation implementing X -> X^3 (row rotation by one).
  const std::vector<std::uint32_t>& rotation_perm() const { return rotation_perm_; }

  const BaseConverter& q_to_aux() const { return *q_to_aux_; }
  const BaseConverter& aux_to_q() const { return *aux_to_q_; }
  const BaseConverter& q_to_t() const { return *q_to_t_; }
  u64 q_inv_mod_aux(std::size_t j) const { return q_inv_mod_aux_[j]; }
  u64 q_inv_mod_t() const { return q_inv_mod_t_; }

  // Key-switching gadget: each residue is split into base-2^digit_bits digits.
  int digit_bits() const { return 30; }
  std::size_t digits_per_prime() const { return digits_per_prime_; }
  std::size_t gadget_size() const { return q_.size() * digits_per_prime_; }

 private:
  HeContext() = default;

  HeParams params_;
  std::uint64_t hash_ = 0;
  Modulus t_;
  std::vector<Modulus> q_, aux_;
  std::vector<NttTables> q_ntt_, aux_ntt_;
  std::unique_ptr<NttTables> t_ntt_;
  std::vector<u64> delta_;
  std::vector<std::uint32_t> slot_to_eval_, rotation_perm_;
  std::unique_ptr<BaseConverter> q_to_aux_, aux_to_q_, q_to_t_;
  std::vector<u64> q_inv_mod_aux_;
  u64 q_inv_mod_t_ = 0;
  std::size_t digits_per_prime_ = 0;
  double log2_q_ = 0;
};

using ContextPtr = std::shared_ptr<const HeContext>;

}  // namespace hhefl::he

#endif  // HHEFL_HE_CONTEXT_HPP_
