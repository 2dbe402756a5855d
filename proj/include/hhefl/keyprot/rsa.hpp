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


// Thin RSA layer over OpenSSL 3: OAEP(SHA-256, MGF1-SHA-256) encryption and
// PSS(SHA-256) signatures. Keys are reference-counted EVP_PKEY handles and
// immutable once created.

#ifndef HHEFL_KEYPROT_RSA_HPP_
#define HHEFL_KEYPROT_RSA_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hhefl/bytes.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace hhefl::keyprot {

// le64(index) || le64(count)
Bytes chunk_label(std::size_t index, std::size_t count);

class RsaPublicKey {
 public:
  RsaPublicKey() = default;
  // Big-endian modulus and exponent.
  static RsaPublicKey from_components(std::span<const std::uint8_t> n, std::span<const std::uint8_t> e);

  int bits() const;
  std::size_t modulus_bytes() const { return static_cast<std::size_t>((bits() + 7) / 8); }
  Bytes modulus() const;
  Bytes exponent() const;
  // Canonical encoding signed by the TPA: blob(n) || blob(e).
  Bytes canonical_encoding() const;

  // `label` is the OAEP associated label (empty by default).
  Bytes oaep_encrypt(std::span<const std::uint8_t> plaintext,
                     std::span<const std::uint8_t> label = {}) const;
  // Splits `data` into `chunk`-byte segments (last one shorter) and encrypts
  // each independently, in order. Segment i carries the label
  // chunk_label(i, count), so a moved or dropped chunk fails to decrypt.
  std::vector<Bytes> oaep_encrypt_chunks(std::span<const std::uint8_t> data, std::size_t chunk) const;
  bool pss_verify(std::span<const std::uint8_t> message, std::span<const std::uint8_t> signature) const;

  EVP_PKEY* handle() const { return key_.get(); }
  explicit operator bool() const { return static_cast<bool>(key_); }

 private:
  friend class RsaPrivateKey;
  std::shared_ptr<EVP_PKEY> key_;
};

class RsaPrivateKey {
 public:
  RsaPrivateKey() = default;
  // Fresh key from the OpenSSL RNG; not reproducible from a seed.
  static RsaPrivateKey generate(int bits);
  static RsaPrivateKey from_pem(const std::string& pem);

  RsaPublicKey public_key() const;
  int bits() const;
  std::string to_pem() const;

  // Throws IntegrityError when the padding check fails.
  Bytes oaep_decrypt(std::span<const std::uint8_t> ciphertext,
                     std::span<const std::uint8_t> label = {}) const;
  Bytes pss_sign(std::span<const std::uint8_t> message) const;

  explicit operator bool() const { return static_cast<bool>(key_); }

 private:
  friend class OaepDecryptor;
  std::shared_ptr<EVP_PKEY> key_;
};

// Reuses one OpenSSL decryption context across many chunks.
class OaepDecryptor {
 public:
  explicit OaepDecryptor(const RsaPrivateKey& key);
  ~OaepDecryptor();
  OaepDecryptor(const OaepDecryptor&) = delete;
  OaepDecryptor& operator=(const OaepDecryptor&) = delete;

  Bytes decrypt(std::span<const std::uint8_t> ciphertext, std::span<const std::uint8_t> label = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hhefl::keyprot

#endif  // HHEFL_KEYPROT_RSA_HPP_
