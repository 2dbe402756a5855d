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


#include "hhefl/keyprot/rsa.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>

#include <algorithm>

#include "hhefl/error.hpp"

namespace hhefl::keyprot {

namespace {

[[noreturn]] void fail(const char* what) {
  ERR_clear_error();
  throw CryptoBackendError(what);
}

std::shared_ptr<EVP_PKEY> wrap(EVP_PKEY* k) {
  if (!k) fail("RSA key construction failed");
  return {k, &EVP_PKEY_free};
}

using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using Bn = std::unique_ptr<BIGNUM, decltype(&BN_free)>;

void set_oaep(EVP_PKEY_CTX* ctx) {
  if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) <= 0 ||
      EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) <= 0) {
    fail("OAEP setup failed");
  }
}

PkeyCtx encrypt_ctx(EVP_PKEY* key) {
  PkeyCtx ctx(EVP_PKEY_CTX_new(key, nullptr), &EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) <= 0) fail("RSA encrypt init failed");
  set_oaep(ctx.get());
  return ctx;
}

// OpenSSL takes ownership of the label buffer. An empty label is the
// context default and is not set explicitly.
void set_label(EVP_PKEY_CTX* ctx, std::span<const std::uint8_t> label) {
  if (label.empty()) return;
  void* buf = OPENSSL_memdup(label.data(), label.size());
  if (!buf) fail("out of memory");
  if (EVP_PKEY_CTX_set0_rsa_oaep_label(ctx, buf, static_cast<int>(label.size())) <= 0) {
    OPENSSL_free(buf);
    fail("OAEP label setup failed");
  }
}

Bytes encrypt_with(EVP_PKEY_CTX* ctx, std::span<const std::uint8_t> in,
                   std::span<const std::uint8_t> label) {
  set_label(ctx, label);
  std::size_t len = 0;
  if (EVP_PKEY_encrypt(ctx, nullptr, &len, in.data(), in.size()) <= 0) fail("RSA encrypt sizing failed");
  Bytes out(len);
  if (EVP_PKEY_encrypt(ctx, out.data(), &len, in.data(), in.size()) <= 0) {
    fail("RSA-OAEP encryption failed (input too long?)");
  }
  out.resize(len);
  return out;
}

Bytes bn_param(EVP_PKEY* key, const char* name) {
  BIGNUM* raw = nullptr;
  if (EVP_PKEY_get_bn_param(key, name, &raw) != 1) fail("cannot read RSA parameter");
  Bn bn(raw, &BN_free);
  Bytes out(static_cast<std::size_t>(BN_num_bytes(bn.get())));
  BN_bn2bin(bn.get(), out.data());
  return out;
}

}  // namespace

RsaPublicKey RsaPublicKey::from_components(std::span<const std::uint8_t> n,
                                           std::span<const std::uint8_t> e) {
  if (n.empty() || e.empty()) throw ParseError("empty RSA component");
  Bn bn_n(BN_bin2bn(n.data(), static_cast<int>(n.size()), nullptr), &BN_free);
  Bn bn_e(BN_bin2bn(e.data(), static_cast<int>(e.size()), nullptr), &BN_free);
  std::unique_ptr<OSSL_PARAM_BLD, decltype(&OSSL_PARAM_BLD_free)> bld(OSSL_PARAM_BLD_new(),
                                                                       &OSSL_PARAM_BLD_free);
  if (!bn_n || !bn_e || !bld || !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, bn_n.get()) ||
      !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, bn_e.get())) {
    fail("RSA parameter build failed");
  }
  std::unique_ptr<OSSL_PARAM, decltype(&OSSL_PARAM_free)> params(OSSL_PARAM_BLD_to_param(bld.get()),
                                                                 &OSSL_PARAM_free);
  PkeyCtx ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr), &EVP_PKEY_CTX_free);
  EVP_PKEY* key = nullptr;
  if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) <= 0 ||
      EVP_PKEY_fromdata(ctx.get(), &key, EVP_PKEY_PUBLIC_KEY, params.get()) <= 0) {
    fail("RSA public key import failed");
  }
  RsaPublicKey pk;
  pk.key_ = wrap(key);
  return pk;
}

int RsaPublicKey::bits() const { return EVP_PKEY_get_bits(key_.get()); }
Bytes RsaPublicKey::modulus() const { return bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_N); }
Bytes RsaPublicKey::exponent() const { return bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_E); }

Bytes RsaPublicKey::canonical_encoding() const {
  ByteWriter w;
  w.blob(modulus());
  w.blob(exponent());
  return std::move(w).take();
}

Bytes chunk_label(std::size_t index, std::size_t count) {
  ByteWriter w;
  w.u64(index);
  w.u64(count);
  return std::move(w).take();
}

Bytes RsaPublicKey::oaep_encrypt(std::span<const std::uint8_t> plaintext,
                                 std::span<const std::uint8_t> label) const {
  auto ctx = encrypt_ctx(key_.get());
  return encrypt_with(ctx.get(), plaintext, label);
}

std::vector<Bytes> RsaPublicKey::oaep_encrypt_chunks(std::span<const std::uint8_t> data,
                                                     std::size_t chunk) const {
  if (chunk == 0) throw InvalidArgument("chunk size must be positive");
  auto ctx = encrypt_ctx(key_.get());
  const std::size_t count = (data.size() + chunk - 1) / chunk;
  std::vector<Bytes> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = i * chunk;
    out.push_back(encrypt_with(ctx.get(), data.subspan(pos, std::min(chunk, data.size() - pos)),
                               chunk_label(i, count)));
  }
  return out;
}

bool RsaPublicKey::pss_verify(std::span<const std::uint8_t> message,
                              std::span<const std::uint8_t> signature) const {
  MdCtx md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_PKEY_CTX* pctx = nullptr;
  if (!md || EVP_DigestVerifyInit(md.get(), &pctx, EVP_sha256(), nullptr, key_.get()) <= 0 ||
      EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PSS_PADDING) <= 0 ||
      EVP_PKEY_CTX_set_rsa_pss_saltlen(pctx, RSA_PSS_SALTLEN_DIGEST) <= 0) {
    fail("PSS verify setup failed");
  }
  const int rc = EVP_DigestVerify(md.get(), signature.data(), signature.size(), message.data(), message.size());
  ERR_clear_error();
  return rc == 1;
}

RsaPrivateKey RsaPrivateKey::generate(int bits) {
  if (bits != 1024 && bits != 2048 && bits != 3072 && bits != 4096) {
    throw InvalidParams("RSA modulus must be 1024, 2048, 3072 or 4096 bits");
  }
  RsaPrivateKey k;
  k.key_ = wrap(EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<std::size_t>(bits)));
  return k;
}

RsaPrivateKey RsaPrivateKey::from_pem(const std::string& pem) {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())),
                                                &BIO_free);
  EVP_PKEY* key = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr) : nullptr;
  if (!key) {
    ERR_clear_error();
    throw ParseError("not a PEM private key");
  }
  RsaPrivateKey k;
  k.key_ = wrap(key);
  return k;
}

RsaPublicKey RsaPrivateKey::public_key() const {
  RsaPublicKey pk = RsaPublicKey::from_components(bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_N),
                                                  bn_param(key_.get(), OSSL_PKEY_PARAM_RSA_E));
  return pk;
}

int RsaPrivateKey::bits() const { return EVP_PKEY_get_bits(key_.get()); }

std::string RsaPrivateKey::to_pem() const {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), &BIO_free);
  if (!bio || PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1) {
    fail("PEM export failed");
  }
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return {data, static_cast<std::size_t>(len)};
}

Bytes RsaPrivateKey::oaep_decrypt(std::span<const std::uint8_t> ciphertext,
                                  std::span<const std::uint8_t> label) const {
  return OaepDecryptor(*this).decrypt(ciphertext, label);
}

Bytes RsaPrivateKey::pss_sign(std::span<const std::uint8_t> message) const {
  MdCtx md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_PKEY_CTX* pctx = nullptr;
  if (!md || EVP_DigestSignInit(md.get(), &pctx, EVP_sha256(), nullptr, key_.get()) <= 0 ||
      EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PSS_PADDING) <= 0 ||
      EVP_PKEY_CTX_set_rsa_pss_saltlen(pctx, RSA_PSS_SALTLEN_DIGEST) <= 0) {
    fail("PSS sign setup failed");
  }
  std::size_t len = 0;
  if (EVP_DigestSign(md.get(), nullptr, &len, message.data(), message.size()) <= 0) fail("PSS sizing failed");
  Bytes sig(len);
  if (EVP_DigestSign(md.get(), sig.data(), &len, message.data(), message.size()) <= 0) fail("PSS sign failed");
  sig.resize(len);
  return sig;
}

struct OaepDecryptor::Impl {
  std::shared_ptr<EVP_PKEY> key;
  PkeyCtx ctx{nullptr, &EVP_PKEY_CTX_free};
  bool labelled = false;

  void reset() {
    ctx.reset(EVP_PKEY_CTX_new(key.get(), nullptr));
    if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) <= 0) fail("RSA decrypt init failed");
    set_oaep(ctx.get());
    labelled = false;
  }
};

OaepDecryptor::OaepDecryptor(const RsaPrivateKey& key) : impl_(std::make_unique<Impl>()) {
  impl_->key = key.key_;
  impl_->reset();
}

OaepDecryptor::~OaepDecryptor() = default;

Bytes OaepDecryptor::decrypt(std::span<const std::uint8_t> ciphertext,
                             std::span<const std::uint8_t> label) {
  if (label.empty() && impl_->labelled) impl_->reset();
  set_label(impl_->ctx.get(), label);
  impl_->labelled = !label.empty();
  std::size_t len = 0;
  if (EVP_PKEY_decrypt(impl_->ctx.get(), nullptr, &len, ciphertext.data(), ciphertext.size()) <= 0) {
    ERR_clear_error();
    throw IntegrityError("RSA-OAEP decryption failed");
  }
  Bytes out(len);
  if (EVP_PKEY_decrypt(impl_->ctx.get(), out.data(), &len, ciphertext.data(), ciphertext.size()) <= 0) {
    ERR_clear_error();
    throw IntegrityError("RSA-OAEP decryption failed");
  }
  out.resize(len);
  return out;
}

}  // namespace hhefl::keyprot
