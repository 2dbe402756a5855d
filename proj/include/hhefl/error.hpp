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

#ifndef HHEFL_ERROR_HPP_
#define HHEFL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hhefl {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters that violate a documented invariant (non-prime modulus,
// overflow bound, mismatched lengths in configuration, ...).
class InvalidParams : public Error {
 public:
  using Error::Error;
};

// Caller supplied an argument outside the accepted domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Operands that were created under different parameter sets or keys.
class ParamMismatch : public Error {
 public:
  using Error::Error;
};

// A ciphertext-ciphertext product would exceed the multiplicative depth the
// parameters were sized for.
class DepthExhausted : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated byte input.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Authenticated decryption or signature check failed.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Message arrived in the wrong phase, from the wrong party, or a party could
// not complete its step.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Failure inside the OpenSSL backend.
class CryptoBackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace hhefl

#endif  // HHEFL_ERROR_HPP_
