/* Copyright 2026 The DAWN Gateway Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DAWN_HASHCORE_HPP_
#define DAWN_HASHCORE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dawn/canonical_input.hpp"
#include "dawn/codec.hpp"
#include "dawn/mapping.hpp"

namespace dawn {

// Exact watermark ratio r_w = numerator / denominator with 0 <= r_w <= 1.
class WatermarkRatio {
 public:
  WatermarkRatio() = default;
  // Reduces the fraction. Throws kBadConfig for den == 0 or num > den.
  WatermarkRatio(std::uint64_t numerator, std::uint64_t denominator);

  // Accepts "p/q", "1", "0" or a decimal such as "0.00426" (at most 18
  // fractional digits). Parsing is exact.
  static WatermarkRatio Parse(std::string_view text);

  std::uint64_t numerator() const { return num_; }
  std::uint64_t denominator() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == den_; }
  double ToDouble() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string ToString() const;

  // floor(r_w * 2^128). nullopt for r_w == 1, whose threshold (2^128) does
  // not fit in 128 bits and means "always watermark".
  std::optional<u128> Threshold() const;

  friend bool operator==(const WatermarkRatio&, const WatermarkRatio&) = default;

 private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

using SecretKey = std::array<std::uint8_t, 32>;

// 64 hex characters, surrounding whitespace ignored.
SecretKey ParseSecretKey(std::string_view hex);
SecretKey LoadSecretKeyFile(const std::string& path);
SecretKey LoadSecretKeyEnv(const std::string& variable);
// Fresh key from the OpenSSL CSPRNG.
SecretKey GenerateSecretKey();

struct ModelKeySet {
  SecretKey k_w{};
  WatermarkRatio r_w;
  MappingConfig mapping;
};

// The two 128-bit halves of HMAC-SHA256(k_w, canonical bytes), read
// big-endian. `lo` drives the watermark decision, `hi` keys the permutation.
struct HashSplit {
  u128 lo = 0;
  u128 hi = 0;

  friend bool operator==(const HashSplit&, const HashSplit&) = default;
};

// `mapped` must already be the output of MapInput.
HashSplit HmacSplit(const ModelKeySet& keys, const CanonicalInput& mapped);

// True iff split.lo < floor(r_w * 2^128); always true for r_w == 1.
bool WatermarkDecision(const ModelKeySet& keys, const HashSplit& split);

// MapInput followed by HmacSplit.
HashSplit SplitForInput(const ModelKeySet& keys, const CanonicalInput& raw);

}  // namespace dawn

#endif  // DAWN_HASHCORE_HPP_
