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

#include "dawn/hashcore.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "dawn/error.hpp"

namespace dawn {

CanonicalInput Canonicalize(std::uint8_t dtype_tag, std::span<const std::uint32_t> shape,
                            ByteView bytes) {
  if (dtype_tag != static_cast<std::uint8_t>(Dtype::kU8)) {
    throw Error(ErrorCode::kUnsupportedDtype,
                "only u8 (0x01) inputs are supported, got tag " + std::to_string(dtype_tag));
  }
  if (shape.empty() || shape.size() > 255) {
    throw Error(ErrorCode::kShapeMismatch, "shape must have 1..255 dims");
  }
  std::uint64_t count = 1;
  for (std::uint32_t d : shape) {
    if (d == 0) throw Error(ErrorCode::kShapeMismatch, "shape dims must be >= 1");
    count *= d;
    if (count > (std::uint64_t{1} << 40)) {
      throw Error(ErrorCode::kShapeMismatch, "shape too large");
    }
  }
  if (count != bytes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "shape implies " + std::to_string(count) +
                                               " bytes, got " + std::to_string(bytes.size()));
  }

  CanonicalInput x;
  x.dtype_ = Dtype::kU8;
  x.shape_.assign(shape.begin(), shape.end());
  x.bytes_.assign(bytes.begin(), bytes.end());
  x.canonical_.reserve(2 + 4 * shape.size() + bytes.size());
  x.canonical_.push_back(dtype_tag);
  x.canonical_.push_back(static_cast<std::uint8_t>(shape.size()));
  for (std::uint32_t d : shape) {
    for (int i = 0; i < 4; ++i) x.canonical_.push_back(static_cast<std::uint8_t>(d >> (8 * i)));
  }
  x.canonical_.insert(x.canonical_.end(), bytes.begin(), bytes.end());
  return x;
}

Digest CanonicalInput::digest() const { return Sha3_256(canonical_); }

WatermarkRatio::WatermarkRatio(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) throw Error(ErrorCode::kBadConfig, "r_w denominator is zero");
  if (numerator > denominator) throw Error(ErrorCode::kBadConfig, "r_w exceeds 1");
  const std::uint64_t g = numerator == 0 ? denominator : std::gcd(numerator, denominator);
  num_ = numerator / g;
  den_ = denominator / g;
}

WatermarkRatio WatermarkRatio::Parse(std::string_view text) {
  auto digits_only = [](std::string_view s) {
    return !s.empty() && s.size() <= 19 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  auto to_u64 = [](std::string_view s) { return std::stoull(std::string(s)); };

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!digits_only(num) || !digits_only(den)) {
      throw Error(ErrorCode::kBadConfig, "bad r_w fraction: " + std::string(text));
    }
    return WatermarkRatio(to_u64(num), to_u64(den));
  }
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  const auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (!digits_only(whole) || (dot != std::string_view::npos && !digits_only(frac)) ||
      frac.size() > 18) {
    throw Error(ErrorCode::kBadConfig, "bad r_w value: " + std::string(text));
  }
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::uint64_t w = to_u64(whole);
  if (w > 1) throw Error(ErrorCode::kBadConfig, "r_w exceeds 1");
  const std::uint64_t f = frac.empty() ? 0 : to_u64(frac);
  return WatermarkRatio(w * den + f, den);
}

std::string WatermarkRatio::ToString() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<u128> WatermarkRatio::Threshold() const {
  if (is_one()) return std::nullopt;
  // Binary long division of num * 2^128 by den; the remainder stays < 2^65.
  u128 rem = num_;
  u128 quotient = 0;
  for (int bit = 0; bit < 128; ++bit) {
    rem <<= 1;
    quotient <<= 1;
    if (rem >= den_) {
      rem -= den_;
      quotient |= 1;
    }
  }
  return quotient;
}

SecretKey ParseSecretKey(std::string_view hex) {
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.front()))) hex.remove_prefix(1);
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.remove_suffix(1);
  if (hex.size() != 64) {
    throw Error(ErrorCode::kBadConfig, "key must be exactly 64 hex characters");
  }
  const Bytes raw = HexDecode(hex);
  SecretKey key{};
  std::copy(raw.begin(), raw.end(), key.begin());
  return key;
}

SecretKey LoadSecretKeyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot read key file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSecretKey(ss.str());
}

SecretKey LoadSecretKeyEnv(const std::string& variable) {
  const char* value = std::getenv(variable.c_str());
  if (value == nullptr) throw Error(ErrorCode::kBadConfig, "environment variable " + variable + " is not set");
  return ParseSecretKey(value);
}

SecretKey GenerateSecretKey() {
  SecretKey key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  return key;
}

HashSplit HmacSplit(const ModelKeySet& keys, const CanonicalInput& mapped) {
  const Digest mac = HmacSha256(keys.k_w, mapped.canonical_bytes());
  const ByteView view(mac);
  return {LoadBigEndian128(view.first(16)), LoadBigEndian128(view.last(16))};
}

bool WatermarkDecision(const ModelKeySet& keys, const HashSplit& split) {
  const auto threshold = keys.r_w.Threshold();
  if (!threshold) return true;
  return split.lo < *threshold;
}

HashSplit SplitForInput(const ModelKeySet& keys, const CanonicalInput& raw) {
  return HmacSplit(keys, MapInput(keys.mapping, raw));
}

}  // namespace dawn
