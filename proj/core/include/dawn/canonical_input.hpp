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

#ifndef DAWN_CANONICAL_INPUT_HPP_
#define DAWN_CANONICAL_INPUT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dawn/codec.hpp"

namespace dawn {

enum class Dtype : std::uint8_t { kU8 = 0x01 };

// A flattened row-major tensor together with its shape and element type.
//
// Canonical byte string:
//   [dtype tag : 1][dim count : 1][dim_0 : 4 LE] ... [dim_n : 4 LE][elements]
// Equality and ordering are defined on that byte string, so two inputs with
// the same elements but different shapes are distinct.
class CanonicalInput {
 public:
  CanonicalInput() = default;

  Dtype dtype() const { return dtype_; }
  const std::vector<std::uint32_t>& shape() const { return shape_; }
  const Bytes& bytes() const { return bytes_; }
  const Bytes& canonical_bytes() const { return canonical_; }

  // SHA3-256 of the canonical byte string; the identity used by the trigger
  // store and the lookup backend.
  Digest digest() const;

  friend bool operator==(const CanonicalInput& a, const CanonicalInput& b) {
    return a.canonical_ == b.canonical_;
  }
  friend bool operator<(const CanonicalInput& a, const CanonicalInput& b) {
    return a.canonical_ < b.canonical_;
  }

 private:
  friend CanonicalInput Canonicalize(std::uint8_t, std::span<const std::uint32_t>,
                                     ByteView);

  Dtype dtype_ = Dtype::kU8;
  std::vector<std::uint32_t> shape_;
  Bytes bytes_;
  Bytes canonical_;
};

// Throws kUnsupportedDtype for tags other than 0x01 (u8) and kShapeMismatch
// when the shape is empty, has a zero dim, more than 255 dims, or does not
// multiply out to bytes.size().
CanonicalInput Canonicalize(std::uint8_t dtype_tag, std::span<const std::uint32_t> shape,
                            ByteView bytes);

inline CanonicalInput Canonicalize(Dtype dtype, std::span<const std::uint32_t> shape,
                                   ByteView bytes) {
  return Canonicalize(static_cast<std::uint8_t>(dtype), shape, bytes);
}

}  // namespace dawn

#endif  // DAWN_CANONICAL_INPUT_HPP_
