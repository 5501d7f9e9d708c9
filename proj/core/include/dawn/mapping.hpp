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

#ifndef DAWN_MAPPING_HPP_
#define DAWN_MAPPING_HPP_

#include <cstdint>
#include <span>

#include <nlohmann/json.hpp>

#include "dawn/canonical_input.hpp"

namespace dawn {

enum class MappingKind { kIdentity, kMaskBin };

// Smoothing applied to an input before it is hashed. The model backend always
// sees the raw input; only the hash sees the mapped one.
//
// kMaskBin averages non-overlapping q x q tiles (integer floor) and keeps the
// top r bits of each average. With per_channel, a [C,H,W] input maps to
// [C,H/q,W/q]; without it the C channels of a tile are averaged together into
// [H/q,W/q]. [H,W] inputs map to [H/q,W/q] either way.
struct MappingConfig {
  MappingKind kind = MappingKind::kIdentity;
  std::uint32_t q = 1;
  std::uint32_t r = 7;
  bool per_channel = true;

  friend bool operator==(const MappingConfig&, const MappingConfig&) = default;
};

// Checks r in [1,7] and q >= 1 (kBadConfig), and that the input shape is
// [H,W] or [C,H,W] with q dividing H and W (kBadGeometry). No-op for identity.
void ValidateMapping(const MappingConfig& cfg, std::span<const std::uint32_t> input_shape);

CanonicalInput MapInput(const MappingConfig& cfg, const CanonicalInput& x);

// Slack guaranteed by mask-and-bin: perturbations keep the mapped value when
// every tile's averaged level stays inside its bin of `bin_width` levels.
struct BinTolerance {
  std::uint32_t q = 0;
  std::uint32_t r = 0;
  std::uint32_t bin_width = 0;  // 2^(8-r)
  friend bool operator==(const BinTolerance&, const BinTolerance&) = default;
};

// Throws kNotApplicable for identity, kBadConfig for r outside [1,7].
BinTolerance PerturbationBound(const MappingConfig& cfg);

void to_json(nlohmann::json& j, const MappingConfig& cfg);
void from_json(const nlohmann::json& j, MappingConfig& cfg);

}  // namespace dawn

#endif  // DAWN_MAPPING_HPP_
