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

#include "dawn/mapping.hpp"

#include <string>

#include "dawn/error.hpp"

namespace dawn {
namespace {

void CheckBits(const MappingConfig& cfg) {
  if (cfg.r < 1 || cfg.r > 7) {
    throw Error(ErrorCode::kBadConfig, "mask_bin r must be in [1,7], got " +
                                           std::to_string(cfg.r));
  }
  if (cfg.q < 1) throw Error(ErrorCode::kBadConfig, "mask_bin q must be >= 1");
}

}  // namespace

void ValidateMapping(const MappingConfig& cfg, std::span<const std::uint32_t> shape) {
  if (cfg.kind == MappingKind::kIdentity) return;
  CheckBits(cfg);
  if (shape.size() != 2 && shape.size() != 3) {
    throw Error(ErrorCode::kBadGeometry, "mask_bin needs an [H,W] or [C,H,W] input");
  }
  const std::uint32_t h = shape[shape.size() - 2];
  const std::uint32_t w = shape[shape.size() - 1];
  if (h % cfg.q != 0 || w % cfg.q != 0) {
    throw Error(ErrorCode::kBadGeometry, "q=" + std::to_string(cfg.q) +
                                             " does not divide " + std::to_string(h) +
                                             "x" + std::to_string(w));
  }
}

CanonicalInput MapInput(const MappingConfig& cfg, const CanonicalInput& x) {
  if (cfg.kind == MappingKind::kIdentity) return x;
  ValidateMapping(cfg, x.shape());

  const auto& shape = x.shape();
  const std::uint32_t channels = shape.size() == 3 ? shape[0] : 1;
  const std::uint32_t h = shape[shape.size() - 2];
  const std::uint32_t w = shape[shape.size() - 1];
  const std::uint32_t q = cfg.q;
  const std::uint32_t oh = h / q;
  const std::uint32_t ow = w / q;
  const bool pooled = shape.size() == 3 && !cfg.per_channel;
  const std::uint32_t out_channels = pooled ? 1 : channels;
  const std::uint64_t cell_count =
      static_cast<std::uint64_t>(q) * q * (pooled ? channels : 1);
  const unsigned shift = 8 - cfg.r;
  const auto& px = x.bytes();

  Bytes out(static_cast<std::size_t>(out_channels) * oh * ow);
  for (std::uint32_t oc = 0; oc < out_channels; ++oc) {
    for (std::uint32_t ty = 0; ty < oh; ++ty) {
      for (std::uint32_t tx = 0; tx < ow; ++tx) {
        std::uint64_t sum = 0;
        const std::uint32_t c_begin = pooled ? 0 : oc;
        const std::uint32_t c_end = pooled ? channels : oc + 1;
        for (std::uint32_t c = c_begin; c < c_end; ++c) {
          for (std::uint32_t dy = 0; dy < q; ++dy) {
            const std::size_t row =
                (static_cast<std::size_t>(c) * h + ty * q + dy) * w + tx * q;
            for (std::uint32_t dx = 0; dx < q; ++dx) sum += px[row + dx];
          }
        }
        const auto avg = static_cast<std::uint8_t>(sum / cell_count);
        out[(static_cast<std::size_t>(oc) * oh + ty) * ow + tx] =
            static_cast<std::uint8_t>(avg >> shift);
      }
    }
  }

  std::vector<std::uint32_t> out_shape;
  if (shape.size() == 3 && !pooled) out_shape.push_back(channels);
  out_shape.push_back(oh);
  out_shape.push_back(ow);
  return Canonicalize(Dtype::kU8, out_shape, out);
}

BinTolerance PerturbationBound(const MappingConfig& cfg) {
  if (cfg.kind == MappingKind::kIdentity) {
    throw Error(ErrorCode::kNotApplicable, "identity mapping has no tolerance");
  }
  CheckBits(cfg);
  return {cfg.q, cfg.r, 1u << (8 - cfg.r)};
}

void to_json(nlohmann::json& j, const MappingConfig& cfg) {
  if (cfg.kind == MappingKind::kIdentity) {
    j = nlohmann::json{{"kind", "identity"}};
    return;
  }
  j = nlohmann::json{
      {"kind", "mask_bin"}, {"q", cfg.q}, {"r", cfg.r}, {"per_channel", cfg.per_channel}};
}

void from_json(const nlohmann::json& j, MappingConfig& cfg) {
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") {
    cfg = MappingConfig{};
    return;
  }
  if (kind != "mask_bin") throw Error(ErrorCode::kBadConfig, "unknown mapping kind " + kind);
  cfg.kind = MappingKind::kMaskBin;
  cfg.q = j.at("q").get<std::uint32_t>();
  cfg.r = j.at("r").get<std::uint32_t>();
  cfg.per_channel = j.value("per_channel", true);
  CheckBits(cfg);
}

}  // namespace dawn
