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

#ifndef DAWN_MODEL_HPP_
#define DAWN_MODEL_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dawn/canonical_input.hpp"
#include "dawn/codec.hpp"
#include "dawn/permute.hpp"

namespace dawn {

// Table from canonical input digest to a fixed prediction.
struct LookupBackend {
  std::map<Digest, PredictionVector> entries;
};

// softmax(W x + b) with x = bytes / 255.
struct LinearBackend {
  std::vector<std::vector<double>> weights;  // m rows of product(input_shape)
  std::vector<double> bias;                  // m entries
};

// A victim (or suspect) model together with the exact bytes of the model file
// it was loaded from. The commitment digest is taken over those bytes as-is.
struct ModelSpec {
  std::string model_id;
  std::size_t m = 0;
  std::vector<std::uint32_t> input_shape;
  std::variant<LookupBackend, LinearBackend> backend;
  std::string file_bytes;
};

// Parses and validates the JSON model file format:
//   {"model_id": str, "m": int, "input_shape": [int...],
//    "backend": "lookup" | "linear",
//    "payload": {"entries": [{"input_digest": hex, "probs": [...]}, ...]}
//            |  {"weights": [[...], ...], "bias": [...]}}
// Throws kParseError / kBadConfig on malformed content.
ModelSpec ParseModel(std::string file_bytes);
ModelSpec LoadModelFile(const std::string& path);

// Serializes a spec to the model file format (2-space indented JSON) and
// parses it back so that file_bytes is populated.
ModelSpec BuildModel(const std::string& model_id, std::size_t m,
                     const std::vector<std::uint32_t>& input_shape,
                     const std::variant<LookupBackend, LinearBackend>& backend);

// Throws kShapeMismatch when x's shape differs from input_shape and
// kUnknownInput when a lookup table has no entry for x.
PredictionVector Predict(const ModelSpec& spec, const CanonicalInput& x);

// SHA3-256 over the model file bytes.
Digest ModelDigest(const ModelSpec& spec);

// Softmax with max subtraction.
std::vector<double> Softmax(const std::vector<double>& logits);

}  // namespace dawn

#endif  // DAWN_MODEL_HPP_
