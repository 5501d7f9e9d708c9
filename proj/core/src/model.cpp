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

#include "dawn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;

std::size_t ElementCount(const std::vector<std::uint32_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

std::vector<double> Softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

ModelSpec ParseModel(std::string file_bytes) {
  json doc;
  try {
    doc = json::parse(file_bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }

  ModelSpec spec;
  try {
    spec.model_id = doc.at("model_id").get<std::string>();
    spec.m = doc.at("m").get<std::size_t>();
    spec.input_shape = doc.at("input_shape").get<std::vector<std::uint32_t>>();
    const std::string kind = doc.at("backend").get<std::string>();
    const json& payload = doc.at("payload");
    if (spec.m < 2) throw Error(ErrorCode::kBadConfig, "model needs m >= 2");
    if (spec.input_shape.empty() ||
        std::any_of(spec.input_shape.begin(), spec.input_shape.end(),
                    [](std::uint32_t d) { return d == 0; })) {
      throw Error(ErrorCode::kBadConfig, "input_shape dims must be >= 1");
    }

    if (kind == "lookup") {
      LookupBackend table;
      for (const json& entry : payload.at("entries")) {
        PredictionVector pv(entry.at("probs").get<std::vector<double>>());
        if (pv.size() != spec.m) {
          throw Error(ErrorCode::kBadConfig, "lookup entry has wrong class count");
        }
        table.entries.emplace(DigestFromHex(entry.at("input_digest").get<std::string>()),
                              std::move(pv));
      }
      spec.backend = std::move(table);
    } else if (kind == "linear") {
      LinearBackend lin;
      lin.weights = payload.at("weights").get<std::vector<std::vector<double>>>();
      lin.bias = payload.at("bias").get<std::vector<double>>();
      const std::size_t n = ElementCount(spec.input_shape);
      if (lin.weights.size() != spec.m || lin.bias.size() != spec.m) {
        throw Error(ErrorCode::kBadConfig, "linear backend needs m weight rows and m biases");
      }
      for (const auto& row : lin.weights) {
        if (row.size() != n) {
          throw Error(ErrorCode::kBadConfig, "weight row length must equal product(input_shape)");
        }
      }
      spec.backend = std::move(lin);
    } else {
      throw Error(ErrorCode::kBadConfig, "unknown backend " + kind);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  spec.file_bytes = std::move(file_bytes);
  return spec;
}

ModelSpec LoadModelFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot read model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseModel(ss.str());
}

ModelSpec BuildModel(const std::string& model_id, std::size_t m,
                     const std::vector<std::uint32_t>& input_shape,
                     const std::variant<LookupBackend, LinearBackend>& backend) {
  json doc;
  doc["model_id"] = model_id;
  doc["m"] = m;
  doc["input_shape"] = input_shape;
  if (const auto* table = std::get_if<LookupBackend>(&backend)) {
    doc["backend"] = "lookup";
    json entries = json::array();
    for (const auto& [digest, pv] : table->entries) {
      entries.push_back({{"input_digest", HexEncode(digest)}, {"probs", pv.probs()}});
    }
    doc["payload"] = {{"entries", entries}};
  } else {
    const auto& lin = std::get<LinearBackend>(backend);
    doc["backend"] = "linear";
    doc["payload"] = {{"weights", lin.weights}, {"bias", lin.bias}};
  }
  return ParseModel(doc.dump(2) + "\n");
}

PredictionVector Predict(const ModelSpec& spec, const CanonicalInput& x) {
  if (x.shape() != spec.input_shape) {
    throw Error(ErrorCode::kShapeMismatch, "input shape does not match model " + spec.model_id);
  }
  if (const auto* table = std::get_if<LookupBackend>(&spec.backend)) {
    const auto it = table->entries.find(x.digest());
    if (it == table->entries.end()) {
      throw Error(ErrorCode::kUnknownInput, "no lookup entry for input " + HexEncode(x.digest()));
    }
    return it->second;
  }
  const auto& lin = std::get<LinearBackend>(spec.backend);
  const auto& px = x.bytes();
  std::vector<double> logits(spec.m);
  for (std::size_t c = 0; c < spec.m; ++c) {
    double acc = lin.bias[c];
    const auto& row = lin.weights[c];
    for (std::size_t i = 0; i < px.size(); ++i) acc += row[i] * (px[i] / 255.0);
    logits[c] = acc;
  }
  return PredictionVector(Softmax(logits));
}

Digest ModelDigest(const ModelSpec& spec) { return Sha3_256(AsBytes(spec.file_bytes)); }

}  // namespace dawn
