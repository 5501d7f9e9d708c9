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

#ifndef DAWN_SIMATTACK_HPP_
#define DAWN_SIMATTACK_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dawn/gateway.hpp"
#include "dawn/model.hpp"
#include "dawn/stats.hpp"
#include "dawn/triggerstore.hpp"
#include "dawn/verify.hpp"

namespace dawn {

// Parameters of a simulated surrogate model. Training is not simulated;
// retention stands in for the surrogate's watermark accuracy.
struct SurrogateSim {
  // Probability that a memorized input is answered with the class the
  // gateway returned for it (b_class for triggers).
  double retention = 1.0;
  // Probability that an unseen input is answered with the honest class.
  double oracle_acc = 0.0;
  std::uint64_t seed = 0;
};

struct Observation {
  CanonicalInput input;
  std::size_t response_class = 0;
};

// A class-only suspect whose answers are fixed per input by
// SHA-256(seed, input digest). Memorized inputs keep their observed class
// with probability `retention`; otherwise the answer is uniform over the
// other m-1 classes. Unseen inputs get the reference model's class with
// probability `oracle_acc`, otherwise uniform over the non-honest classes.
class SimulatedSurrogate : public SuspectEndpoint {
 public:
  SimulatedSurrogate(SurrogateSim params, const ModelSpec& reference,
                     const std::vector<Observation>& training);

  std::size_t QueryClass(const CanonicalInput& x) override;
  std::optional<std::vector<std::string>> QueryWire(const CanonicalInput&) override {
    return std::nullopt;
  }

  std::size_t memorized() const { return memory_.size(); }

 private:
  SurrogateSim params_;
  const ModelSpec& reference_;
  std::map<Digest, std::size_t> memory_;
};

struct AttackScenario {
  std::uint64_t n_queries = 0;
  std::uint64_t n_clients = 1;
  std::vector<std::uint32_t> input_shape{1, 8, 8};
  std::uint64_t seed = 1;
  WatermarkRatio r_w{1, 100};
  Rational e{1, 2};
  std::size_t k = 0;
  MappingConfig mapping;
  // Model used when model_file is empty: a random linear classifier.
  std::string model_file;
  std::size_t classes = 10;
  SurrogateSim surrogate;
  // Client indices whose transcripts train the surrogate; empty means all.
  std::vector<std::uint64_t> colluders;
  std::optional<std::uint64_t> n_registered_override;
  // Optional confidence target reported against (e.g. 1 - 2^-64).
  std::optional<Rational> confidence_target;

  // Throws kBadConfig when n_queries < n_clients (unless n_queries == 0).
  void Validate() const;
  static AttackScenario Parse(const std::string& text, const std::string& base_dir = ".");
  static AttackScenario LoadFile(const std::string& path);
};

std::string ClientName(std::uint64_t index);

// n distinct uniform random u8 tensors of the given shape, from seed.
std::vector<CanonicalInput> SampleDistinctInputs(const std::vector<std::uint32_t>& shape,
                                                 std::uint64_t n, std::uint64_t seed);

// Random linear model (weights ~ N(0,1)) for simulations.
ModelSpec RandomLinearModel(const std::string& model_id, std::size_t m,
                            const std::vector<std::uint32_t>& input_shape, std::uint64_t seed);

struct ClientTranscript {
  std::string client_id;
  std::vector<Observation> observations;
  WatermarkBundle bundle;
};

struct ExtractionResult {
  std::vector<ClientTranscript> clients;

  // Observations of the given client indices (all when empty).
  std::vector<Observation> Corpus(const std::vector<std::uint64_t>& indices = {}) const;
};

// Queries N distinct inputs, split into contiguous equal chunks across
// n_clients, through the gateway; returns each client's transcript and,
// from the defender's side, its bundle.
ExtractionResult RunExtraction(const AttackScenario& scenario, Gateway& gateway);

// Same, with an explicit input list.
ExtractionResult RunExtraction(const std::vector<CanonicalInput>& inputs,
                               std::uint64_t n_clients, Gateway& gateway);

struct Evaluation {
  double acc_wm = 0.0;
  bool passed = false;
  LStatistic l;
};

// Acc_wm over the bundle and whether 1 - Acc_wm < e. Throws kEmptyBundle.
Evaluation Evaluate(SuspectEndpoint& surrogate, const WatermarkBundle& bundle, const Rational& e);

// Fraction of inputs on which the surrogate agrees with the reference model.
double TestAccuracy(SuspectEndpoint& surrogate, const ModelSpec& reference,
                    const std::vector<CanonicalInput>& inputs);

struct ClientVerdict {
  std::string client_id;
  std::size_t bundle_size = 0;
  bool colluder = false;
  bool verified = false;  // JudgeVerify passed
  double acc_wm = 0.0;
  std::optional<VerificationReport> report;
  bool meets_confidence_target = false;
};

struct CollusionOptions {
  std::optional<std::uint64_t> n_registered_override;
  std::optional<Rational> confidence_target;
};

// Registers the model (if needed) and every non-empty client bundle, then
// runs the judge once per client against the shared surrogate. A client is
// implicated iff its watermark verifies.
std::vector<ClientVerdict> CollusionReport(Gateway& gateway, const ExtractionResult& extraction,
                                           SuspectEndpoint& surrogate, const Rational& e,
                                           const std::vector<std::uint64_t>& colluders,
                                           const CollusionOptions& options = {});

struct SimulationReport {
  nlohmann::json json;
  std::string csv;  // N,client_id,colluder,bundle_size,acc_wm,passed
};

// End to end: in-memory gateway, extraction, surrogate from the colluders'
// transcripts, per-client verification. Deterministic in the scenario.
SimulationReport RunScenario(const AttackScenario& scenario);

}  // namespace dawn

#endif  // DAWN_SIMATTACK_HPP_
