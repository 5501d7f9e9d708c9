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

#ifndef DAWN_VERIFY_HPP_
#define DAWN_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dawn/bulletin.hpp"
#include "dawn/canonical_input.hpp"
#include "dawn/model.hpp"
#include "dawn/stats.hpp"
#include "dawn/triggerstore.hpp"

namespace dawn {

// A model under suspicion, reachable only through its prediction API.
class SuspectEndpoint {
 public:
  virtual ~SuspectEndpoint() = default;

  // Predicted class. Throws kSuspectUnreachable when no answer is available.
  virtual std::size_t QueryClass(const CanonicalInput& x) = 0;

  // Probabilities in wire format, or nullopt for class-only endpoints.
  virtual std::optional<std::vector<std::string>> QueryWire(const CanonicalInput& x) = 0;
};

// Serves a local model file as a suspect.
class ModelEndpoint : public SuspectEndpoint {
 public:
  explicit ModelEndpoint(ModelSpec spec) : spec_(std::move(spec)) {}

  std::size_t QueryClass(const CanonicalInput& x) override;
  std::optional<std::vector<std::string>> QueryWire(const CanonicalInput& x) override;

  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
};

struct LStatistic {
  std::size_t mismatches = 0;
  std::size_t size = 0;

  double value() const { return static_cast<double>(mismatches) / static_cast<double>(size); }
  // value() < e, evaluated exactly.
  bool Below(const Rational& e) const;
};

// Fraction of bundle inputs on which the suspect does not answer b_class.
// Throws kEmptyBundle; propagates kSuspectUnreachable.
LStatistic ComputeLStatistic(const WatermarkBundle& bundle, SuspectEndpoint& suspect);

enum class StepStatus { kPassed, kFailed, kSkipped };

struct StepOutcome {
  int step = 0;
  std::string name;
  StepStatus status = StepStatus::kSkipped;
  std::string detail;
};

struct VerificationReport {
  LStatistic l;
  Rational e;
  bool passed = false;
  std::vector<StepOutcome> steps;
  std::optional<int> first_failed_step;

  std::uint64_t n_registered = 0;
  bool n_registered_overridden = false;
  TrivialProbability trivial_prob;  // P(L < e) for one watermark
  ConfidenceBound effective;        // union bound over n_registered

  bool ConfidenceExceeds(const Rational& target) const { return effective.confidence > target; }
  nlohmann::json ToJson() const;
};

struct JudgeOptions {
  // Replaces the bulletin watermark count in the confidence correction.
  std::optional<std::uint64_t> n_registered_override;
};

// The judge procedure:
//   1. find the registered watermark by the bundle's recomputed digest;
//   2. check its linked model digest equals the victim model's digest;
//   3. check the watermark was published after the model commitment;
//   4. check L(bundle, suspect) < e;
//   5. check the victim's own class differs from b_class on every input.
// Every step is evaluated (steps whose prerequisites failed are skipped);
// passed requires all five. Throws kEmptyBundle, and kDomainError unless
// 0 < e < (m-1)/m for the victim's m.
VerificationReport JudgeVerify(const Bulletin& board, const WatermarkBundle& bundle,
                               const ModelSpec& victim, SuspectEndpoint& suspect,
                               const Rational& e, const JudgeOptions& options = {});

enum class ContestOutcome { kContesterWins, kClaimantWins, kMismatchRejected };

std::string_view ContestOutcomeName(ContestOutcome outcome);

// The suspect's owner hands over `provided`; it must reproduce the endpoint's
// answers on every bundle input (wire strings when the endpoint exposes
// them, classes otherwise). Then the earliest model commitment wins.
ContestOutcome Contest(const Bulletin& board, const WatermarkBundle& bundle,
                       SuspectEndpoint& suspect, const ModelSpec& provided);

}  // namespace dawn

#endif  // DAWN_VERIFY_HPP_
