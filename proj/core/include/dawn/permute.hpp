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

#ifndef DAWN_PERMUTE_HPP_
#define DAWN_PERMUTE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "dawn/codec.hpp"
#include "dawn/hashcore.hpp"

namespace dawn {

// A classifier's probability vector over m >= 2 classes.
class PredictionVector {
 public:
  PredictionVector() = default;
  // Throws kTooFewClasses for m < 2 and kDomainError when a probability is
  // outside [0,1] or the sum is more than 1e-6 away from 1.
  explicit PredictionVector(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  // Ties go to the lowest class index.
  std::size_t argmax() const;

  // Decimal strings with 9 fractional digits, the gateway wire format.
  std::vector<std::string> WireStrings() const;

  friend bool operator==(const PredictionVector&, const PredictionVector&) = default;

 private:
  std::vector<double> probs_;
};

std::string FormatProbability(double p);

inline constexpr std::size_t kMaxPermutedSlots = 34;

// min(m, 16).
std::size_t DefaultPermutedSlots(std::size_t m);

struct PermutationPlan {
  // Class indices of the k largest probabilities, in descending probability
  // order (ties: lower index first). positions[0] is the argmax.
  std::vector<std::size_t> positions;
  // dest[s] is the slot receiving the value held by slot s.
  std::vector<std::size_t> dest;
  // Whether the cyclic-shift repair was composed onto the raw shuffle.
  bool fixup_applied = false;
};

// Keyed Fisher-Yates over k slots. Returns the shuffled slot list `order`
// (value for slot s is taken from slot order[s]); draws j = state mod (i+1),
// state /= (i+1), for i = k-1 down to 1, starting at state = k_pi.
std::vector<std::size_t> KeyedShuffle(u128 k_pi, std::size_t k);

// Throws kTooFewClasses for m < 2, kKTooLarge for k > min(m, 34) and
// kDomainError for k < 2.
PermutationPlan DerivePlan(u128 k_pi, const PredictionVector& probs, std::size_t k);

PredictionVector ApplyPlan(const PermutationPlan& plan, const PredictionVector& probs);

// The watermark response: honest prediction with its top-k entries permuted
// under split.hi. The argmax always changes and values are moved, never
// recomputed.
PredictionVector Backdoor(const HashSplit& split, const PredictionVector& honest,
                          std::size_t k);

}  // namespace dawn

#endif  // DAWN_PERMUTE_HPP_
