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

#include "dawn/permute.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "dawn/error.hpp"

namespace dawn {

PredictionVector::PredictionVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw Error(ErrorCode::kTooFewClasses, "prediction needs at least 2 classes");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kDomainError, "probability outside [0,1]");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::kDomainError, "probabilities do not sum to 1");
  }
}

std::size_t PredictionVector::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return best;
}

std::string FormatProbability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", p);
  return buf;
}

std::vector<std::string> PredictionVector::WireStrings() const {
  std::vector<std::string> out;
  out.reserve(probs_.size());
  for (double p : probs_) out.push_back(FormatProbability(p));
  return out;
}

std::size_t DefaultPermutedSlots(std::size_t m) { return std::min<std::size_t>(m, 16); }

std::vector<std::size_t> KeyedShuffle(u128 k_pi, std::size_t k) {
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  u128 state = k_pi;
  for (std::size_t i = k; i-- > 1;) {
    const auto radix = static_cast<u128>(i + 1);
    const auto j = static_cast<std::size_t>(state % radix);
    state /= radix;
    std::swap(order[i], order[j]);
  }
  return order;
}

PermutationPlan DerivePlan(u128 k_pi, const PredictionVector& probs, std::size_t k) {
  const std::size_t m = probs.size();
  if (m < 2) throw Error(ErrorCode::kTooFewClasses, "prediction needs at least 2 classes");
  if (k > std::min(m, kMaxPermutedSlots)) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " exceeds min(m, 34)");
  }
  if (k < 2) throw Error(ErrorCode::kDomainError, "k must be >= 2");

  std::vector<std::size_t> ranked(m);
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  PermutationPlan plan;
  plan.positions.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  const std::vector<std::size_t> order = KeyedShuffle(k_pi, k);
  plan.dest.resize(k);
  for (std::size_t s = 0; s < k; ++s) plan.dest[order[s]] = s;
  // Slot 0 holds the argmax; it must move.
  if (plan.dest[0] == 0) {
    for (auto& d : plan.dest) d = (d + 1) % k;
    plan.fixup_applied = true;
  }
  return plan;
}

PredictionVector ApplyPlan(const PermutationPlan& plan, const PredictionVector& probs) {
  std::vector<double> out = probs.probs();
  for (std::size_t s = 0; s < plan.positions.size(); ++s) {
    out[plan.positions[plan.dest[s]]] = probs[plan.positions[s]];
  }
  return PredictionVector(std::move(out));
}

PredictionVector Backdoor(const HashSplit& split, const PredictionVector& honest,
                          std::size_t k) {
  return ApplyPlan(DerivePlan(split.hi, honest, k), honest);
}

}  // namespace dawn
