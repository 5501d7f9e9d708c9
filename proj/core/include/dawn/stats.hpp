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

#ifndef DAWN_STATS_HPP_
#define DAWN_STATS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace dawn {

using Rational = mpq_class;

// "p/q", integers and decimals ("0.5", "1e-3" is not accepted). Exact.
Rational ParseRational(std::string_view text);
// 2^exponent for exponent in [-10000, 10000].
Rational PowerOfTwo(int exponent);
// log10 of a positive rational, accurate to double precision for any size.
double Log10(const Rational& value);
// Decimal rendering of value*100 rounded half-up to `digits` places.
std::string FormatPercent(const Rational& value, int digits);

struct TrivialProbability {
  Rational exact;
  double log10 = 0.0;

  double value() const { return exact.get_d(); }
};

// Probability that a model answering uniformly at random matches at least
// |T| - floor(e|T|) of |T| watermark classes:
//   sum_{i=0}^{floor(e|T|)} C(|T|,i) ((m-1)/m)^i (1/m)^(|T|-i)
// computed exactly. Accepts any e in [0,1]; throws kDomainError for m < 2,
// size < 1 or e outside [0,1].
TrivialProbability TrivialProb(std::uint64_t m, const Rational& e, std::uint64_t size);

// log10 of the same quantity in extended precision, without big integers.
// Used to scan large sizes quickly.
double Log10TrivialProbFast(std::uint64_t m, const Rational& e, std::uint64_t size);

// TrivialProb(m, e, size) < target, decided in log space and confirmed
// exactly when the two are within 1e-6 decades of each other.
bool TrivialProbBelow(std::uint64_t m, const Rational& e, std::uint64_t size,
                      const Rational& target);

struct WatermarkSize {
  // Smallest |T| such that every size >= |T| meets the target.
  std::uint64_t size = 0;
  // Smallest |T| that meets the target at all. floor(e|T|) makes the
  // probability non-monotone in |T|, so this can be below `size`.
  std::uint64_t first_crossing = 0;
};

// Linear scan from |T| = 1. A candidate is accepted after a run of
// consecutive passing sizes spanning several periods of floor(e|T|).
// Requires m >= 2, 0 < e < (m-1)/m and 0 < target < 1 (kDomainError);
// throws kNotAchievable when nothing up to `limit` qualifies.
WatermarkSize MinWatermarkSize(std::uint64_t m, const Rational& e, const Rational& target,
                               std::uint64_t limit = 1'000'000);

struct RatioResult {
  Rational ratio;
  std::string Percent(int digits) const { return FormatPercent(ratio, digits); }
  double ToDouble() const { return ratio.get_d(); }
};

// r_w = |T| * colluders / N. Throws kDomainError when a count is zero or
// |T| * colluders > N.
RatioResult RequiredRatio(std::uint64_t queries, std::uint64_t watermark_size,
                          std::uint64_t colluders = 1);

struct ConfidenceBound {
  Rational trivial_bound;  // min(1, n * p)
  Rational confidence;     // 1 - trivial_bound
};

// Union bound over n registered watermarks.
ConfidenceBound EffectiveConfidence(const Rational& trivial_prob, std::uint64_t n_clients);

// Expected accuracy once r_w of the answers are watermarked: acc * (1 - r_w).
double UtilityAfterWatermarking(double r_w, double accuracy);

// (size, log10 trivial probability) for size in [1, max_size].
std::vector<std::pair<std::uint64_t, double>> TrivialProbSweep(std::uint64_t m,
                                                               const Rational& e,
                                                               std::uint64_t max_size);

}  // namespace dawn

#endif  // DAWN_STATS_HPP_
