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

#include "dawn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dawn/error.hpp"

namespace dawn {
namespace {

constexpr double kLog10Of2 = 0.30102999566398119521;

void CheckProbArgs(std::uint64_t m, const Rational& e, std::uint64_t size) {
  if (m < 2) throw Error(ErrorCode::kDomainError, "m must be >= 2");
  if (size < 1) throw Error(ErrorCode::kDomainError, "watermark size must be >= 1");
  if (e < 0 || e > 1) throw Error(ErrorCode::kDomainError, "e must lie in [0,1]");
}

std::uint64_t AllowedMismatches(const Rational& e, std::uint64_t size) {
  mpz_class scaled = e.get_num() * mpz_class(std::to_string(size));
  mpz_class k;
  mpz_fdiv_q(k.get_mpz_t(), scaled.get_mpz_t(), e.get_den().get_mpz_t());
  return std::stoull(k.get_str());
}

double Log10Mpz(const mpz_class& v) {
  long exp = 0;
  const double mantissa = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log10(mantissa) + static_cast<double>(exp) * kLog10Of2;
}

mpz_class ToMpz(std::uint64_t v) { return mpz_class(std::to_string(v)); }

}  // namespace

Rational ParseRational(std::string_view text) {
  std::string s(text);
  try {
    if (s.find('/') != std::string::npos) {
      Rational r(s, 10);
      if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
      r.canonicalize();
      return r;
    }
    const bool negative = !s.empty() && s[0] == '-';
    if (negative) s.erase(0, 1);
    const auto dot = s.find('.');
    std::string whole = s.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    auto digits = [](const std::string& d) {
      return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits(whole) || !digits(frac) || (dot != std::string::npos && frac.empty())) {
      throw std::invalid_argument("not a decimal");
    }
    mpz_class den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    Rational r(mpz_class(whole + frac, 10), den);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kParseError, "not a rational number: " + std::string(text));
  }
}

Rational PowerOfTwo(int exponent) {
  if (exponent < -10000 || exponent > 10000) {
    throw Error(ErrorCode::kDomainError, "exponent out of range");
  }
  mpz_class p = 1;
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(std::abs(exponent)));
  return exponent >= 0 ? Rational(p) : Rational(mpz_class(1), p);
}

double Log10(const Rational& value) {
  if (value <= 0) throw Error(ErrorCode::kDomainError, "log10 of a non-positive value");
  return Log10Mpz(value.get_num()) - Log10Mpz(value.get_den());
}

std::string FormatPercent(const Rational& value, int digits) {
  mpz_class scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Rational scaled = value * 100 * scale + Rational(1, 2);
  mpz_class rounded;
  mpz_fdiv_q(rounded.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
  std::string s = rounded.get_str();
  if (digits == 0) return s;
  if (s.size() <= static_cast<std::size_t>(digits)) {
    s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
  }
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return s;
}

TrivialProbability TrivialProb(std::uint64_t m, const Rational& e, std::uint64_t size) {
  CheckProbArgs(m, e, size);
  const std::uint64_t k = AllowedMismatches(e, size);
  const mpz_class wrong = ToMpz(m - 1);
  mpz_class term = 1;  // C(size, i) * (m-1)^i
  mpz_class sum = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    term *= ToMpz(size - i);
    term *= wrong;
    mpz_divexact(term.get_mpz_t(), term.get_mpz_t(), ToMpz(i + 1).get_mpz_t());
    sum += term;
  }
  mpz_class denom;
  mpz_pow_ui(denom.get_mpz_t(), ToMpz(m).get_mpz_t(), size);
  TrivialProbability out;
  out.exact = Rational(sum, denom);
  out.exact.canonicalize();
  out.log10 = Log10Mpz(sum) - Log10Mpz(denom);
  return out;
}

double Log10TrivialProbFast(std::uint64_t m, const Rational& e, std::uint64_t size) {
  CheckProbArgs(m, e, size);
  const std::uint64_t k = AllowedMismatches(e, size);
  const long double n = static_cast<long double>(size);
  const long double ln_wrong = std::log(static_cast<long double>(m - 1));
  const long double ln_m = std::log(static_cast<long double>(m));

  auto ln_term = [&](std::uint64_t i) {
    const long double x = static_cast<long double>(i);
    return std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1) + x * ln_wrong -
           n * ln_m;
  };

  // Terms grow with i up to the mode near (m-1)/m * size. Below the mode the
  // sum is dominated by term k and we can walk down with exact ratios.
  const long double mode = (static_cast<long double>(m) - 1) * (n + 1) / m;
  long double ln_sum;
  if (static_cast<long double>(k) < mode) {
    const long double top = ln_term(k);
    long double rel = 1.0L;
    long double acc = 1.0L;
    for (std::uint64_t i = k; i > 0; --i) {
      // term(i-1) / term(i) = i / ((size - i + 1) (m - 1))
      rel *= static_cast<long double>(i) /
             (static_cast<long double>(size - i + 1) * static_cast<long double>(m - 1));
      acc += rel;
      if (rel < 1e-22L * acc) break;
    }
    ln_sum = top + std::log(acc);
  } else {
    long double peak = -INFINITY;
    std::vector<long double> terms(k + 1);
    for (std::uint64_t i = 0; i <= k; ++i) {
      terms[i] = ln_term(i);
      peak = std::max(peak, terms[i]);
    }
    long double acc = 0.0L;
    for (long double t : terms) acc += std::exp(t - peak);
    ln_sum = peak + std::log(acc);
  }
  return static_cast<double>(ln_sum / std::log(10.0L));
}

bool TrivialProbBelow(std::uint64_t m, const Rational& e, std::uint64_t size,
                      const Rational& target) {
  const double fast = Log10TrivialProbFast(m, e, size);
  const double goal = Log10(target);
  if (fast < goal - 1e-6) return true;
  if (fast > goal + 1e-6) return false;
  return TrivialProb(m, e, size).exact < target;
}

WatermarkSize MinWatermarkSize(std::uint64_t m, const Rational& e, const Rational& target,
                               std::uint64_t limit) {
  if (m < 2) throw Error(ErrorCode::kDomainError, "m must be >= 2");
  if (e <= 0 || e >= Rational(m - 1, m)) {
    throw Error(ErrorCode::kDomainError, "e must satisfy 0 < e < (m-1)/m");
  }
  if (target <= 0 || target >= 1) throw Error(ErrorCode::kDomainError, "target must lie in (0,1)");

  // floor(e*|T|) is periodic in |T| with period den(e); confirm over several
  // periods before accepting a run.
  const mpz_class& den = e.get_den();
  const std::uint64_t period = den.fits_ulong_p() ? den.get_ui() : 10000;
  const std::uint64_t window = std::clamp<std::uint64_t>(4 * period, 64, 10000);

  WatermarkSize out;
  std::uint64_t run_start = 0;
  for (std::uint64_t size = 1; size <= limit; ++size) {
    if (TrivialProbBelow(m, e, size, target)) {
      if (out.first_crossing == 0) out.first_crossing = size;
      if (run_start == 0) run_start = size;
      if (size - run_start + 1 >= window) {
        out.size = run_start;
        return out;
      }
    } else {
      run_start = 0;
    }
  }
  throw Error(ErrorCode::kNotAchievable,
              "no watermark size up to " + std::to_string(limit) + " reaches the target");
}

RatioResult RequiredRatio(std::uint64_t queries, std::uint64_t watermark_size,
                          std::uint64_t colluders) {
  if (queries == 0 || watermark_size == 0 || colluders == 0) {
    throw Error(ErrorCode::kDomainError, "N, |T| and colluders must be >= 1");
  }
  const mpz_class needed = ToMpz(watermark_size) * ToMpz(colluders);
  if (needed > ToMpz(queries)) {
    throw Error(ErrorCode::kDomainError, "|T| * colluders exceeds the query budget N");
  }
  RatioResult out;
  out.ratio = Rational(needed, ToMpz(queries));
  out.ratio.canonicalize();
  return out;
}

ConfidenceBound EffectiveConfidence(const Rational& trivial_prob, std::uint64_t n_clients) {
  if (trivial_prob < 0 || trivial_prob > 1 || n_clients == 0) {
    throw Error(ErrorCode::kDomainError, "need p in [0,1] and n >= 1");
  }
  ConfidenceBound out;
  out.trivial_bound = trivial_prob * ToMpz(n_clients);
  if (out.trivial_bound > 1) out.trivial_bound = 1;
  out.confidence = 1 - out.trivial_bound;
  return out;
}

double UtilityAfterWatermarking(double r_w, double accuracy) {
  if (r_w < 0 || r_w > 1 || accuracy < 0 || accuracy > 1) {
    throw Error(ErrorCode::kDomainError, "r_w and accuracy must lie in [0,1]");
  }
  return accuracy - r_w * accuracy;
}

std::vector<std::pair<std::uint64_t, double>> TrivialProbSweep(std::uint64_t m,
                                                               const Rational& e,
                                                               std::uint64_t max_size) {
  std::vector<std::pair<std::uint64_t, double>> rows;
  rows.reserve(max_size);
  for (std::uint64_t size = 1; size <= max_size; ++size) {
    rows.emplace_back(size, TrivialProb(m, e, size).log10);
  }
  return rows;
}

}  // namespace dawn
