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

#include "dawn/verify.hpp"

#include <algorithm>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;

std::string_view StatusName(StepStatus s) {
  switch (s) {
    case StepStatus::kPassed: return "passed";
    case StepStatus::kFailed: return "failed";
    case StepStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

}  // namespace

std::size_t ModelEndpoint::QueryClass(const CanonicalInput& x) {
  try {
    return Predict(spec_, x).argmax();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSuspectUnreachable, e.what());
  }
}

std::optional<std::vector<std::string>> ModelEndpoint::QueryWire(const CanonicalInput& x) {
  try {
    return Predict(spec_, x).WireStrings();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSuspectUnreachable, e.what());
  }
}

bool LStatistic::Below(const Rational& e) const {
  return Rational(static_cast<unsigned long>(mismatches), static_cast<unsigned long>(size)) < e;
}

LStatistic ComputeLStatistic(const WatermarkBundle& bundle, SuspectEndpoint& suspect) {
  if (bundle.empty()) throw Error(ErrorCode::kEmptyBundle, "watermark bundle is empty");
  LStatistic l;
  l.size = bundle.size();
  for (const auto& rec : bundle.records) {
    if (suspect.QueryClass(rec.input) != rec.b_class) ++l.mismatches;
  }
  return l;
}

json VerificationReport::ToJson() const {
  json steps_json = json::array();
  for (const auto& s : steps) {
    steps_json.push_back(
        {{"step", s.step}, {"name", s.name}, {"status", StatusName(s.status)}, {"detail", s.detail}});
  }
  json j = {
      {"passed", passed},
      {"L_value", l.value()},
      {"mismatches", l.mismatches},
      {"watermark_size", l.size},
      {"e", e.get_d()},
      {"e_exact", e.get_str()},
      {"steps", steps_json},
      {"first_failed_step", first_failed_step ? json(*first_failed_step) : json(nullptr)},
      {"n_registered", n_registered},
      {"n_registered_source", n_registered_overridden ? "override" : "bulletin"},
      {"trivial_prob", trivial_prob.value()},
      {"trivial_prob_log10", trivial_prob.log10},
      {"effective_trivial_prob", effective.trivial_bound.get_d()},
      {"effective_trivial_prob_log10", Log10(effective.trivial_bound)},
      {"effective_confidence", effective.confidence.get_d()},
  };
  return j;
}

VerificationReport JudgeVerify(const Bulletin& board, const WatermarkBundle& bundle,
                               const ModelSpec& victim, SuspectEndpoint& suspect,
                               const Rational& e, const JudgeOptions& options) {
  if (bundle.empty()) throw Error(ErrorCode::kEmptyBundle, "watermark bundle is empty");
  if (e <= 0 || e >= Rational(static_cast<unsigned long>(victim.m - 1),
                              static_cast<unsigned long>(victim.m))) {
    throw Error(ErrorCode::kDomainError, "e must satisfy 0 < e < (m-1)/m");
  }

  VerificationReport report;
  report.e = e;
  const char* const kStepNames[] = {"locate_registered_watermark", "model_digest_matches",
                                    "watermark_postdates_model", "l_statistic_below_e",
                                    "victim_disagrees_with_watermark"};
  for (int i = 0; i < 5; ++i) {
    report.steps.push_back({i + 1, kStepNames[i], StepStatus::kSkipped, ""});
  }
  auto set = [&](int step, StepStatus status, std::string detail) {
    auto& s = report.steps[static_cast<std::size_t>(step - 1)];
    s.status = status;
    s.detail = std::move(detail);
  };

  const Digest wm_digest = bundle.digest();
  const Digest victim_digest = ModelDigest(victim);

  // 1.
  const auto entry = board.FindWatermark(wm_digest, std::nullopt);
  if (entry) {
    set(1, StepStatus::kPassed, "entry " + std::to_string(entry->index));
  } else {
    set(1, StepStatus::kFailed, "no bulletin entry for " + HexEncode(wm_digest));
  }

  // 2. and 3.
  if (entry) {
    const Digest linked = *entry->linked_model_digest;
    if (linked == victim_digest) {
      set(2, StepStatus::kPassed, HexEncode(victim_digest));
    } else {
      set(2, StepStatus::kFailed, "registered link " + HexEncode(linked) + " != " +
                                      HexEncode(victim_digest));
    }
    const Ruling ruling = board.CheckAnteriority(wm_digest, linked);
    set(3, ruling == Ruling::kWatermarkValid ? StepStatus::kPassed : StepStatus::kFailed,
        std::string(RulingName(ruling)));
  }

  // 4.
  report.l = ComputeLStatistic(bundle, suspect);
  set(4, report.l.Below(e) ? StepStatus::kPassed : StepStatus::kFailed,
      std::to_string(report.l.mismatches) + "/" + std::to_string(report.l.size) + " mismatches");

  // 5.
  std::size_t agreeing = 0;
  std::string failure;
  for (const auto& rec : bundle.records) {
    try {
      if (Predict(victim, rec.input).argmax() == rec.b_class) ++agreeing;
    } catch (const Error& err) {
      failure = err.what();
      break;
    }
  }
  if (!failure.empty()) {
    set(5, StepStatus::kFailed, failure);
  } else if (agreeing != 0) {
    set(5, StepStatus::kFailed, std::to_string(agreeing) + " inputs where the victim answers b_class");
  } else {
    set(5, StepStatus::kPassed, "victim differs on all inputs");
  }

  report.passed = true;
  for (const auto& s : report.steps) {
    if (s.status != StepStatus::kPassed) {
      report.passed = false;
      if (!report.first_failed_step) report.first_failed_step = s.step;
    }
  }

  report.n_registered_overridden = options.n_registered_override.has_value();
  report.n_registered = options.n_registered_override.value_or(
      std::max<std::uint64_t>(1, board.CountWatermarks(victim_digest)));
  report.trivial_prob = TrivialProb(victim.m, e, bundle.size());
  report.effective = EffectiveConfidence(report.trivial_prob.exact, report.n_registered);
  return report;
}

std::string_view ContestOutcomeName(ContestOutcome outcome) {
  switch (outcome) {
    case ContestOutcome::kContesterWins: return "contester_wins";
    case ContestOutcome::kClaimantWins: return "claimant_wins";
    case ContestOutcome::kMismatchRejected: return "mismatch_rejected";
  }
  return "unknown";
}

ContestOutcome Contest(const Bulletin& board, const WatermarkBundle& bundle,
                       SuspectEndpoint& suspect, const ModelSpec& provided) {
  for (const auto& rec : bundle.records) {
    PredictionVector local;
    try {
      local = Predict(provided, rec.input);
    } catch (const Error&) {
      return ContestOutcome::kMismatchRejected;
    }
    if (const auto wire = suspect.QueryWire(rec.input)) {
      if (*wire != local.WireStrings()) return ContestOutcome::kMismatchRejected;
    } else if (suspect.QueryClass(rec.input) != local.argmax()) {
      return ContestOutcome::kMismatchRejected;
    }
  }
  const Ruling ruling =
      board.CheckAnteriority(bundle.digest(), bundle.model_digest, ModelDigest(provided));
  return ruling == Ruling::kContesterWins ? ContestOutcome::kContesterWins
                                          : ContestOutcome::kClaimantWins;
}

}  // namespace dawn
