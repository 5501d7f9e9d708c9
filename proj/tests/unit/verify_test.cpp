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

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dawn/error.hpp"
#include "dawn/gateway.hpp"
#include "dawn/simattack.hpp"
#include "dawn/verify.hpp"
#include "test_util.hpp"

namespace dawn {
namespace {

using ::dawn::testing::Epoch;

// Answers fixed classes by input digest.
class ScriptedSuspect : public SuspectEndpoint {
 public:
  std::map<Digest, std::size_t> answers;
  std::size_t QueryClass(const CanonicalInput& x) override {
    const auto it = answers.find(x.digest());
    if (it == answers.end()) throw Error(ErrorCode::kSuspectUnreachable, "no answer");
    return it->second;
  }
  std::optional<std::vector<std::string>> QueryWire(const CanonicalInput&) override {
    return std::nullopt;
  }
};

// Wraps an endpoint and hides its probabilities.
class ClassOnly : public SuspectEndpoint {
 public:
  explicit ClassOnly(SuspectEndpoint& inner) : inner_(inner) {}
  std::size_t QueryClass(const CanonicalInput& x) override { return inner_.QueryClass(x); }
  std::optional<std::vector<std::string>> QueryWire(const CanonicalInput&) override {
    return std::nullopt;
  }

 private:
  SuspectEndpoint& inner_;
};

WatermarkBundle HandBundle(std::size_t n) {
  WatermarkBundle b;
  b.client_id = "c";
  for (std::size_t i = 0; i < n; ++i) {
    TriggerRecord r;
    const std::vector<std::uint32_t> shape{1};
    r.input = Canonicalize(Dtype::kU8, shape, Bytes{static_cast<std::uint8_t>(i)});
    r.b_class = 1;
    r.f_class = 0;
    b.records.push_back(r);
  }
  return b;
}

TEST(LStatisticTest, Examples) {
  auto b = HandBundle(4);
  ScriptedSuspect s;
  for (const auto& r : b.records) s.answers[r.input.digest()] = 1;
  EXPECT_EQ(ComputeLStatistic(b, s).value(), 0.0);
  for (const auto& r : b.records) s.answers[r.input.digest()] = 2;
  EXPECT_EQ(ComputeLStatistic(b, s).value(), 1.0);
  for (std::size_t i = 0; i < 3; ++i) s.answers[b.records[i].input.digest()] = 1;
  const auto l = ComputeLStatistic(b, s);
  EXPECT_EQ(l.value(), 0.25);
  EXPECT_TRUE(l.Below(Rational(1, 2)));
  EXPECT_FALSE(l.Below(Rational(1, 4)));
  EXPECT_THROW(ComputeLStatistic(HandBundle(0), s), Error);
  ScriptedSuspect mute;
  try {
    ComputeLStatistic(b, mute);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSuspectUnreachable);
  }
}

TEST(LStatisticTest, NonIncreasingInRetainedAnswers) {
  auto b = HandBundle(50);
  ScriptedSuspect s;
  for (const auto& r : b.records) s.answers[r.input.digest()] = 3;
  double last = ComputeLStatistic(b, s).value();
  EXPECT_EQ(last, 1.0);
  for (const auto& r : b.records) {
    s.answers[r.input.digest()] = r.b_class;
    const double now = ComputeLStatistic(b, s).value();
    ASSERT_LE(now, last);
    last = now;
  }
  EXPECT_EQ(last, 0.0);
}

// Pass rate of L < 1/2 for independent b_class answers with probability 0.66
// against the closed-form binomial tail.
TEST(LStatisticTest, PassRateMatchesBinomialTail) {
  const int size = 109;
  const double rho = 0.66;
  const int allowed = 54;  // floor(0.5 * 109)
  double tail = 0;
  for (int i = 0; i <= allowed; ++i) {
    tail += std::exp(std::lgamma(size + 1.0) - std::lgamma(i + 1.0) - std::lgamma(size - i + 1.0) +
                     i * std::log(1 - rho) + (size - i) * std::log(rho));
  }
  auto b = HandBundle(size);
  std::mt19937_64 rng(2718);
  std::bernoulli_distribution keep(rho);
  const int trials = 10000;
  int passes = 0;
  for (int t = 0; t < trials; ++t) {
    ScriptedSuspect s;
    for (const auto& r : b.records) s.answers[r.input.digest()] = keep(rng) ? r.b_class : 0;
    passes += ComputeLStatistic(b, s).Below(Rational(1, 2)) ? 1 : 0;
  }
  EXPECT_NEAR(passes / static_cast<double>(trials), tail,
              3 * std::sqrt(tail * (1 - tail) / trials));
}

// A gateway that watermarks everything, one client, model committed first.
struct Pipeline {
  ModelSpec victim = RandomLinearModel("victim", 10, {1, 4, 4}, 21);
  std::unique_ptr<Gateway> gateway;
  ExtractionResult extraction;
  WatermarkBundle bundle;

  explicit Pipeline(bool register_model = true) {
    GatewaySettings settings;
    settings.auto_register_every = 0;
    settings.clock = [] { return Epoch(); };
    gateway = std::make_unique<Gateway>(
        victim, dawn::testing::KeysFor(4, WatermarkRatio(1, 1)), settings);
    if (register_model) gateway->RegisterModel();
    extraction = RunExtraction(SampleDistinctInputs({1, 4, 4}, 40, 9), 1, *gateway);
    bundle = extraction.clients[0].bundle;
  }
};

TEST(JudgeVerifyTest, HonestPipelinePasses) {
  Pipeline p;
  ASSERT_EQ(p.bundle.size(), 40u);
  p.gateway->SnapshotRegister("client-0");
  SimulatedSurrogate surrogate({1.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  const auto report =
      JudgeVerify(p.gateway->bulletin(), p.bundle, p.victim, surrogate, Rational(1, 2));
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.l.value(), 0.0);
  EXPECT_FALSE(report.first_failed_step.has_value());
  EXPECT_EQ(report.n_registered, p.gateway->bulletin().CountWatermarks(p.gateway->model_digest()));
  EXPECT_FALSE(report.n_registered_overridden);
  EXPECT_EQ(report.trivial_prob.exact, TrivialProb(10, Rational(1, 2), 40).exact);
  for (const auto& s : report.steps) EXPECT_EQ(s.status, StepStatus::kPassed) << s.name;

  const auto j = report.ToJson();
  EXPECT_EQ(j.at("passed"), true);
  EXPECT_EQ(j.at("n_registered_source"), "bulletin");
  EXPECT_EQ(j.at("steps").size(), 5u);
}

TEST(JudgeVerifyTest, ZeroRetentionFailsStepFour) {
  Pipeline p;
  p.gateway->SnapshotRegister("client-0");
  SimulatedSurrogate surrogate({0.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  const auto report =
      JudgeVerify(p.gateway->bulletin(), p.bundle, p.victim, surrogate, Rational(1, 2));
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.l.value(), 1.0);
  EXPECT_EQ(report.first_failed_step, 4);
}

TEST(JudgeVerifyTest, WatermarkBeforeModelFailsStepThree) {
  Pipeline p(false);
  Bulletin board([] { return Epoch(); });
  board.PublishWatermark(p.bundle.digest(), ModelDigest(p.victim));
  board.PublishModel(ModelDigest(p.victim));
  SimulatedSurrogate surrogate({1.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  const auto report = JudgeVerify(board, p.bundle, p.victim, surrogate, Rational(1, 2));
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.l.value(), 0.0);
  EXPECT_EQ(report.first_failed_step, 3);
  EXPECT_EQ(report.steps[2].detail, "watermark_invalid_order");
}

TEST(JudgeVerifyTest, UnregisteredBundleFailsStepOne) {
  Pipeline p;
  SimulatedSurrogate surrogate({1.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  const auto report =
      JudgeVerify(p.gateway->bulletin(), p.bundle, p.victim, surrogate, Rational(1, 2));
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.first_failed_step, 1);
  EXPECT_EQ(report.steps[1].status, StepStatus::kSkipped);
  EXPECT_EQ(report.steps[2].status, StepStatus::kSkipped);
  EXPECT_EQ(report.steps[3].status, StepStatus::kPassed);
}

TEST(JudgeVerifyTest, OtherVictimFailsStepTwo) {
  Pipeline p;
  p.gateway->SnapshotRegister("client-0");
  const auto other = RandomLinearModel("other", 10, {1, 4, 4}, 22);
  SimulatedSurrogate surrogate({1.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  const auto report =
      JudgeVerify(p.gateway->bulletin(), p.bundle, other, surrogate, Rational(1, 2));
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.first_failed_step, 2);
}

TEST(JudgeVerifyTest, VictimAgreeingWithWatermarkFailsStepFive) {
  Pipeline p;
  WatermarkBundle forged = p.bundle;
  forged.records[0].b_class = forged.records[0].f_class;
  Bulletin board([] { return Epoch(); });
  board.PublishModel(ModelDigest(p.victim));
  board.PublishWatermark(forged.digest(), ModelDigest(p.victim));
  ScriptedSuspect suspect;
  for (const auto& r : forged.records) suspect.answers[r.input.digest()] = r.b_class;
  const auto report = JudgeVerify(board, forged, p.victim, suspect, Rational(1, 2));
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.first_failed_step, 5);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(report.steps[i].status, StepStatus::kPassed);
}

TEST(JudgeVerifyTest, OverrideScalesTrivialBound) {
  Pipeline p;
  p.gateway->SnapshotRegister("client-0");
  SimulatedSurrogate surrogate({1.0, 0.0, 5}, p.victim, p.extraction.Corpus());
  JudgeOptions options;
  options.n_registered_override = 1000000;
  const auto report =
      JudgeVerify(p.gateway->bulletin(), p.bundle, p.victim, surrogate, Rational(1, 2), options);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.n_registered, 1000000u);
  EXPECT_TRUE(report.n_registered_overridden);
  EXPECT_EQ(report.effective.trivial_bound, report.trivial_prob.exact * 1000000);
  EXPECT_EQ(report.ToJson().at("n_registered_source"), "override");
}

TEST(JudgeVerifyTest, DomainErrors) {
  Pipeline p;
  ScriptedSuspect s;
  auto code = [&](const WatermarkBundle& b, const Rational& e) {
    try {
      JudgeVerify(p.gateway->bulletin(), b, p.victim, s, e);
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::kParseError;
  };
  EXPECT_EQ(code(p.bundle, Rational(0)), ErrorCode::kDomainError);
  EXPECT_EQ(code(p.bundle, Rational(9, 10)), ErrorCode::kDomainError);
  EXPECT_EQ(code(WatermarkBundle{}, Rational(1, 2)), ErrorCode::kEmptyBundle);
}

// The suspect serves model A; A's owner hands over A or a near copy.
struct ContestSetup {
  Pipeline p;
  ModelSpec adversary;
  ModelSpec near_copy;

  ContestSetup() {
    LookupBackend table, altered;
    std::mt19937_64 rng(77);
    for (const auto& r : p.bundle.records) {
      const auto v = dawn::testing::RandomPrediction(rng, 10);
      table.entries.emplace(r.input.digest(), v);
      altered.entries.emplace(r.input.digest(), v);
    }
    auto first = altered.entries.begin();
    std::vector<double> moved = first->second.probs();
    std::swap(moved[0], moved[1]);
    first->second = PredictionVector(moved);
    adversary = BuildModel("adversary", 10, {1, 4, 4}, table);
    near_copy = BuildModel("adversary", 10, {1, 4, 4}, altered);
  }
};

TEST(ContestTest, EarlierAdversaryCommitmentWins) {
  ContestSetup c;
  Bulletin board([] { return Epoch(); });
  board.PublishModel(ModelDigest(c.adversary));
  board.PublishModel(ModelDigest(c.p.victim));
  board.PublishWatermark(c.p.bundle.digest(), ModelDigest(c.p.victim));
  ModelEndpoint suspect(c.adversary);
  EXPECT_EQ(Contest(board, c.p.bundle, suspect, c.adversary), ContestOutcome::kContesterWins);
  ClassOnly labels(suspect);
  EXPECT_EQ(Contest(board, c.p.bundle, labels, c.adversary), ContestOutcome::kContesterWins);
}

TEST(ContestTest, LaterAdversaryCommitmentLoses) {
  ContestSetup c;
  Bulletin board([] { return Epoch(); });
  board.PublishModel(ModelDigest(c.p.victim));
  board.PublishWatermark(c.p.bundle.digest(), ModelDigest(c.p.victim));
  board.PublishModel(ModelDigest(c.adversary));
  ModelEndpoint suspect(c.adversary);
  EXPECT_EQ(Contest(board, c.p.bundle, suspect, c.adversary), ContestOutcome::kClaimantWins);
}

TEST(ContestTest, ModelDifferingOnOneInputIsRejected) {
  ContestSetup c;
  Bulletin board([] { return Epoch(); });
  board.PublishModel(ModelDigest(c.near_copy));
  board.PublishModel(ModelDigest(c.p.victim));
  board.PublishWatermark(c.p.bundle.digest(), ModelDigest(c.p.victim));
  ModelEndpoint suspect(c.adversary);
  EXPECT_EQ(Contest(board, c.p.bundle, suspect, c.near_copy), ContestOutcome::kMismatchRejected);
  EXPECT_EQ(ContestOutcomeName(ContestOutcome::kMismatchRejected), "mismatch_rejected");
}

TEST(ModelEndpointTest, ErrorsBecomeUnreachable) {
  ModelEndpoint endpoint(RandomLinearModel("x", 3, {2}, 1));
  const std::vector<std::uint32_t> shape{3};
  const auto wrong = Canonicalize(Dtype::kU8, shape, Bytes{1, 2, 3});
  try {
    endpoint.QueryClass(wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSuspectUnreachable);
  }
  EXPECT_THROW(endpoint.QueryWire(wrong), Error);
}

}  // namespace
}  // namespace dawn
