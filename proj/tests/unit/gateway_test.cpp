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

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "dawn/error.hpp"
#include "dawn/gateway.hpp"
#include "dawn/simattack.hpp"
#include "dawn/verify.hpp"
#include "test_util.hpp"

namespace dawn {
namespace {

using ::dawn::testing::BinomialBand;
using ::dawn::testing::Epoch;
using ::dawn::testing::RandomInput;
using ::dawn::testing::TempDir;
using nlohmann::json;

const std::vector<std::uint32_t> kShape{1, 4, 4};

GatewaySettings Settings(std::uint64_t auto_every = 0) {
  GatewaySettings s;
  s.api_keys = {{"key-a", "alice"}, {"key-b", "bob"}, {"key-c", "carol"}};
  s.auto_register_every = auto_every;
  s.fsync = false;
  s.clock = [] { return Epoch(); };
  return s;
}

std::unique_ptr<Gateway> MakeGateway(WatermarkRatio r_w, GatewaySettings settings = Settings(),
                                     std::uint64_t model_seed = 1) {
  return std::make_unique<Gateway>(RandomLinearModel("m", 10, kShape, model_seed),
                                   dawn::testing::KeysFor(42, r_w), std::move(settings));
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dawn::Error thrown";
  return ErrorCode::kParseError;
}

TEST(GatewayTest, ZeroRatioAnswersHonestly) {
  auto g = MakeGateway(WatermarkRatio(0, 1));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto x = RandomInput(rng, kShape);
    const auto r = g->HandlePredict("alice", x);
    ASSERT_FALSE(r.watermarked);
    ASSERT_EQ(r.probs, Predict(g->model(), x));
  }
  EXPECT_EQ(g->Bundle("alice").size(), 0u);
}

TEST(GatewayTest, FullRatioPermutesEveryAnswer) {
  auto g = MakeGateway(WatermarkRatio(1, 1));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto x = RandomInput(rng, kShape);
    const auto honest = Predict(g->model(), x);
    const auto r = g->HandlePredict("alice", x);
    ASSERT_TRUE(r.watermarked);
    ASSERT_NE(r.cls, honest.argmax());
    auto a = r.probs.probs(), b = honest.probs();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    ASSERT_EQ(a, b);
  }
  const auto bundle = g->Bundle("alice");
  EXPECT_EQ(bundle.size(), 200u);
  for (const auto& rec : bundle.records) EXPECT_NE(rec.b_class, rec.f_class);
}

TEST(GatewayTest, ResponsesIgnoreClientIdentity) {
  auto g = MakeGateway(WatermarkRatio(1, 4));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto x = RandomInput(rng, kShape);
    const auto a = g->HandlePredict("alice", x).ToWire(ResponseMode::kFullVector).dump();
    const auto b = g->HandlePredict("bob", x).ToWire(ResponseMode::kFullVector).dump();
    const auto a2 = g->HandlePredict("alice", x).ToWire(ResponseMode::kFullVector).dump();
    ASSERT_EQ(a, b);
    ASSERT_EQ(a, a2);
  }
  const auto ba = g->Bundle("alice"), bb = g->Bundle("bob");
  ASSERT_EQ(ba.size(), bb.size());
  EXPECT_GT(ba.size(), 0u);
  for (std::size_t i = 0; i < ba.size(); ++i) {
    EXPECT_EQ(ba.records[i].input, bb.records[i].input);
    EXPECT_EQ(ba.records[i].b_class, bb.records[i].b_class);
  }
}

TEST(GatewayTest, ClassOnlyModeReturnsArgmaxOfFullVector) {
  auto settings = Settings();
  settings.response_mode = ResponseMode::kClassOnly;
  auto labels = MakeGateway(WatermarkRatio(1, 3), settings);
  auto full = MakeGateway(WatermarkRatio(1, 3));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto x = RandomInput(rng, kShape);
    const auto wire = labels->HandlePredict("alice", x).ToWire(labels->settings().response_mode);
    const auto vec = full->HandlePredict("alice", x);
    ASSERT_EQ(wire.at("class").get<std::size_t>(), vec.probs.argmax());
    ASSERT_FALSE(wire.contains("probs"));
  }
}

TEST(GatewayTest, WireFormatHasNineDecimals) {
  auto g = MakeGateway(WatermarkRatio(0, 1));
  std::mt19937_64 rng(5);
  const auto wire = g->HandlePredict("alice", RandomInput(rng, kShape)).ToWire(ResponseMode::kFullVector);
  ASSERT_EQ(wire.at("probs").size(), 10u);
  for (const auto& p : wire.at("probs")) {
    const auto s = p.get<std::string>();
    ASSERT_EQ(s.size(), 11u) << s;
    ASSERT_EQ(s.substr(0, 2), "0.");
  }
  EXPECT_FALSE(wire.contains("watermarked"));
}

TEST(GatewayTest, AuthenticationAndShapeErrors) {
  auto g = MakeGateway(WatermarkRatio(1, 2));
  EXPECT_EQ(g->Authenticate("key-b"), "bob");
  EXPECT_EQ(CodeOf([&] { g->Authenticate("nope"); }), ErrorCode::kUnauthorized);
  std::mt19937_64 rng(6);
  EXPECT_EQ(CodeOf([&] { g->HandlePredict("alice", RandomInput(rng, {16})); }),
            ErrorCode::kShapeMismatch);
  EXPECT_TRUE(g->IsAdmin("anything"));
  auto settings = Settings();
  settings.admin_key = "root";
  auto locked = MakeGateway(WatermarkRatio(1, 2), settings);
  EXPECT_FALSE(locked->IsAdmin("anything"));
  EXPECT_TRUE(locked->IsAdmin("root"));
}

TEST(GatewayTest, RejectsBadSlotCountAndGeometry) {
  auto settings = Settings();
  settings.k = 11;
  EXPECT_EQ(CodeOf([&] { MakeGateway(WatermarkRatio(1, 2), settings); }), ErrorCode::kKTooLarge);
  auto keys = dawn::testing::KeysFor(1, WatermarkRatio(1, 2), {MappingKind::kMaskBin, 3, 4, true});
  EXPECT_EQ(CodeOf([&] { Gateway(RandomLinearModel("m", 10, kShape, 1), keys, Settings()); }),
            ErrorCode::kBadGeometry);
}

TEST(GatewayTest, SnapshotRegistration) {
  auto g = MakeGateway(WatermarkRatio(1, 1));
  std::mt19937_64 rng(7);
  EXPECT_EQ(CodeOf([&] { g->SnapshotRegister("alice"); }), ErrorCode::kModelNotRegistered);
  g->RegisterModel();
  EXPECT_EQ(CodeOf([&] { g->SnapshotRegister("alice"); }), ErrorCode::kEmptyBundle);
  EXPECT_EQ(CodeOf([&] { g->SnapshotRegister("mallory"); }), ErrorCode::kUnknownClient);

  for (int i = 0; i < 5; ++i) g->HandlePredict("alice", RandomInput(rng, kShape));
  const auto first = g->SnapshotRegister("alice");
  EXPECT_EQ(first.kind, CommitmentKind::kWatermark);
  EXPECT_EQ(first.digest, g->Bundle("alice").digest());
  const auto first_bundle = g->Bundle("alice");

  for (int i = 0; i < 4; ++i) g->HandlePredict("alice", RandomInput(rng, kShape));
  const auto second = g->SnapshotRegister("alice");
  EXPECT_NE(first.digest, second.digest);
  EXPECT_EQ(g->Bundle("alice").size(), 9u);
  EXPECT_EQ(g->bulletin().CountWatermarks(g->model_digest()), 2u);
  // Both snapshots remain individually valid evidence.
  EXPECT_EQ(g->bulletin().CheckAnteriority(first_bundle.digest(), g->model_digest()),
            Ruling::kWatermarkValid);
  EXPECT_EQ(g->bulletin().CheckAnteriority(second.digest, g->model_digest()),
            Ruling::kWatermarkValid);
}

TEST(GatewayTest, AutoRegistersEveryNTriggers) {
  auto g = MakeGateway(WatermarkRatio(1, 1), Settings(5));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i) g->HandlePredict("alice", RandomInput(rng, kShape));
  EXPECT_EQ(g->Stats().at("auto_snapshot_failures"), 1);
  g->RegisterModel();
  g->HandlePredict("alice", RandomInput(rng, kShape));
  EXPECT_EQ(g->Stats().at("auto_snapshots"), 1);
  for (int i = 0; i < 5; ++i) g->HandlePredict("alice", RandomInput(rng, kShape));
  EXPECT_EQ(g->Stats().at("auto_snapshots"), 2);
  EXPECT_EQ(g->bulletin().CountWatermarks(g->model_digest()), 2u);
  // Repeats are deduplicated and do not advance the cadence.
  const auto x = RandomInput(rng, kShape);
  for (int i = 0; i < 10; ++i) g->HandlePredict("alice", x);
  EXPECT_EQ(g->Stats().at("auto_snapshots"), 2);
}

TEST(GatewayTest, StorageFailureWithholdsAnswer) {
  TempDir dir;
  auto settings = Settings();
  settings.trigger_dir = dir.path();
  auto g = MakeGateway(WatermarkRatio(1, 1), settings);
  std::filesystem::create_directories(g->triggers().LogPath("alice"));
  std::mt19937_64 rng(9);
  EXPECT_EQ(CodeOf([&] { g->HandlePredict("alice", RandomInput(rng, kShape)); }),
            ErrorCode::kStorageFailure);
  EXPECT_EQ(g->Stats().at("triggers_recorded"), 0);
  EXPECT_NO_THROW(g->HandlePredict("bob", RandomInput(rng, kShape)));
}

TEST(GatewayTest, TriggersSurviveRestart) {
  TempDir dir;
  auto settings = Settings();
  settings.trigger_dir = dir.File("triggers");
  settings.bulletin_file = dir.File("board.jsonl");
  Digest before{};
  {
    auto g = MakeGateway(WatermarkRatio(1, 2), settings);
    g->RegisterModel();
    std::mt19937_64 rng(10);
    for (int i = 0; i < 60; ++i) g->HandlePredict("carol", RandomInput(rng, kShape));
    g->SnapshotRegister("carol");
    before = g->Bundle("carol").digest();
  }
  auto g = MakeGateway(WatermarkRatio(1, 2), settings);
  EXPECT_EQ(g->Bundle("carol").digest(), before);
  EXPECT_EQ(g->bulletin().CheckAnteriority(before, g->model_digest()), Ruling::kWatermarkValid);
}

TEST(GatewayTest, WatermarkRateTelemetry) {
  auto g = MakeGateway(WatermarkRatio(1, 20));
  const int n = 20000;
  for (const auto& x : SampleDistinctInputs(kShape, n, 11)) g->HandlePredict("alice", x);
  const auto stats = g->Stats();
  EXPECT_EQ(stats.at("requests"), n);
  const double wm = stats.at("watermarked_responses").get<double>();
  EXPECT_NEAR(wm, n / 20.0, BinomialBand(n, 0.05, 6));
  EXPECT_EQ(stats.at("bundle_sizes").at("alice"), stats.at("triggers_recorded"));
}

TEST(GatewayTest, DisjointQueriesGiveDisjointBundles) {
  auto g = MakeGateway(WatermarkRatio(1, 5));
  const auto xs = SampleDistinctInputs(kShape, 2000, 12);
  for (std::size_t i = 0; i < xs.size(); ++i) g->HandlePredict(i % 2 ? "alice" : "bob", xs[i]);
  std::set<Digest> a;
  for (const auto& r : g->Bundle("alice").records) a.insert(r.input.digest());
  for (const auto& r : g->Bundle("bob").records) EXPECT_EQ(a.count(r.input.digest()), 0u);
}

TEST(GatewayConfigTest, ParsesAndResolvesPaths) {
  const std::string text = R"({
    "model_file": "model.json", "key_file": "k.hex", "r_w": "0.00426",
    "mapping": {"kind": "mask_bin", "q": 2, "r": 4}, "k": 8,
    "response_mode": "class_only", "api_keys": {"abc": "client-1"},
    "admin_key": "adm", "listen": "0.0.0.0:9000", "trigger_dir": "t",
    "bulletin_file": "/var/board.jsonl", "auto_register_every": 10, "fsync": false})";
  const auto cfg = GatewayConfig::Parse(text, "/etc/dawn");
  EXPECT_EQ(cfg.model_file, "/etc/dawn/model.json");
  EXPECT_EQ(cfg.key_file, "/etc/dawn/k.hex");
  EXPECT_EQ(cfg.r_w, WatermarkRatio(213, 50000));
  EXPECT_EQ(cfg.mapping.kind, MappingKind::kMaskBin);
  EXPECT_EQ(cfg.settings.k, 8u);
  EXPECT_EQ(cfg.settings.response_mode, ResponseMode::kClassOnly);
  EXPECT_EQ(cfg.settings.api_keys.at("abc"), "client-1");
  EXPECT_EQ(cfg.listen_host, "0.0.0.0");
  EXPECT_EQ(cfg.listen_port, 9000);
  EXPECT_EQ(cfg.settings.trigger_dir, "/etc/dawn/t");
  EXPECT_EQ(cfg.settings.bulletin_file, "/var/board.jsonl");
  EXPECT_EQ(cfg.settings.auto_register_every, 10u);
  EXPECT_FALSE(cfg.settings.fsync);

  EXPECT_THROW(GatewayConfig::Parse(R"({"model_file":"m","r_w":"0.1"})"), Error);
  EXPECT_THROW(GatewayConfig::Parse(R"({"model_file":"m","key_file":"k","key_env":"K","r_w":"0.1"})"),
               Error);
  EXPECT_THROW(GatewayConfig::Parse(R"({"model_file":"m","key_env":"K","r_w":"2"})"), Error);
  EXPECT_THROW(
      GatewayConfig::Parse(R"({"model_file":"m","key_env":"K","r_w":0.1,"response_mode":"x"})"),
      Error);
}

TEST(GatewayConfigTest, FromConfigLoadsModelAndKey) {
  TempDir dir;
  std::ofstream(dir.File("model.json")) << RandomLinearModel("cfg", 10, kShape, 3).file_bytes;
  setenv("DAWN_GATEWAY_TEST_KEY", std::string(64, '7').c_str(), 1);
  std::ofstream(dir.File("gw.json"))
      << R"({"model_file":"model.json","key_env":"DAWN_GATEWAY_TEST_KEY","r_w":0.5,)"
      << R"("api_keys":{"k1":"one"}})";
  const auto g = Gateway::FromConfig(GatewayConfig::LoadFile(dir.File("gw.json")));
  unsetenv("DAWN_GATEWAY_TEST_KEY");
  EXPECT_EQ(g->model().model_id, "cfg");
  EXPECT_EQ(g->keys().k_w[0], 0x77);
  EXPECT_EQ(g->keys().r_w, WatermarkRatio(1, 2));
  EXPECT_EQ(g->permuted_slots(), 10u);
  EXPECT_EQ(g->Authenticate("k1"), "one");
}

// Runs a gateway behind HTTP on an ephemeral port.
class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    auto settings = Settings();
    settings.admin_key = "adm";
    gateway_ = MakeGateway(WatermarkRatio(1, 2), settings);
    server_ = std::make_unique<GatewayServer>(*gateway_);
    port_ = server_->BindToAnyPort("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->ListenAfterBind(); });
    server_->WaitUntilReady();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_->Stop();
    thread_.join();
  }

  httplib::Result Predict(const CanonicalInput& x, const std::string& key) {
    const json body = {{"input_b64", Base64Encode(x.bytes())}, {"shape", x.shape()}, {"dtype", "u8"}};
    return client_->Post("/v1/predict", {{"X-Api-Key", key}}, body.dump(), "application/json");
  }
  std::string Url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<GatewayServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpFixture, PredictMatchesInProcessAnswer) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 30; ++i) {
    const auto x = RandomInput(rng, kShape);
    auto res = Predict(x, "key-a");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto probs = json::parse(res->body).at("probs").get<std::vector<std::string>>();
    ASSERT_EQ(probs, gateway_->HandlePredict("bob", x).probs.WireStrings());
  }
}

TEST_F(HttpFixture, ErrorStatuses) {
  std::mt19937_64 rng(14);
  const auto x = RandomInput(rng, kShape);
  EXPECT_EQ(Predict(x, "wrong")->status, 401);
  EXPECT_EQ(Predict(RandomInput(rng, {16}), "key-a")->status, 400);
  auto bad = client_->Post("/v1/predict", {{"X-Api-Key", "key-a"}}, "{", "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body).at("error"), "parse_error");
  auto dtype = client_->Post(
      "/v1/predict", {{"X-Api-Key", "key-a"}},
      json{{"input_b64", "AA=="}, {"shape", {1}}, {"dtype", "f32"}}.dump(), "application/json");
  EXPECT_EQ(dtype->status, 400);
}

TEST_F(HttpFixture, AdminEndpoints) {
  EXPECT_EQ(client_->Post("/v1/admin/register-model")->status, 401);
  const httplib::Headers admin = {{"X-Admin-Key", "adm"}};
  EXPECT_EQ(client_->Post("/v1/admin/snapshot/alice", admin, "", "text/plain")->status, 409);
  auto reg = client_->Post("/v1/admin/register-model", admin, "", "text/plain");
  ASSERT_EQ(reg->status, 200);
  EXPECT_EQ(json::parse(reg->body).at("kind"), "model_commitment");
  EXPECT_EQ(client_->Post("/v1/admin/snapshot/alice", admin, "", "text/plain")->status, 409);
  EXPECT_EQ(client_->Post("/v1/admin/snapshot/zed", admin, "", "text/plain")->status, 404);

  std::mt19937_64 rng(15);
  for (int i = 0; i < 40; ++i) Predict(RandomInput(rng, kShape), "key-a");
  auto snap = client_->Post("/v1/admin/snapshot/alice", admin, "", "text/plain");
  ASSERT_EQ(snap->status, 200);
  const auto entry = json::parse(snap->body);
  EXPECT_EQ(entry.at("kind"), "watermark_commitment");
  EXPECT_EQ(entry.at("digest"), HexEncode(gateway_->Bundle("alice").digest()));

  auto bundle = client_->Get("/v1/admin/bundle/alice", admin);
  ASSERT_EQ(bundle->status, 200);
  EXPECT_EQ(WatermarkBundle::Parse(bundle->body).digest(), gateway_->Bundle("alice").digest());

  auto stats = client_->Get("/v1/admin/stats", admin);
  ASSERT_EQ(stats->status, 200);
  EXPECT_EQ(json::parse(stats->body).at("requests"), 40);
  EXPECT_EQ(client_->Get("/v1/admin/stats")->status, 401);
}

TEST_F(HttpFixture, HttpSuspectSeesSameClasses) {
  auto suspect = MakeHttpSuspect(Url(), "key-c");
  std::mt19937_64 rng(16);
  for (int i = 0; i < 20; ++i) {
    const auto x = RandomInput(rng, kShape);
    const auto local = gateway_->HandlePredict("alice", x);
    EXPECT_EQ(suspect->QueryClass(x), local.cls);
    EXPECT_EQ(*suspect->QueryWire(x), local.probs.WireStrings());
  }
  auto denied = MakeHttpSuspect(Url(), "bad-key");
  EXPECT_THROW(denied->QueryClass(RandomInput(rng, kShape)), Error);
}

TEST(HttpSuspectTest, UnreachableGateway) {
  auto suspect = MakeHttpSuspect("http://127.0.0.1:1", "k");
  std::mt19937_64 rng(17);
  try {
    suspect->QueryClass(RandomInput(rng, kShape));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSuspectUnreachable);
  }
}

}  // namespace
}  // namespace dawn
