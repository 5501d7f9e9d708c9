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

#ifndef DAWN_GATEWAY_HPP_
#define DAWN_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "dawn/bulletin.hpp"
#include "dawn/hashcore.hpp"
#include "dawn/model.hpp"
#include "dawn/permute.hpp"
#include "dawn/triggerstore.hpp"

namespace dawn {

enum class ResponseMode { kFullVector, kClassOnly };

// Runtime settings of a gateway whose model and keys are already loaded.
struct GatewaySettings {
  std::size_t k = 0;  // permuted slots; 0 selects min(m, 16)
  ResponseMode response_mode = ResponseMode::kFullVector;
  std::map<std::string, std::string> api_keys;  // api key -> client id
  std::string admin_key;                        // empty disables admin auth
  std::string trigger_dir;                      // empty keeps triggers in memory
  bool fsync = true;
  std::string bulletin_file;  // empty keeps the bulletin in memory
  std::uint64_t auto_register_every = 25;  // 0 disables automatic snapshots
  std::function<std::chrono::system_clock::time_point()> clock;
};

// The config file (JSON). Relative paths resolve against the file's
// directory.
//   {"model_file": "...", "key_file": "..." | "key_env": "VAR",
//    "r_w": "0.00426", "mapping": {"kind": "mask_bin", "q": 2, "r": 4},
//    "k": 16, "response_mode": "full_vector" | "class_only",
//    "api_keys": {"<key>": "<client id>"}, "admin_key": "...",
//    "listen": "127.0.0.1:8080", "trigger_dir": "...",
//    "bulletin_file": "...", "auto_register_every": 25, "fsync": true}
struct GatewayConfig {
  std::string model_file;
  std::string key_file;
  std::string key_env;
  WatermarkRatio r_w;
  MappingConfig mapping;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  GatewaySettings settings;

  static GatewayConfig Parse(const std::string& text, const std::string& base_dir = ".");
  static GatewayConfig LoadFile(const std::string& path);
};

struct PredictResponse {
  PredictionVector probs;
  std::size_t cls = 0;
  // Telemetry only; never serialized to clients.
  bool watermarked = false;

  nlohmann::json ToWire(ResponseMode mode) const;
};

// The watermarking prediction service. Model, keys and settings are
// immutable after construction; HandlePredict may be called concurrently.
class Gateway {
 public:
  Gateway(ModelSpec model, ModelKeySet keys, GatewaySettings settings);

  static std::unique_ptr<Gateway> FromConfig(const GatewayConfig& config);

  // Throws kUnauthorized for unknown keys.
  const std::string& Authenticate(const std::string& api_key) const;
  bool IsAdmin(const std::string& admin_key) const;

  // Honest prediction, or its backdoored permutation for watermarked inputs.
  // A watermarked answer is recorded for the client before it is returned;
  // a storage failure propagates and the answer is withheld.
  PredictResponse HandlePredict(const std::string& client_id, const CanonicalInput& x);

  BulletinEntry RegisterModel();
  // Publishes the digest of the client's current bundle, linked to the model.
  // Throws kModelNotRegistered, kEmptyBundle, kUnknownClient.
  BulletinEntry SnapshotRegister(const std::string& client_id);

  WatermarkBundle Bundle(const std::string& client_id) const;
  nlohmann::json Stats() const;

  const ModelSpec& model() const { return model_; }
  const Digest& model_digest() const { return model_digest_; }
  const ModelKeySet& keys() const { return keys_; }
  const GatewaySettings& settings() const { return settings_; }
  std::size_t permuted_slots() const { return k_; }
  Bulletin& bulletin() { return bulletin_; }
  const Bulletin& bulletin() const { return bulletin_; }
  TriggerStore& triggers() { return *triggers_; }

 private:
  bool ModelRegistered() const;
  void MaybeAutoRegister(const std::string& client_id);

  ModelSpec model_;
  Digest model_digest_{};
  ModelKeySet keys_;
  GatewaySettings settings_;
  std::size_t k_ = 0;
  std::map<std::string, std::string> clients_by_key_;
  std::unique_ptr<TriggerStore> triggers_;
  Bulletin bulletin_;

  mutable std::mutex snapshot_mutex_;
  std::map<std::string, std::uint64_t> new_since_snapshot_;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> watermarked_{0};
  std::atomic<std::uint64_t> recorded_{0};
  std::atomic<std::uint64_t> unrecordable_{0};
  std::atomic<std::uint64_t> auto_snapshots_{0};
  std::atomic<std::uint64_t> auto_snapshot_failures_{0};
};

// HTTP front end:
//   POST /v1/predict                    (X-Api-Key)
//   POST /v1/admin/register-model       (X-Admin-Key when configured)
//   POST /v1/admin/snapshot/{client_id}
//   GET  /v1/admin/bundle/{client_id}
//   GET  /v1/admin/stats
class GatewayServer {
 public:
  explicit GatewayServer(Gateway& gateway);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Blocks until Stop().
  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; call ListenAfterBind() to serve.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  // Blocks until a concurrent Listen/ListenAfterBind is accepting.
  void WaitUntilReady();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// A gateway or any compatible prediction API reached over HTTP, used as a
// suspect endpoint by the judge.
class SuspectEndpoint;
std::unique_ptr<SuspectEndpoint> MakeHttpSuspect(const std::string& base_url,
                                                 const std::string& api_key);

}  // namespace dawn

#endif  // DAWN_GATEWAY_HPP_
