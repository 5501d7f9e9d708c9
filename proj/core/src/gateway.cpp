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

#include "dawn/gateway.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

}  // namespace

GatewayConfig GatewayConfig::Parse(const std::string& text, const std::string& base_dir) {
  GatewayConfig cfg;
  try {
    const json doc = json::parse(text);
    cfg.model_file = Resolve(base_dir, doc.at("model_file").get<std::string>());
    cfg.key_file = Resolve(base_dir, doc.value("key_file", std::string()));
    cfg.key_env = doc.value("key_env", std::string());
    if (cfg.key_file.empty() == cfg.key_env.empty()) {
      throw Error(ErrorCode::kBadConfig, "exactly one of key_file and key_env is required");
    }
    const json& rw = doc.at("r_w");
    cfg.r_w = WatermarkRatio::Parse(rw.is_string() ? rw.get<std::string>() : rw.dump());
    if (doc.contains("mapping")) cfg.mapping = doc.at("mapping").get<MappingConfig>();

    auto& s = cfg.settings;
    s.k = doc.value("k", std::size_t{0});
    const std::string mode = doc.value("response_mode", std::string("full_vector"));
    if (mode == "full_vector") {
      s.response_mode = ResponseMode::kFullVector;
    } else if (mode == "class_only") {
      s.response_mode = ResponseMode::kClassOnly;
    } else {
      throw Error(ErrorCode::kBadConfig, "unknown response_mode " + mode);
    }
    s.api_keys = doc.value("api_keys", std::map<std::string, std::string>{});
    s.admin_key = doc.value("admin_key", std::string());
    s.trigger_dir = Resolve(base_dir, doc.value("trigger_dir", std::string()));
    s.bulletin_file = Resolve(base_dir, doc.value("bulletin_file", std::string()));
    s.auto_register_every = doc.value("auto_register_every", std::uint64_t{25});
    s.fsync = doc.value("fsync", true);

    const std::string listen = doc.value("listen", std::string("127.0.0.1:8080"));
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kBadConfig, "listen must be host:port");
    cfg.listen_host = listen.substr(0, colon);
    cfg.listen_port = std::stoi(listen.substr(colon + 1));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("gateway config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kBadConfig, "gateway config: bad listen port");
  }
  return cfg;
}

GatewayConfig GatewayConfig::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), fs::path(path).parent_path().string());
}

json PredictResponse::ToWire(ResponseMode mode) const {
  if (mode == ResponseMode::kClassOnly) return {{"class", cls}};
  return {{"probs", probs.WireStrings()}};
}

Gateway::Gateway(ModelSpec model, ModelKeySet keys, GatewaySettings settings)
    : model_(std::move(model)),
      keys_(keys),
      settings_(std::move(settings)),
      bulletin_(settings_.clock) {
  model_digest_ = ModelDigest(model_);
  if (model_.m < 2) throw Error(ErrorCode::kTooFewClasses, "model needs m >= 2");
  k_ = settings_.k == 0 ? DefaultPermutedSlots(model_.m) : settings_.k;
  if (k_ < 2 || k_ > std::min(model_.m, kMaxPermutedSlots)) {
    throw Error(ErrorCode::kKTooLarge, "k must lie in [2, min(m, 34)]");
  }
  ValidateMapping(keys_.mapping, model_.input_shape);

  TriggerStore::Options store_opts;
  store_opts.directory = settings_.trigger_dir;
  store_opts.fsync = settings_.fsync;
  store_opts.class_count = model_.m;
  store_opts.clock = settings_.clock;
  triggers_ = std::make_unique<TriggerStore>(std::move(store_opts));
  for (const auto& [key, client] : settings_.api_keys) {
    clients_by_key_[key] = client;
    triggers_->RegisterClient(client);
  }
  if (!settings_.bulletin_file.empty()) {
    bulletin_ = Bulletin::Open(settings_.bulletin_file, settings_.clock);
  }
}

std::unique_ptr<Gateway> Gateway::FromConfig(const GatewayConfig& config) {
  ModelKeySet keys;
  keys.k_w = config.key_file.empty() ? LoadSecretKeyEnv(config.key_env)
                                     : LoadSecretKeyFile(config.key_file);
  keys.r_w = config.r_w;
  keys.mapping = config.mapping;
  return std::make_unique<Gateway>(LoadModelFile(config.model_file), keys, config.settings);
}

const std::string& Gateway::Authenticate(const std::string& api_key) const {
  const auto it = clients_by_key_.find(api_key);
  if (it == clients_by_key_.end()) throw Error(ErrorCode::kUnauthorized, "unknown API key");
  return it->second;
}

bool Gateway::IsAdmin(const std::string& admin_key) const {
  return settings_.admin_key.empty() || admin_key == settings_.admin_key;
}

PredictResponse Gateway::HandlePredict(const std::string& client_id, const CanonicalInput& x) {
  ++requests_;
  PredictResponse out;
  const PredictionVector honest = Predict(model_, x);
  const HashSplit split = SplitForInput(keys_, x);
  if (!WatermarkDecision(keys_, split)) {
    out.probs = honest;
    out.cls = honest.argmax();
    return out;
  }

  out.probs = Backdoor(split, honest, k_);
  out.cls = out.probs.argmax();
  out.watermarked = true;
  ++watermarked_;

  const std::size_t f_class = honest.argmax();
  if (out.cls == f_class) {
    // Only possible when the top probabilities tie; such an answer cannot
    // serve as ownership evidence.
    ++unrecordable_;
    return out;
  }
  TriggerRecord rec;
  rec.client_id = client_id;
  rec.input = x;
  rec.b_class = out.cls;
  rec.f_class = f_class;
  if (triggers_->Record(std::move(rec)) == RecordOutcome::kAppended) {
    ++recorded_;
    MaybeAutoRegister(client_id);
  }
  return out;
}

bool Gateway::ModelRegistered() const {
  return bulletin_.FirstModelCommitment(model_digest_).has_value();
}

void Gateway::MaybeAutoRegister(const std::string& client_id) {
  if (settings_.auto_register_every == 0) return;
  {
    std::lock_guard lock(snapshot_mutex_);
    if (++new_since_snapshot_[client_id] < settings_.auto_register_every) return;
  }
  try {
    SnapshotRegister(client_id);
    ++auto_snapshots_;
  } catch (const Error&) {
    // Model not registered yet or bulletin unavailable; retried on the next
    // new trigger.
    ++auto_snapshot_failures_;
  }
}

BulletinEntry Gateway::RegisterModel() { return bulletin_.PublishModel(model_digest_); }

BulletinEntry Gateway::SnapshotRegister(const std::string& client_id) {
  if (!ModelRegistered()) {
    throw Error(ErrorCode::kModelNotRegistered, "publish the model commitment first");
  }
  const WatermarkBundle bundle = triggers_->Bundle(client_id, model_digest_);
  if (bundle.empty()) throw Error(ErrorCode::kEmptyBundle, "client " + client_id + " has no triggers");
  BulletinEntry entry = bulletin_.PublishWatermark(bundle.digest(), model_digest_);
  std::lock_guard lock(snapshot_mutex_);
  new_since_snapshot_[client_id] = 0;
  return entry;
}

WatermarkBundle Gateway::Bundle(const std::string& client_id) const {
  return triggers_->Bundle(client_id, model_digest_);
}

json Gateway::Stats() const {
  json per_client = json::object();
  for (const auto& id : triggers_->Clients()) per_client[id] = triggers_->Size(id);
  const std::uint64_t requests = requests_;
  const std::uint64_t watermarked = watermarked_;
  return {{"model_id", model_.model_id},
          {"model_digest", HexEncode(model_digest_)},
          {"model_registered", ModelRegistered()},
          {"r_w", keys_.r_w.ToString()},
          {"requests", requests},
          {"watermarked_responses", watermarked},
          {"observed_watermark_rate",
           requests == 0 ? 0.0 : static_cast<double>(watermarked) / static_cast<double>(requests)},
          {"triggers_recorded", recorded_.load()},
          {"unrecordable_watermarks", unrecordable_.load()},
          {"auto_snapshots", auto_snapshots_.load()},
          {"auto_snapshot_failures", auto_snapshot_failures_.load()},
          {"bulletin_entries", bulletin_.size()},
          {"bundle_sizes", per_client}};
}

}  // namespace dawn
