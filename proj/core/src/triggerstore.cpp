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

#include "dawn/triggerstore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json RecordToLogJson(const TriggerRecord& rec) {
  return {{"client_id", rec.client_id}, {"input", InputToJson(rec.input)},
          {"b_class", rec.b_class},     {"f_class", rec.f_class},
          {"seq", rec.seq},             {"ts", rec.ts}};
}

TriggerRecord RecordFromJson(const json& j) {
  TriggerRecord rec;
  rec.client_id = j.value("client_id", std::string());
  rec.input = InputFromJson(j.at("input"));
  rec.b_class = j.at("b_class").get<std::size_t>();
  rec.f_class = j.at("f_class").get<std::size_t>();
  rec.seq = j.value("seq", std::uint64_t{0});
  rec.ts = j.value("ts", std::string());
  return rec;
}

void WriteAll(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kStorageFailure, "write failed: " + std::string(std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

json InputToJson(const CanonicalInput& x) {
  return {{"dtype", "u8"}, {"shape", x.shape()}, {"b64", Base64Encode(x.bytes())}};
}

CanonicalInput InputFromJson(const json& j) {
  try {
    const std::string dtype = j.at("dtype").get<std::string>();
    const auto shape = j.at("shape").get<std::vector<std::uint32_t>>();
    const Bytes bytes = Base64Decode(j.at("b64").get<std::string>());
    return Canonicalize(dtype == "u8" ? std::uint8_t{0x01} : std::uint8_t{0x00}, shape, bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("input: ") + e.what());
  }
}

std::string WatermarkBundle::Serialize() const {
  json recs = json::array();
  for (const auto& rec : records) {
    recs.push_back({{"input", InputToJson(rec.input)},
                    {"input_digest", HexEncode(rec.input.digest())},
                    {"b_class", rec.b_class},
                    {"f_class", rec.f_class}});
  }
  const json doc = {{"client_id", client_id},
                    {"model_digest", HexEncode(model_digest)},
                    {"size", records.size()},
                    {"records", recs}};
  return doc.dump();
}

Digest WatermarkBundle::digest() const { return Sha3_256(AsBytes(Serialize())); }

WatermarkBundle WatermarkBundle::Parse(const std::string& text) {
  WatermarkBundle b;
  try {
    const json doc = json::parse(text);
    b.client_id = doc.at("client_id").get<std::string>();
    b.model_digest = DigestFromHex(doc.at("model_digest").get<std::string>());
    for (const json& r : doc.at("records")) {
      TriggerRecord rec = RecordFromJson(r);
      rec.client_id = b.client_id;
      b.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bundle: ") + e.what());
  }
  std::sort(b.records.begin(), b.records.end(), [](const auto& x, const auto& y) {
    return x.input.digest() < y.input.digest();
  });
  return b;
}

WatermarkBundle WatermarkBundle::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot read bundle file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void WatermarkBundle::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << Serialize() << '\n';
  if (!out) throw Error(ErrorCode::kStorageFailure, "cannot write bundle file " + path);
}

struct TriggerStore::ClientLog {
  mutable std::mutex mutex;
  // Keyed by input digest, which gives the canonical bundle order for free.
  std::map<Digest, TriggerRecord> records;
  std::uint64_t next_seq = 0;
  int fd = -1;
};

TriggerStore::TriggerStore(Options options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
  if (options_.directory.empty()) return;
  std::error_code ec;
  fs::create_directories(options_.directory, ec);
  if (ec || !fs::is_directory(options_.directory)) {
    throw Error(ErrorCode::kStorageFailure, "cannot create trigger directory " + options_.directory);
  }
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(options_.directory)) {
    if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& p : logs) Replay(p.string());
}

TriggerStore::~TriggerStore() {
  for (auto& [id, log] : clients_) {
    if (log->fd >= 0) ::close(log->fd);
  }
}

void TriggerStore::Replay(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TriggerRecord rec;
    try {
      rec = RecordFromJson(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStorageFailure, "corrupt trigger log " + path + ": " + e.what());
    }
    ClientLog& log = GetOrCreate(rec.client_id);
    log.next_seq = std::max(log.next_seq, rec.seq + 1);
    const Digest key = rec.input.digest();
    log.records.emplace(key, std::move(rec));
  }
}

std::string TriggerStore::LogPath(const std::string& client_id) const {
  if (options_.directory.empty()) return {};
  return (fs::path(options_.directory) / (HexEncode(AsBytes(client_id)) + ".jsonl")).string();
}

TriggerStore::ClientLog& TriggerStore::GetOrCreate(const std::string& client_id) {
  {
    std::shared_lock lock(map_mutex_);
    if (auto it = clients_.find(client_id); it != clients_.end()) return *it->second;
  }
  std::unique_lock lock(map_mutex_);
  auto& slot = clients_[client_id];
  if (!slot) slot = std::make_unique<ClientLog>();
  return *slot;
}

const TriggerStore::ClientLog* TriggerStore::Find(const std::string& client_id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = clients_.find(client_id);
  return it == clients_.end() ? nullptr : it->second.get();
}

void TriggerStore::RegisterClient(const std::string& client_id) { GetOrCreate(client_id); }

RecordOutcome TriggerStore::Record(TriggerRecord rec) {
  if (rec.b_class == rec.f_class) {
    throw Error(ErrorCode::kDomainError, "trigger b_class must differ from f_class");
  }
  if (options_.class_count != 0 &&
      (rec.b_class >= options_.class_count || rec.f_class >= options_.class_count)) {
    throw Error(ErrorCode::kDomainError, "trigger class index out of range");
  }

  ClientLog& log = GetOrCreate(rec.client_id);
  std::lock_guard lock(log.mutex);
  const Digest key = rec.input.digest();
  if (log.records.count(key) != 0) return RecordOutcome::kDeduplicated;

  rec.seq = log.next_seq;
  if (rec.ts.empty()) rec.ts = FormatRfc3339(options_.clock());

  if (!options_.directory.empty()) {
    if (log.fd < 0) {
      const std::string path = LogPath(rec.client_id);
      log.fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
      if (log.fd < 0) {
        throw Error(ErrorCode::kStorageFailure, "cannot open " + path + ": " + std::strerror(errno));
      }
    }
    WriteAll(log.fd, RecordToLogJson(rec).dump() + "\n");
    if (options_.fsync && ::fsync(log.fd) != 0) {
      throw Error(ErrorCode::kStorageFailure, "fsync failed: " + std::string(std::strerror(errno)));
    }
  }
  ++log.next_seq;
  log.records.emplace(key, std::move(rec));
  return RecordOutcome::kAppended;
}

WatermarkBundle TriggerStore::Bundle(const std::string& client_id,
                                     const Digest& model_digest) const {
  const ClientLog* log = Find(client_id);
  if (log == nullptr) throw Error(ErrorCode::kUnknownClient, "unknown client " + client_id);
  WatermarkBundle b;
  b.client_id = client_id;
  b.model_digest = model_digest;
  std::lock_guard lock(log->mutex);
  b.records.reserve(log->records.size());
  for (const auto& [digest, rec] : log->records) b.records.push_back(rec);
  return b;
}

std::size_t TriggerStore::Size(const std::string& client_id) const {
  const ClientLog* log = Find(client_id);
  if (log == nullptr) throw Error(ErrorCode::kUnknownClient, "unknown client " + client_id);
  std::lock_guard lock(log->mutex);
  return log->records.size();
}

std::vector<std::string> TriggerStore::Clients() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, log] : clients_) out.push_back(id);
  return out;
}

}  // namespace dawn
