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

#ifndef DAWN_TRIGGERSTORE_HPP_
#define DAWN_TRIGGERSTORE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dawn/canonical_input.hpp"
#include "dawn/codec.hpp"

namespace dawn {

// One watermarked query: the input, the class the gateway answered with
// (b_class) and the honest class (f_class).
struct TriggerRecord {
  std::string client_id;
  CanonicalInput input;
  std::size_t b_class = 0;
  std::size_t f_class = 0;
  std::uint64_t seq = 0;
  std::string ts;  // RFC 3339
};

// A client's watermark (T, B(T)): records ordered by input digest, no
// duplicate inputs. Serialize() is canonical, so Digest() is reproducible.
struct WatermarkBundle {
  std::string client_id;
  Digest model_digest{};
  std::vector<TriggerRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Compact JSON with sorted keys; seq and ts are not part of the bundle.
  std::string Serialize() const;
  Digest digest() const;
  static WatermarkBundle Parse(const std::string& text);
  static WatermarkBundle LoadFile(const std::string& path);
  void SaveFile(const std::string& path) const;
};

nlohmann::json InputToJson(const CanonicalInput& x);
CanonicalInput InputFromJson(const nlohmann::json& j);

enum class RecordOutcome { kAppended, kDeduplicated };

// Per-client append-only trigger logs (JSONL, one file per client) with an
// in-memory index. Appends for one client are serialized; a record is
// durable before Record() returns.
class TriggerStore {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  struct Options {
    // Empty keeps everything in memory.
    std::string directory;
    bool fsync = true;
    // When non-zero, class indices must be < class_count.
    std::size_t class_count = 0;
    Clock clock;
  };

  // Replays any existing logs under options.directory.
  explicit TriggerStore(Options options);
  ~TriggerStore();

  TriggerStore(const TriggerStore&) = delete;
  TriggerStore& operator=(const TriggerStore&) = delete;

  // Makes client_id known (an empty bundle) without writing anything.
  void RegisterClient(const std::string& client_id);

  // Assigns seq (and ts when empty). Throws kDomainError when
  // b_class == f_class or a class is out of range, kStorageFailure on I/O
  // errors (the record is then not indexed).
  RecordOutcome Record(TriggerRecord rec);

  // Throws kUnknownClient.
  WatermarkBundle Bundle(const std::string& client_id, const Digest& model_digest) const;
  std::size_t Size(const std::string& client_id) const;
  std::vector<std::string> Clients() const;

  std::string LogPath(const std::string& client_id) const;

 private:
  struct ClientLog;

  ClientLog& GetOrCreate(const std::string& client_id);
  const ClientLog* Find(const std::string& client_id) const;
  void Replay(const std::string& path);

  Options options_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::unique_ptr<ClientLog>> clients_;
};

}  // namespace dawn

#endif  // DAWN_TRIGGERSTORE_HPP_
