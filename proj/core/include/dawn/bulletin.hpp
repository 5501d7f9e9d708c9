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

#ifndef DAWN_BULLETIN_HPP_
#define DAWN_BULLETIN_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dawn/codec.hpp"

namespace dawn {

enum class CommitmentKind { kModel, kWatermark };

struct BulletinEntry {
  std::uint64_t index = 0;
  std::string ts;  // RFC 3339, non-decreasing along the chain
  CommitmentKind kind = CommitmentKind::kModel;
  Digest digest{};
  std::optional<Digest> linked_model_digest;  // watermark entries only
  Digest prev_hash{};                          // SHA3-256 of the previous line

  // The persisted line: compact JSON, sorted keys, including `entry_hash`
  // (SHA3-256 of the same object without that field).
  std::string CanonicalLine() const;
};

enum class Ruling {
  kWatermarkValid,
  kWatermarkInvalidOrder,
  kContesterWins,
  kClaimantWins,
  kContesterUnregistered,
};

std::string_view RulingName(Ruling ruling);

// Time-stamped append-only commitment log. Each line commits to its
// predecessor through prev_hash, so any edit to a persisted line breaks
// VerifyChain(). Validity of publications is judged lazily by the query
// methods, all of which apply the first-occurrence rule.
class Bulletin {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  // In-memory board.
  Bulletin();
  explicit Bulletin(Clock clock);
  // File-backed board (JSONL). Existing content is loaded verbatim; it is
  // only verified when queried.
  static Bulletin Open(const std::string& path, Clock clock = {});
  // Loads a board from JSONL text without a backing file (read-only use).
  static Bulletin FromText(std::string_view text);

  Bulletin(Bulletin&&) noexcept;
  Bulletin& operator=(Bulletin&&) noexcept;

  BulletinEntry PublishModel(const Digest& model_digest);
  BulletinEntry PublishWatermark(const Digest& wm_digest, const Digest& model_digest);

  // Throws kChainCorrupt on the first bad line.
  void VerifyChain() const;

  // First model commitment of `model_digest`. Verifies the chain.
  std::optional<BulletinEntry> FirstModelCommitment(const Digest& model_digest) const;
  // First watermark commitment of wm_digest linked to model_digest (any link
  // when model_digest is nullopt). Verifies the chain.
  std::optional<BulletinEntry> FindWatermark(const Digest& wm_digest,
                                             const std::optional<Digest>& model_digest) const;

  // Ownership rules:
  //  (a) the watermark must be published after the claimed model;
  //  (b) a contester can refute only with a published model digest;
  //  (c),(d) the earliest published model commitment wins contention.
  // Throws kWatermarkNotRegistered when no entry links wm_digest to the
  // claimed model, kChainCorrupt when the chain is broken.
  Ruling CheckAnteriority(const Digest& wm_digest, const Digest& claimed_model_digest,
                          const std::optional<Digest>& contesting_model_digest = {}) const;

  // Distinct watermark digests linked to model_digest.
  std::uint64_t CountWatermarks(const Digest& model_digest) const;

  std::vector<BulletinEntry> Entries() const;
  std::vector<std::string> Lines() const;
  std::size_t size() const;

 private:
  BulletinEntry Append(CommitmentKind kind, const Digest& digest,
                       const std::optional<Digest>& link);
  std::vector<BulletinEntry> VerifiedEntries() const;

  Clock clock_;
  std::string path_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> lines_;
};

}  // namespace dawn

#endif  // DAWN_BULLETIN_HPP_
