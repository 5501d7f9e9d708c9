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

#include "dawn/bulletin.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;

constexpr std::string_view kModelKind = "model_commitment";
constexpr std::string_view kWatermarkKind = "watermark_commitment";

json EntryBody(const BulletinEntry& e) {
  json j = {{"index", e.index},
            {"ts", e.ts},
            {"kind", e.kind == CommitmentKind::kModel ? kModelKind : kWatermarkKind},
            {"digest", HexEncode(e.digest)},
            {"prev_hash", HexEncode(e.prev_hash)}};
  if (e.linked_model_digest) j["linked_model_digest"] = HexEncode(*e.linked_model_digest);
  return j;
}

[[noreturn]] void Corrupt(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::kChainCorrupt, "line " + std::to_string(line + 1) + ": " + why);
}

BulletinEntry ParseLine(const std::string& line, std::size_t pos) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    Corrupt(pos, "not valid JSON");
  }
  if (j.dump() != line) Corrupt(pos, "not in canonical form");
  try {
    BulletinEntry e;
    e.index = j.at("index").get<std::uint64_t>();
    e.ts = j.at("ts").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == kModelKind) {
      e.kind = CommitmentKind::kModel;
    } else if (kind == kWatermarkKind) {
      e.kind = CommitmentKind::kWatermark;
    } else {
      Corrupt(pos, "unknown kind");
    }
    e.digest = DigestFromHex(j.at("digest").get<std::string>());
    e.prev_hash = DigestFromHex(j.at("prev_hash").get<std::string>());
    if (j.contains("linked_model_digest")) {
      e.linked_model_digest = DigestFromHex(j.at("linked_model_digest").get<std::string>());
    }
    if ((e.kind == CommitmentKind::kWatermark) != e.linked_model_digest.has_value()) {
      Corrupt(pos, "linked_model_digest present iff watermark commitment");
    }
    const std::string stored_hash = j.at("entry_hash").get<std::string>();
    if (stored_hash != HexEncode(Sha3_256(AsBytes(EntryBody(e).dump())))) {
      Corrupt(pos, "entry_hash mismatch");
    }
    if (e.CanonicalLine() != line) Corrupt(pos, "unexpected fields");
    return e;
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kChainCorrupt) throw;
    Corrupt(pos, ex.what());
  } catch (const std::exception& ex) {
    Corrupt(pos, ex.what());
  }
}

}  // namespace

std::string BulletinEntry::CanonicalLine() const {
  json j = EntryBody(*this);
  j["entry_hash"] = HexEncode(Sha3_256(AsBytes(j.dump())));
  return j.dump();
}

std::string_view RulingName(Ruling ruling) {
  switch (ruling) {
    case Ruling::kWatermarkValid: return "watermark_valid";
    case Ruling::kWatermarkInvalidOrder: return "watermark_invalid_order";
    case Ruling::kContesterWins: return "contester_wins";
    case Ruling::kClaimantWins: return "claimant_wins";
    case Ruling::kContesterUnregistered: return "contester_unregistered";
  }
  return "unknown";
}

Bulletin::Bulletin() : Bulletin(Clock{}) {}

Bulletin::Bulletin(Clock clock) : clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
}

Bulletin::Bulletin(Bulletin&& other) noexcept
    : clock_(std::move(other.clock_)),
      path_(std::move(other.path_)),
      lines_(std::move(other.lines_)) {}

Bulletin& Bulletin::operator=(Bulletin&& other) noexcept {
  clock_ = std::move(other.clock_);
  path_ = std::move(other.path_);
  lines_ = std::move(other.lines_);
  return *this;
}

Bulletin Bulletin::FromText(std::string_view text) {
  Bulletin board;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) board.lines_.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return board;
}

Bulletin Bulletin::Open(const std::string& path, Clock clock) {
  Bulletin board(std::move(clock));
  board.path_ = path;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) board.lines_.push_back(line);
  }
  return board;
}

BulletinEntry Bulletin::Append(CommitmentKind kind, const Digest& digest,
                               const std::optional<Digest>& link) {
  std::unique_lock lock(mutex_);
  BulletinEntry e;
  e.kind = kind;
  e.digest = digest;
  e.linked_model_digest = link;
  e.index = lines_.size();
  e.ts = FormatRfc3339(clock_());
  if (!lines_.empty()) {
    e.prev_hash = Sha3_256(AsBytes(lines_.back()));
    // Keep timestamps non-decreasing even if the wall clock steps back.
    const BulletinEntry last = ParseLine(lines_.back(), lines_.size() - 1);
    if (e.ts < last.ts) e.ts = last.ts;
  }
  const std::string line = e.CanonicalLine();

  if (!path_.empty()) {
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
      throw Error(ErrorCode::kStorageFailure, "cannot open bulletin " + path_ + ": " + std::strerror(errno));
    }
    const std::string data = line + "\n";
    const bool ok = ::write(fd, data.data(), data.size()) == static_cast<ssize_t>(data.size()) &&
                    ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw Error(ErrorCode::kStorageFailure, "cannot append to bulletin " + path_);
  }
  lines_.push_back(line);
  return e;
}

BulletinEntry Bulletin::PublishModel(const Digest& model_digest) {
  return Append(CommitmentKind::kModel, model_digest, std::nullopt);
}

BulletinEntry Bulletin::PublishWatermark(const Digest& wm_digest, const Digest& model_digest) {
  return Append(CommitmentKind::kWatermark, wm_digest, model_digest);
}

std::vector<BulletinEntry> Bulletin::VerifiedEntries() const {
  std::shared_lock lock(mutex_);
  std::vector<BulletinEntry> entries;
  entries.reserve(lines_.size());
  Digest expected_prev{};
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    BulletinEntry e = ParseLine(lines_[i], i);
    if (e.index != i) Corrupt(i, "index out of sequence");
    if (e.prev_hash != expected_prev) Corrupt(i, "prev_hash does not match previous line");
    if (i > 0 && e.ts < entries.back().ts) Corrupt(i, "timestamp decreases");
    expected_prev = Sha3_256(AsBytes(lines_[i]));
    entries.push_back(std::move(e));
  }
  return entries;
}

void Bulletin::VerifyChain() const { VerifiedEntries(); }

std::optional<BulletinEntry> Bulletin::FirstModelCommitment(const Digest& model_digest) const {
  for (auto& e : VerifiedEntries()) {
    if (e.kind == CommitmentKind::kModel && e.digest == model_digest) return e;
  }
  return std::nullopt;
}

std::optional<BulletinEntry> Bulletin::FindWatermark(
    const Digest& wm_digest, const std::optional<Digest>& model_digest) const {
  for (auto& e : VerifiedEntries()) {
    if (e.kind == CommitmentKind::kWatermark && e.digest == wm_digest &&
        (!model_digest || e.linked_model_digest == model_digest)) {
      return e;
    }
  }
  return std::nullopt;
}

Ruling Bulletin::CheckAnteriority(const Digest& wm_digest, const Digest& claimed_model_digest,
                                  const std::optional<Digest>& contesting_model_digest) const {
  const auto entries = VerifiedEntries();
  auto first_model = [&](const Digest& d) -> std::optional<std::uint64_t> {
    for (const auto& e : entries) {
      if (e.kind == CommitmentKind::kModel && e.digest == d) return e.index;
    }
    return std::nullopt;
  };
  std::optional<std::uint64_t> wm_index;
  for (const auto& e : entries) {
    if (e.kind == CommitmentKind::kWatermark && e.digest == wm_digest &&
        e.linked_model_digest == claimed_model_digest) {
      wm_index = e.index;
      break;
    }
  }
  if (!wm_index) {
    throw Error(ErrorCode::kWatermarkNotRegistered,
                "no watermark " + HexEncode(wm_digest) + " linked to the claimed model");
  }

  const auto claimed = first_model(claimed_model_digest);
  if (!claimed || *claimed > *wm_index) return Ruling::kWatermarkInvalidOrder;
  if (!contesting_model_digest) return Ruling::kWatermarkValid;

  const auto contester = first_model(*contesting_model_digest);
  if (!contester) return Ruling::kContesterUnregistered;
  return *contester < *claimed ? Ruling::kContesterWins : Ruling::kClaimantWins;
}

std::uint64_t Bulletin::CountWatermarks(const Digest& model_digest) const {
  std::set<Digest> distinct;
  for (const auto& e : VerifiedEntries()) {
    if (e.kind == CommitmentKind::kWatermark && e.linked_model_digest == model_digest) {
      distinct.insert(e.digest);
    }
  }
  return distinct.size();
}

std::vector<BulletinEntry> Bulletin::Entries() const { return VerifiedEntries(); }

std::vector<std::string> Bulletin::Lines() const {
  std::shared_lock lock(mutex_);
  return lines_;
}

std::size_t Bulletin::size() const {
  std::shared_lock lock(mutex_);
  return lines_.size();
}

}  // namespace dawn
