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

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dawn/bulletin.hpp"
#include "dawn/error.hpp"
#include "test_util.hpp"

namespace dawn {
namespace {

using ::dawn::testing::Epoch;
using ::dawn::testing::TempDir;

// One second per call, starting at the epoch.
Bulletin::Clock Ticking() {
  auto t = std::make_shared<int>(0);
  return [t] { return Epoch((*t)++); };
}

Digest Fill(std::uint8_t b) {
  Digest d;
  d.fill(b);
  return d;
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

TEST(BulletinTest, LinesMatchIndependentSerialization) {
  Bulletin board(Ticking());
  board.PublishModel(Fill(0x11));
  board.PublishWatermark(Fill(0x22), Fill(0x11));
  const auto lines = board.Lines();
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0],
            R"({"digest":"1111111111111111111111111111111111111111111111111111111111111111",)"
            R"("entry_hash":"b83bc891077d03bfcc4e0787b546403d1699c943c9245a3227af9b9f4b1e47f1",)"
            R"("index":0,"kind":"model_commitment","prev_hash":)"
            R"("0000000000000000000000000000000000000000000000000000000000000000",)"
            R"("ts":"1970-01-01T00:00:00.000Z"})");
  EXPECT_EQ(lines[1],
            R"({"digest":"2222222222222222222222222222222222222222222222222222222222222222",)"
            R"("entry_hash":"03f8249fd25ddb437601668ddc8a1dd39c62a7d02bd00d188e3d4a014317d6e0",)"
            R"("index":1,"kind":"watermark_commitment","linked_model_digest":)"
            R"("1111111111111111111111111111111111111111111111111111111111111111","prev_hash":)"
            R"("2664df7c67d0311dd1cea794004763b18e9e7c342c70cd2cbd0b87774e754714",)"
            R"("ts":"1970-01-01T00:00:01.000Z"})");
  EXPECT_NO_THROW(board.VerifyChain());
}

TEST(BulletinTest, FirstModelCommitmentWins) {
  Bulletin board(Ticking());
  board.PublishModel(Fill(1));
  board.PublishModel(Fill(2));
  board.PublishModel(Fill(1));
  const auto first = board.FirstModelCommitment(Fill(1));
  ASSERT_TRUE(first.has_value());
  EXPECT_EQ(first->index, 0u);
  EXPECT_FALSE(board.FirstModelCommitment(Fill(3)).has_value());
}

// Board with fillers so that the model lands at `model_at` and the
// watermark at `wm_at`.
Bulletin Layout(std::uint64_t model_at, std::uint64_t wm_at) {
  Bulletin board(Ticking());
  for (std::uint64_t i = 0; i <= std::max(model_at, wm_at); ++i) {
    if (i == model_at) {
      board.PublishModel(Fill(0xaa));
    } else if (i == wm_at) {
      board.PublishWatermark(Fill(0xbb), Fill(0xaa));
    } else {
      board.PublishModel(Fill(static_cast<std::uint8_t>(i)));
    }
  }
  return board;
}

TEST(AnteriorityTest, Rulings) {
  EXPECT_EQ(Layout(3, 7).CheckAnteriority(Fill(0xbb), Fill(0xaa)), Ruling::kWatermarkValid);
  EXPECT_EQ(Layout(3, 2).CheckAnteriority(Fill(0xbb), Fill(0xaa)),
            Ruling::kWatermarkInvalidOrder);

  auto board = Layout(3, 7);
  // Filler entry 1 is the contesting model, committed before the claimant.
  EXPECT_EQ(board.CheckAnteriority(Fill(0xbb), Fill(0xaa), Fill(1)), Ruling::kContesterWins);
  board.PublishModel(Fill(0xcc));
  EXPECT_EQ(board.CheckAnteriority(Fill(0xbb), Fill(0xaa), Fill(0xcc)), Ruling::kClaimantWins);
  EXPECT_EQ(board.CheckAnteriority(Fill(0xbb), Fill(0xaa), Fill(0xdd)),
            Ruling::kContesterUnregistered);
  EXPECT_EQ(RulingName(Ruling::kContesterWins), "contester_wins");
}

TEST(AnteriorityTest, MissingWatermarkOrModel) {
  Bulletin board(Ticking());
  board.PublishModel(Fill(0xaa));
  EXPECT_EQ(CodeOf([&] { board.CheckAnteriority(Fill(0xbb), Fill(0xaa)); }),
            ErrorCode::kWatermarkNotRegistered);
  board.PublishWatermark(Fill(0xbb), Fill(0xee));
  // Registered, but linked to a model that was never committed.
  EXPECT_EQ(board.CheckAnteriority(Fill(0xbb), Fill(0xee)), Ruling::kWatermarkInvalidOrder);
}

TEST(BulletinTest, CountWatermarksCountsDistinctDigests) {
  Bulletin board(Ticking());
  EXPECT_EQ(board.CountWatermarks(Fill(9)), 0u);
  std::mt19937_64 rng(3);
  std::set<std::uint8_t> published;
  for (int i = 0; i < 200; ++i) {
    const auto d = static_cast<std::uint8_t>(rng() % 40);
    board.PublishWatermark(Fill(d), Fill(9));
    published.insert(d);
    if (rng() % 5 == 0) board.PublishWatermark(Fill(d), Fill(8));
  }
  EXPECT_EQ(board.CountWatermarks(Fill(9)), published.size());
}

TEST(BulletinTest, TimestampsNeverDecrease) {
  int calls = 0;
  Bulletin board([&calls] { return Epoch(calls++ == 0 ? 100 : 50); });
  const auto a = board.PublishModel(Fill(1));
  const auto b = board.PublishModel(Fill(2));
  EXPECT_EQ(a.ts, b.ts);
  EXPECT_NO_THROW(board.VerifyChain());
}

TEST(BulletinTest, EveryByteFlipIsDetected) {
  Bulletin board(Ticking());
  board.PublishModel(Fill(1));
  board.PublishWatermark(Fill(2), Fill(1));
  board.PublishWatermark(Fill(3), Fill(1));
  std::string text;
  for (const auto& l : board.Lines()) text += l + "\n";
  ASSERT_NO_THROW(Bulletin::FromText(text).VerifyChain());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') continue;
    for (char flip : {'\x01', '\x20'}) {
      std::string bad = text;
      bad[i] = static_cast<char>(bad[i] ^ flip);
      if (bad[i] == '\n') continue;
      ASSERT_EQ(CodeOf([&] { Bulletin::FromText(bad).VerifyChain(); }), ErrorCode::kChainCorrupt)
          << "byte " << i;
    }
  }
}

TEST(BulletinTest, DroppedOrReorderedLinesAreDetected) {
  Bulletin board(Ticking());
  for (std::uint8_t i = 0; i < 4; ++i) board.PublishModel(Fill(i));
  const auto lines = board.Lines();
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + "\n";
    return s;
  };
  auto dropped = lines;
  dropped.erase(dropped.begin() + 1);
  EXPECT_THROW(Bulletin::FromText(join(dropped)).VerifyChain(), Error);
  auto swapped = lines;
  std::swap(swapped[1], swapped[2]);
  EXPECT_THROW(Bulletin::FromText(join(swapped)).VerifyChain(), Error);
  // Truncating the tail keeps a valid prefix.
  auto prefix = lines;
  prefix.pop_back();
  EXPECT_NO_THROW(Bulletin::FromText(join(prefix)).VerifyChain());
}

TEST(BulletinTest, FileBackedBoardPersists) {
  TempDir dir;
  const std::string path = dir.File("board.jsonl");
  {
    auto board = Bulletin::Open(path, Ticking());
    board.PublishModel(Fill(5));
    board.PublishWatermark(Fill(6), Fill(5));
  }
  auto reopened = Bulletin::Open(path, [] { return Epoch(10); });
  EXPECT_EQ(reopened.size(), 2u);
  EXPECT_EQ(reopened.CheckAnteriority(Fill(6), Fill(5)), Ruling::kWatermarkValid);
  reopened.PublishWatermark(Fill(7), Fill(5));
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto again = Bulletin::FromText(ss.str());
  EXPECT_EQ(again.CountWatermarks(Fill(5)), 2u);
  EXPECT_NO_THROW(again.VerifyChain());
}

}  // namespace
}  // namespace dawn
