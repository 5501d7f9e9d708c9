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

#ifndef DAWN_CODEC_HPP_
#define DAWN_CODEC_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Byte-level helpers shared by every module: digests, HMAC, hex and base64
// codecs, 128-bit integer formatting and RFC 3339 timestamps.

namespace dawn {

__extension__ typedef unsigned __int128 u128;
using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

ByteView AsBytes(std::string_view s);

Digest Sha3_256(ByteView data);
Digest Sha256(ByteView data);
Digest HmacSha256(ByteView key, ByteView message);

std::string HexEncode(ByteView data);
// Throws Error(kParseError) on odd length or non-hex characters.
Bytes HexDecode(std::string_view hex);
Digest DigestFromHex(std::string_view hex);

std::string Base64Encode(ByteView data);
Bytes Base64Decode(std::string_view text);

// Big-endian reading of exactly 16 bytes.
u128 LoadBigEndian128(ByteView bytes);
std::string U128ToDecimal(u128 value);
std::string U128ToHex(u128 value);

// UTC, millisecond precision, e.g. "2026-10-16T08:30:00.125Z". Fixed width,
// so lexicographic order matches chronological order.
std::string FormatRfc3339(std::chrono::system_clock::time_point tp);

}  // namespace dawn

#endif  // DAWN_CODEC_HPP_
