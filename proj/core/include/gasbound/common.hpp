// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gasbound
{
using u256 = boost::multiprecision::uint256_t;
using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

using bytes = std::vector<uint8_t>;

/// Rounds a byte count up to 32-byte EVM words.
inline u256 to_words(const u256& size_in_bytes)
{
    return (size_in_bytes + 31) >> 5;
}

std::string hex(const bytes& data);
std::string hex(const u256& value);

/// Parses a hex string (optional 0x prefix, ignores ASCII whitespace).
/// Returns false when a non-hex character is found or digits are odd.
bool from_hex(std::string_view text, bytes& out);

/// FNV-1a over the raw bytes, used as a stable content identity in reports.
uint64_t content_hash(const bytes& data);
}  // namespace gasbound
