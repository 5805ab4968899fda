// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/common.hpp>

#include <array>
#include <span>
#include <string_view>

namespace gasbound::evm
{
/// Keccak-256 (the original pre-FIPS padding, as used by the EVM).
/// Needed only to derive 4-byte selectors from ABI signatures; the metering
/// interpreter uses its own stand-in hash.
std::array<uint8_t, 32> keccak256(std::span<const uint8_t> data);

/// First 4 bytes of keccak256 over a canonical function signature,
/// e.g. "transfer(address,uint256)" -> 0xa9059cbb.
uint32_t selector(std::string_view signature);
}  // namespace gasbound::evm
