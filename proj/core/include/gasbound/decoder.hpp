// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/common.hpp>
#include <gasbound/opcodes.hpp>

#include <optional>
#include <span>

namespace gasbound::evm
{
/// One decoded instruction. The raw byte is kept so re-serialization
/// reproduces the input even for bytes outside the pinned opcode set.
struct Instruction
{
    uint32_t offset = 0;
    Opcode opcode = Opcode::INVALID;
    uint8_t raw_byte = 0xfe;
    bytes immediate;        // non-empty only for PUSH1..PUSH32; always N bytes for PUSHN
    uint8_t present = 0;    // immediate bytes actually present in the code
    bool truncated = false; // PUSH immediate ran past end-of-code, zero-padded

    u256 immediate_value() const;
    /// Bytes of input covered: 1 + immediates present (padding not counted).
    uint32_t size() const { return 1u + present; }
    uint32_t next_offset() const { return offset + size(); }
};

struct DecodedProgram
{
    std::vector<Instruction> instructions;
    uint32_t code_size = 0;

    bool empty() const { return instructions.empty(); }
    /// Instruction starting exactly at `offset`, if any.
    const Instruction* at_offset(uint32_t offset) const;
};

/// Decodes raw bytecode; total (unknown bytes become INVALID, a trailing
/// truncated PUSH is zero-padded and flagged).
DecodedProgram decode(std::span<const uint8_t> code);

/// Inverse of decode for programs with no truncated PUSH; truncated
/// immediates serialize with their padding dropped so byte coverage holds.
bytes serialize(const DecodedProgram& program);
}  // namespace gasbound::evm
