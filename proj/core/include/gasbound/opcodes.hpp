// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace gasbound::evm
{
/// EVM opcodes of the pre-Constantinople schedule (geth 1.8.x era).
/// Unknown bytes decode to INVALID; deployed code routinely carries a
/// metadata trailer that is not executable.
enum class Opcode : uint8_t
{
    STOP = 0x00,
    ADD = 0x01,
    MUL = 0x02,
    SUB = 0x03,
    DIV = 0x04,
    SDIV = 0x05,
    MOD = 0x06,
    SMOD = 0x07,
    ADDMOD = 0x08,
    MULMOD = 0x09,
    EXP = 0x0a,
    SIGNEXTEND = 0x0b,

    LT = 0x10,
    GT = 0x11,
    SLT = 0x12,
    SGT = 0x13,
    EQ = 0x14,
    ISZERO = 0x15,
    AND = 0x16,
    OR = 0x17,
    XOR = 0x18,
    NOT = 0x19,
    BYTE = 0x1a,

    SHA3 = 0x20,

    ADDRESS = 0x30,
    BALANCE = 0x31,
    ORIGIN = 0x32,
    CALLER = 0x33,
    CALLVALUE = 0x34,
    CALLDATALOAD = 0x35,
    CALLDATASIZE = 0x36,
    CALLDATACOPY = 0x37,
    CODESIZE = 0x38,
    CODECOPY = 0x39,
    GASPRICE = 0x3a,
    EXTCODESIZE = 0x3b,
    EXTCODECOPY = 0x3c,
    RETURNDATASIZE = 0x3d,
    RETURNDATACOPY = 0x3e,

    BLOCKHASH = 0x40,
    COINBASE = 0x41,
    TIMESTAMP = 0x42,
    NUMBER = 0x43,
    DIFFICULTY = 0x44,
    GASLIMIT = 0x45,

    POP = 0x50,
    MLOAD = 0x51,
    MSTORE = 0x52,
    MSTORE8 = 0x53,
    SLOAD = 0x54,
    SSTORE = 0x55,
    JUMP = 0x56,
    JUMPI = 0x57,
    PC = 0x58,
    MSIZE = 0x59,
    GAS = 0x5a,
    JUMPDEST = 0x5b,

    PUSH1 = 0x60,
    PUSH32 = 0x7f,
    DUP1 = 0x80,
    DUP16 = 0x8f,
    SWAP1 = 0x90,
    SWAP16 = 0x9f,

    LOG0 = 0xa0,
    LOG1 = 0xa1,
    LOG2 = 0xa2,
    LOG3 = 0xa3,
    LOG4 = 0xa4,

    CREATE = 0xf0,
    CALL = 0xf1,
    CALLCODE = 0xf2,
    RETURN = 0xf3,
    DELEGATECALL = 0xf4,
    STATICCALL = 0xfa,
    REVERT = 0xfd,
    INVALID = 0xfe,
    SELFDESTRUCT = 0xff,
};

constexpr bool is_push(Opcode op)
{
    return op >= Opcode::PUSH1 && op <= Opcode::PUSH32;
}
constexpr bool is_dup(Opcode op)
{
    return op >= Opcode::DUP1 && op <= Opcode::DUP16;
}
constexpr bool is_swap(Opcode op)
{
    return op >= Opcode::SWAP1 && op <= Opcode::SWAP16;
}
constexpr bool is_log(Opcode op)
{
    return op >= Opcode::LOG0 && op <= Opcode::LOG4;
}

/// Immediate width in bytes: N for PUSHN, 0 otherwise.
constexpr unsigned immediate_size(Opcode op)
{
    return is_push(op) ? static_cast<unsigned>(op) - 0x5f : 0;
}

/// DUPn -> n, SWAPn -> n, LOGn -> n.
constexpr unsigned opcode_index(Opcode op)
{
    if (is_dup(op))
        return static_cast<unsigned>(op) - 0x7f;
    if (is_swap(op))
        return static_cast<unsigned>(op) - 0x8f;
    if (is_log(op))
        return static_cast<unsigned>(op) - 0xa0;
    if (is_push(op))
        return immediate_size(op);
    return 0;
}

/// Static per-opcode metadata.
///
/// DUP/SWAP are modelled as in-place stack accesses (pushes in {0,1}):
/// DUPn pops 0 / pushes 1, SWAPn pops 0 / pushes 0; min_stack records
/// the depth each actually requires.
struct OpcodeInfo
{
    std::string_view mnemonic;
    uint8_t stack_pops = 0;
    uint8_t stack_pushes = 0;
    uint8_t min_stack = 0;
    bool is_terminator = false;  // STOP, RETURN, REVERT, SELFDESTRUCT, INVALID, JUMP
    bool is_jump = false;        // JUMP, JUMPI
    bool touches_memory = false;
    bool touches_storage = false;
};

/// True when the byte is an opcode of the pinned schedule.
bool is_known_opcode(uint8_t byte);

/// Metadata table entry; total over the enumeration.
const OpcodeInfo& opcode_info(Opcode op);

std::string_view mnemonic(Opcode op);

/// Reverse lookup used by the assembler and schedule-override parser.
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);
}  // namespace gasbound::evm
