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
// 256-bit word semantics shared by the symbolic executor's constant folding,
// the metering interpreter, and the test-only RBR interpreter. Arithmetic is
// modulo 2^256 (the unchecked fixed-width cpp_int already wraps).

constexpr u256 sign_bit_mask()
{
    return u256(1) << 255;
}

inline bool is_negative(const u256& v)
{
    return (v & sign_bit_mask()) != 0;
}

inline u256 negate(const u256& v)
{
    return ~v + 1;
}

inline u256 udiv(const u256& a, const u256& b)
{
    return b == 0 ? u256(0) : u256(a / b);
}

inline u256 umod(const u256& a, const u256& b)
{
    return b == 0 ? u256(0) : u256(a % b);
}

inline u256 sdiv(const u256& a, const u256& b)
{
    if (b == 0)
        return 0;
    const bool neg = is_negative(a) != is_negative(b);
    const u256 ua = is_negative(a) ? negate(a) : a;
    const u256 ub = is_negative(b) ? negate(b) : b;
    const u256 q = ua / ub;
    return neg ? negate(q) : q;
}

inline u256 smod(const u256& a, const u256& b)
{
    if (b == 0)
        return 0;
    const u256 ua = is_negative(a) ? negate(a) : a;
    const u256 ub = is_negative(b) ? negate(b) : b;
    const u256 r = ua % ub;
    return is_negative(a) ? negate(r) : r;
}

inline u256 exp_word(const u256& base, const u256& exponent)
{
    u256 result = 1;
    u256 b = base;
    u256 e = exponent;
    while (e != 0)
    {
        if ((e & 1) != 0)
            result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

inline u256 signextend(const u256& byte_index, const u256& value)
{
    if (byte_index >= 31)
        return value;
    const unsigned bit = static_cast<unsigned>(byte_index) * 8 + 7;
    const u256 mask = (u256(1) << (bit + 1)) - 1;
    if ((value & (u256(1) << bit)) != 0)
        return value | ~mask;
    return value & mask;
}

inline u256 slt(const u256& a, const u256& b)
{
    const bool na = is_negative(a);
    const bool nb = is_negative(b);
    if (na != nb)
        return na ? 1 : 0;
    return a < b ? 1 : 0;
}

inline u256 byte_op(const u256& index, const u256& value)
{
    if (index >= 32)
        return 0;
    const unsigned shift = (31 - static_cast<unsigned>(index)) * 8;
    return (value >> shift) & 0xff;
}

/// Folds a pure stack operation over concrete operands (operand 0 = stack
/// top). Returns nullopt for opcodes whose result depends on anything but
/// the operands (memory, environment, SHA3).
std::optional<u256> fold_constant(Opcode op, std::span<const u256> operands);

/// Number of bytes needed to represent v; 0 for v == 0.
unsigned byte_width(const u256& v);
}  // namespace gasbound::evm
