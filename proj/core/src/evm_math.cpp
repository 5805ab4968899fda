// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/evm_math.hpp>

namespace gasbound::evm
{
std::optional<u256> fold_constant(Opcode op, std::span<const u256> operands)
{
    const auto a = [&](size_t i) { return operands[i]; };
    switch (op)
    {
    case Opcode::ADD:
        return a(0) + a(1);
    case Opcode::MUL:
        return a(0) * a(1);
    case Opcode::SUB:
        return a(0) - a(1);
    case Opcode::DIV:
        return udiv(a(0), a(1));
    case Opcode::SDIV:
        return sdiv(a(0), a(1));
    case Opcode::MOD:
        return umod(a(0), a(1));
    case Opcode::SMOD:
        return smod(a(0), a(1));
    case Opcode::ADDMOD:
    {
        if (a(2) == 0)
            return u256(0);
        const bigint sum = bigint(a(0)) + bigint(a(1));
        return u256(sum % bigint(a(2)));
    }
    case Opcode::MULMOD:
    {
        if (a(2) == 0)
            return u256(0);
        const bigint product = bigint(a(0)) * bigint(a(1));
        return u256(product % bigint(a(2)));
    }
    case Opcode::EXP:
        return exp_word(a(0), a(1));
    case Opcode::SIGNEXTEND:
        return signextend(a(0), a(1));
    case Opcode::LT:
        return u256(a(0) < a(1) ? 1 : 0);
    case Opcode::GT:
        return u256(a(0) > a(1) ? 1 : 0);
    case Opcode::SLT:
        return slt(a(0), a(1));
    case Opcode::SGT:
        return slt(a(1), a(0));
    case Opcode::EQ:
        return u256(a(0) == a(1) ? 1 : 0);
    case Opcode::ISZERO:
        return u256(a(0) == 0 ? 1 : 0);
    case Opcode::AND:
        return a(0) & a(1);
    case Opcode::OR:
        return a(0) | a(1);
    case Opcode::XOR:
        return a(0) ^ a(1);
    case Opcode::NOT:
        return ~a(0);
    case Opcode::BYTE:
        return byte_op(a(0), a(1));
    default:
        return std::nullopt;
    }
}

unsigned byte_width(const u256& v)
{
    unsigned width = 0;
    u256 x = v;
    while (x != 0)
    {
        x >>= 8;
        ++width;
    }
    return width;
}
}  // namespace gasbound::evm
