// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/decoder.hpp>
#include <gasbound/evm_math.hpp>

#include <memory>
#include <optional>

namespace gasbound::cfg
{
/// Shallow symbolic word: a reduced constant, an opaque fresh value, or a
/// tracked operator application. Deliberately not SMT-backed; it only has
/// to resolve jump targets and storage/memory operand addresses.
class SymWord
{
public:
    enum class Kind
    {
        concrete,
        unknown,
        op,
    };

    SymWord() : kind_(Kind::concrete), value_(0) {}

    static SymWord concrete(u256 value, std::optional<uint32_t> push_origin = {});
    static SymWord fresh();
    /// Applies `op` to operands (0 = stack top), folding when all concrete.
    static SymWord apply(evm::Opcode op, std::vector<SymWord> operands);

    Kind kind() const { return kind_; }
    bool is_concrete() const { return kind_ == Kind::concrete; }
    const u256& value() const { return value_; }
    /// Offset of the PUSH that produced this constant, when it came straight
    /// from one (used to pair internal-call return jumps with their PUSH).
    std::optional<uint32_t> push_origin() const { return push_origin_; }
    uint64_t unknown_id() const { return unknown_id_; }
    evm::Opcode op() const { return op_; }
    const std::vector<SymWord>& operands() const { return *operands_; }

    /// Structural equality (unknowns compare by identity).
    friend bool operator==(const SymWord& a, const SymWord& b);

private:
    Kind kind_;
    u256 value_;
    std::optional<uint32_t> push_origin_;
    uint64_t unknown_id_ = 0;
    evm::Opcode op_ = evm::Opcode::INVALID;
    std::shared_ptr<const std::vector<SymWord>> operands_;
};

/// Symbolic effect of one instruction on a stack (top = back()). Returns
/// false on stack underflow/overflow. Purely the stack discipline: control
/// flow, memory and storage effects are the caller's business.
bool symbolic_step(const evm::Instruction& instr, std::vector<SymWord>& stack);
}  // namespace gasbound::cfg
