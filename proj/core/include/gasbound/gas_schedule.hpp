// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/bound_expr.hpp>
#include <gasbound/opcodes.hpp>

#include <map>
#include <span>

namespace gasbound::gas
{
/// How a parametric cost term measures its stack operand.
enum class Measure
{
    value,       // the operand itself (e.g. gas forwarded by CALL)
    words,       // ceil(operand / 32), for byte lengths
    byte_width,  // bytes needed to represent the operand; capped at 32
                 // when the operand is unknown (256-bit words)
};

/// Cost template of a parametric ("class 3") instruction:
/// base + sum(coefficient * measure(stack operand)).
struct CostTemplate
{
    int64_t base = 0;
    struct Term
    {
        int64_t coefficient;
        uint8_t operand_index;  // stack position at execution, 0 = top
        Measure measure;
    };
    std::vector<Term> terms;
};

enum class CostClass
{
    constant,     // class 1: fixed gas
    conditional,  // class 2: g1 or g2 depending on a runtime condition
    parametric,   // class 3: depends on stack operand values
};

/// The per-opcode cost function and the memory cost function for the pinned
/// fee schedule. Every opcode belongs to exactly one class; CALL is the
/// parametric one whose template base already carries its conditional
/// worst case (value transfer + new account).
class GasSchedule
{
public:
    /// The embedded default schedule.
    static const GasSchedule& pinned();

    CostClass cost_class(evm::Opcode op) const;
    /// Class-1 constant; throws std::out_of_range for other classes.
    int64_t constant_cost(evm::Opcode op) const;
    /// Class-2 pair (g1, g2); throws std::out_of_range otherwise.
    std::pair<int64_t, int64_t> conditional_costs(evm::Opcode op) const;
    /// Class-3 template; throws std::out_of_range otherwise.
    const CostTemplate& cost_template(evm::Opcode op) const;

    /// Upper bound on the opcode gas of one instruction. `operands` are size
    /// expressions per stack position (0 = top); BoundExpr::unknown() for
    /// positions the caller cannot describe. Unknown operands propagate
    /// unknown, except byte-width terms which fall back to the 32-byte cap.
    BoundExpr opcode_cost_upper(
        evm::Opcode op, std::span<const BoundExpr> operands = {}) const;

    /// Exact gas of one instruction at concrete operand values, evaluated
    /// through the same templates the symbolic path uses. Class-2 opcodes
    /// take the branch cost selected by `first_branch`.
    bigint concrete_cost(evm::Opcode op, std::span<const u256> operands,
        bool first_branch = true) const;

    int64_t memory_word_gas() const { return g_memory_; }

    /// C_mem(a) = G_memory*a + floor(a^2/512) over active words a >= 0.
    bigint mem_cost(const bigint& active_words) const;
    /// C_mem(after) - C_mem(before); requires after >= before >= 0.
    bigint mem_cost_delta(const bigint& before, const bigint& after) const;
    /// C_mem over a symbolic word count.
    BoundExpr mem_cost_expr(const BoundExpr& active_words) const;

    /// Applies "MNEMONIC=gas" lines replacing class-1 constants; throws
    /// std::invalid_argument on unknown mnemonics, non-class-1 opcodes, or
    /// malformed lines. '#' starts a comment.
    void apply_overrides(std::string_view text);

    const std::map<evm::Opcode, int64_t>& constant_costs() const
    {
        return constant_costs_;
    }
    const std::map<evm::Opcode, std::pair<int64_t, int64_t>>& conditional() const
    {
        return conditional_costs_;
    }
    const std::map<evm::Opcode, CostTemplate>& parametric() const
    {
        return parametric_costs_;
    }

    GasSchedule();

private:
    std::map<evm::Opcode, int64_t> constant_costs_;
    std::map<evm::Opcode, std::pair<int64_t, int64_t>> conditional_costs_;
    std::map<evm::Opcode, CostTemplate> parametric_costs_;
    int64_t g_memory_ = 3;
};
}  // namespace gasbound::gas
