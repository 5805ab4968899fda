// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/symbolic.hpp>

#include <atomic>

namespace gasbound::cfg
{
using evm::Opcode;

namespace
{
std::atomic<uint64_t> next_unknown_id{1};

bool is_tracked(Opcode op)
{
    switch (op)
    {
    case Opcode::ADD:
    case Opcode::SUB:
    case Opcode::MUL:
    case Opcode::DIV:
    case Opcode::AND:
    case Opcode::OR:
    case Opcode::XOR:
    case Opcode::NOT:
    case Opcode::ISZERO:
    case Opcode::EQ:
    case Opcode::LT:
    case Opcode::GT:
    case Opcode::SLT:
    case Opcode::SGT:
    case Opcode::EXP:
    case Opcode::SHA3:
        return true;
    default:
        return false;
    }
}
}  // namespace

SymWord SymWord::concrete(u256 value, std::optional<uint32_t> push_origin)
{
    SymWord w;
    w.kind_ = Kind::concrete;
    w.value_ = std::move(value);
    w.push_origin_ = push_origin;
    return w;
}

SymWord SymWord::fresh()
{
    SymWord w;
    w.kind_ = Kind::unknown;
    w.unknown_id_ = next_unknown_id.fetch_add(1, std::memory_order_relaxed);
    return w;
}

SymWord SymWord::apply(Opcode op, std::vector<SymWord> operands)
{
    // SHA3's stack operands are the memory range, not the preimage, so a
    // concrete range still yields an untrackable value.
    const bool foldable = op != Opcode::SHA3 &&
        std::all_of(operands.begin(), operands.end(),
            [](const SymWord& w) { return w.is_concrete(); });
    if (foldable)
    {
        std::vector<u256> values;
        values.reserve(operands.size());
        for (const auto& w : operands)
            values.push_back(w.value());
        if (const auto folded = evm::fold_constant(op, values))
            return concrete(*folded);
    }
    if (!is_tracked(op))
        return fresh();

    SymWord w;
    w.kind_ = Kind::op;
    w.op_ = op;
    w.operands_ = std::make_shared<const std::vector<SymWord>>(std::move(operands));
    return w;
}

bool operator==(const SymWord& a, const SymWord& b)
{
    if (a.kind_ != b.kind_)
        return false;
    switch (a.kind_)
    {
    case SymWord::Kind::concrete:
        return a.value_ == b.value_;
    case SymWord::Kind::unknown:
        return a.unknown_id_ == b.unknown_id_;
    case SymWord::Kind::op:
        return a.op_ == b.op_ && *a.operands_ == *b.operands_;
    }
    return false;
}

bool symbolic_step(const evm::Instruction& instr, std::vector<SymWord>& stack)
{
    const Opcode op = instr.opcode;
    const auto& info = evm::opcode_info(op);
    if (stack.size() < info.min_stack || stack.size() < info.stack_pops)
        return false;

    if (evm::is_push(op))
    {
        stack.push_back(SymWord::concrete(instr.immediate_value(), instr.offset));
        return stack.size() <= 1024;
    }
    if (evm::is_dup(op))
    {
        stack.push_back(stack[stack.size() - evm::opcode_index(op)]);
        return stack.size() <= 1024;
    }
    if (evm::is_swap(op))
    {
        std::swap(stack.back(), stack[stack.size() - 1 - evm::opcode_index(op)]);
        return true;
    }

    std::vector<SymWord> operands;
    operands.reserve(info.stack_pops);
    for (unsigned i = 0; i < info.stack_pops; ++i)
    {
        operands.push_back(std::move(stack.back()));
        stack.pop_back();
    }

    if (info.stack_pushes == 0)
        return true;

    if (op == Opcode::PC)
        stack.push_back(SymWord::concrete(instr.offset));
    else
        stack.push_back(SymWord::apply(op, std::move(operands)));
    return stack.size() <= 1024;
}
}  // namespace gasbound::cfg
