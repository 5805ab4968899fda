// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/rbr.hpp>

#include <algorithm>
#include <deque>
#include <sstream>

namespace gasbound::rbr
{
using cfg::BasicBlock;
using cfg::Cfg;
using cfg::TerminatorKind;
using evm::Instruction;
using evm::Opcode;

std::string RbrVar::str() const
{
    switch (kind)
    {
    case Kind::stack:
        return "s" + std::to_string(index);
    case Kind::mem_word:
        return "l" + std::to_string(index);
    case Kind::state:
        return "g" + std::to_string(index);
    case Kind::blockchain:
        return name;
    case Kind::fresh:
        return "fresh" + std::to_string(index);
    }
    return "?";
}

RbrExpr RbrExpr::constant(u256 v)
{
    RbrExpr e;
    e.kind = Kind::constant;
    e.value = std::move(v);
    return e;
}

RbrExpr RbrExpr::variable(RbrVar v)
{
    RbrExpr e;
    e.kind = Kind::var;
    e.var = std::move(v);
    return e;
}

RbrExpr RbrExpr::binary(Kind kind, RbrExpr a, RbrExpr b)
{
    RbrExpr e;
    e.kind = kind;
    e.children.push_back(std::move(a));
    e.children.push_back(std::move(b));
    return e;
}

RbrExpr RbrExpr::opaque(Opcode op, std::vector<RbrExpr> operands)
{
    RbrExpr e;
    e.kind = Kind::opaque;
    e.op = op;
    e.children = std::move(operands);
    return e;
}

std::string RbrExpr::str() const
{
    switch (kind)
    {
    case Kind::constant:
        return value.str();
    case Kind::var:
        return var.str();
    case Kind::add:
        return children[0].str() + "+" + children[1].str();
    case Kind::sub:
        return children[0].str() + "-" + children[1].str();
    case Kind::mul:
        return children[0].str() + "*" + children[1].str();
    case Kind::div:
        return children[0].str() + "/" + children[1].str();
    case Kind::opaque:
    {
        std::string name(evm::mnemonic(op));
        std::transform(name.begin(), name.end(), name.begin(),
            [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        std::string out = name + "(";
        for (size_t i = 0; i < children.size(); ++i)
        {
            if (i > 0)
                out += ", ";
            out += children[i].str();
        }
        return out + ")";
    }
    }
    return "?";
}

void RbrExpr::collect_vars(std::set<RbrVar>& out) const
{
    if (kind == Kind::var)
        out.insert(var);
    for (const auto& c : children)
        c.collect_vars(out);
}

RbrStatement RbrStatement::assign(RbrVar target, RbrExpr value, uint32_t seq)
{
    RbrStatement s;
    s.kind = Kind::assign;
    s.instr_seq = seq;
    s.target = std::move(target);
    s.value = std::move(value);
    return s;
}

RbrStatement RbrStatement::nop(Opcode op, uint32_t seq)
{
    RbrStatement s;
    s.kind = Kind::nop;
    s.instr_seq = seq;
    s.nop_op = op;
    return s;
}

RbrStatement RbrStatement::unknown_store(uint32_t seq)
{
    RbrStatement s;
    s.kind = Kind::unknown_store;
    s.instr_seq = seq;
    return s;
}

std::string RbrGuard::str() const
{
    return lhs.str() + " " + std::string(rel_str(rel)) + " " + rhs.str();
}

std::set<RbrVar> Rule::used_vars() const
{
    std::set<RbrVar> vars;
    std::set<RbrVar> all;
    for (const auto& stmt : body)
    {
        if (stmt.kind == RbrStatement::Kind::assign)
        {
            all.insert(stmt.target);
            stmt.value.collect_vars(all);
        }
    }
    for (const auto& cont : continuations)
    {
        if (cont.guard.has_value())
        {
            cont.guard->lhs.collect_vars(all);
            cont.guard->rhs.collect_vars(all);
        }
    }
    for (const auto& v : all)
        if (v.kind != RbrVar::Kind::stack && v.kind != RbrVar::Kind::fresh)
            vars.insert(v);
    return vars;
}

const Rule* RbrProgram::find(const std::string& name) const
{
    const auto it = rules.find(name);
    return it == rules.end() ? nullptr : &it->second;
}

std::set<std::string> RbrProgram::reachable_rules(uint32_t entry_block) const
{
    std::set<std::string> seen;
    std::deque<std::string> queue{block_rule_name(entry_block)};
    while (!queue.empty())
    {
        const std::string name = queue.front();
        queue.pop_front();
        const Rule* rule = find(name);
        if (rule == nullptr || !seen.insert(name).second)
            continue;
        for (const auto& cont : rule->continuations)
            queue.push_back(cont.callee);
    }
    return seen;
}

std::string block_rule_name(uint32_t block_id)
{
    return "block" + std::to_string(block_id);
}

std::string jump_rule_name(uint32_t block_id)
{
    return "jump" + std::to_string(block_id);
}

// ---------------------------------------------------------------------------
// translate
// ---------------------------------------------------------------------------

namespace
{
struct BlockTranslator
{
    const Cfg& cfg;
    RbrProgram& program;
    const BasicBlock& block;
    Rule rule;
    uint32_t height;
    uint32_t seq = 0;
    // Tracks slots currently holding a constant or a plain variable copy;
    // enough to resolve CALLDATALOAD offsets and BALANCE-of-self.
    std::map<uint32_t, RbrExpr> simple;
    bool failed = false;

    BlockTranslator(const Cfg& c, RbrProgram& p, const BasicBlock& b)
        : cfg(c), program(p), block(b), height(b.entry_height.value_or(0))
    {
        rule.name = block_rule_name(b.id);
        rule.block_id = b.id;
        rule.stack_params = height;
    }

    RbrVar fresh() { return RbrVar::fresh(program.next_fresh++); }

    RbrExpr stack_var(uint32_t i) { return RbrExpr::variable(RbrVar::stack(i)); }

    void set_simple(uint32_t slot, std::optional<RbrExpr> value)
    {
        simple.erase(slot);
        if (value.has_value())
            simple.emplace(slot, std::move(*value));
    }

    void assign(RbrVar target, RbrExpr value)
    {
        if (target.kind == RbrVar::Kind::stack)
        {
            if (value.kind == RbrExpr::Kind::constant ||
                (value.kind == RbrExpr::Kind::var &&
                    value.var.kind != RbrVar::Kind::stack))
                set_simple(target.index, value);
            else if (value.kind == RbrExpr::Kind::var)
            {
                const auto it = simple.find(value.var.index);
                set_simple(target.index,
                    it == simple.end() ? std::optional<RbrExpr>{} : it->second);
            }
            else
                set_simple(target.index, std::nullopt);
        }
        rule.body.push_back(RbrStatement::assign(std::move(target), std::move(value), seq));
    }

    void assign_fresh(RbrVar target) { assign(std::move(target), RbrExpr::variable(fresh())); }

    RbrStatement& nop(const Instruction& instr)
    {
        rule.body.push_back(RbrStatement::nop(instr.opcode, seq));
        return rule.body.back();
    }

    std::optional<u256> const_at(uint32_t slot) const
    {
        const auto it = simple.find(slot);
        if (it != simple.end() && it->second.kind == RbrExpr::Kind::constant)
            return it->second.value;
        return std::nullopt;
    }

    bool is_self_address(uint32_t slot) const
    {
        const auto it = simple.find(slot);
        return it != simple.end() && it->second.kind == RbrExpr::Kind::var &&
               it->second.var.kind == RbrVar::Kind::blockchain &&
               it->second.var.name == "address";
    }

    std::optional<u256> storage_slot(const Instruction& instr) const
    {
        const auto it = cfg.storage_annotations.find(instr.offset);
        return it == cfg.storage_annotations.end() ? std::nullopt : it->second;
    }

    const std::vector<cfg::MemAccess>* mem_annotation(const Instruction& instr) const
    {
        const auto it = cfg.memory_annotations.find(instr.offset);
        return it == cfg.memory_annotations.end() ? nullptr : &it->second;
    }

    /// Overwrites every tracked word covered by a concrete store region with
    /// fresh values; emits unknown_store when the region is not concrete or
    /// is unreasonably wide.
    void clobber_region(const cfg::MemAccess* access)
    {
        if (access == nullptr || !access->start || !access->length)
        {
            rule.body.push_back(RbrStatement::unknown_store(seq));
            return;
        }
        if (*access->length == 0)
            return;
        const u256 first = *access->start >> 5;
        const u256 last = (*access->start + *access->length - 1) >> 5;
        if (last - first >= 256)
        {
            rule.body.push_back(RbrStatement::unknown_store(seq));
            return;
        }
        for (u256 w = first; w <= last; ++w)
            assign_fresh(RbrVar::mem_word(static_cast<uint32_t>(w)));
    }

    void push_value(RbrExpr value)
    {
        assign(RbrVar::stack(height), std::move(value));
        ++height;
    }

    /// Emits the statements of one instruction. Returns false on underflow.
    bool emit(const Instruction& instr)
    {
        const Opcode op = instr.opcode;
        const auto& info = evm::opcode_info(op);
        if (height < std::max<uint32_t>(info.stack_pops, info.min_stack))
            return false;
        const uint32_t top = height - 1;

        if (evm::is_push(op))
        {
            push_value(RbrExpr::constant(instr.immediate_value()));
            nop(instr);
            return true;
        }
        if (evm::is_dup(op))
        {
            const uint32_t src = height - evm::opcode_index(op);
            push_value(stack_var(src));
            nop(instr);
            return true;
        }
        if (evm::is_swap(op))
        {
            const uint32_t other = top - evm::opcode_index(op);
            assign(RbrVar::stack(height), stack_var(other));
            assign(RbrVar::stack(other), stack_var(top));
            assign(RbrVar::stack(top), stack_var(height));
            nop(instr);
            return true;
        }

        switch (op)
        {
        case Opcode::ADD:
        case Opcode::SUB:
        case Opcode::MUL:
        case Opcode::DIV:
        {
            const auto kind = op == Opcode::ADD ? RbrExpr::Kind::add :
                op == Opcode::SUB              ? RbrExpr::Kind::sub :
                op == Opcode::MUL              ? RbrExpr::Kind::mul :
                                                 RbrExpr::Kind::div;
            assign(RbrVar::stack(top - 1),
                RbrExpr::binary(kind, stack_var(top), stack_var(top - 1)));
            --height;
            nop(instr);
            return true;
        }
        case Opcode::SDIV:
        case Opcode::MOD:
        case Opcode::SMOD:
        case Opcode::SIGNEXTEND:
        case Opcode::LT:
        case Opcode::GT:
        case Opcode::SLT:
        case Opcode::SGT:
        case Opcode::EQ:
        case Opcode::AND:
        case Opcode::OR:
        case Opcode::XOR:
        case Opcode::BYTE:
            assign(RbrVar::stack(top - 1),
                RbrExpr::opaque(op, {stack_var(top), stack_var(top - 1)}));
            --height;
            nop(instr);
            return true;
        case Opcode::ADDMOD:
        case Opcode::MULMOD:
            assign(RbrVar::stack(top - 2), RbrExpr::opaque(op,
                {stack_var(top), stack_var(top - 1), stack_var(top - 2)}));
            height -= 2;
            nop(instr);
            return true;
        case Opcode::EXP:
        {
            const RbrExpr exponent = stack_var(top - 1);
            assign(RbrVar::stack(top - 1),
                RbrExpr::opaque(op, {stack_var(top), stack_var(top - 1)}));
            --height;
            nop(instr).cost_operand = exponent;
            return true;
        }
        case Opcode::ISZERO:
            assign(RbrVar::stack(top),
                RbrExpr::opaque(Opcode::EQ, {stack_var(top), RbrExpr::constant(0)}));
            nop(instr);
            return true;
        case Opcode::NOT:
            assign(RbrVar::stack(top), RbrExpr::opaque(op, {stack_var(top)}));
            nop(instr);
            return true;
        case Opcode::SHA3:
        {
            auto& n = nop(instr);
            n.cost_operand = stack_var(top - 1);
            n.regions.push_back({stack_var(top), stack_var(top - 1), false});
            // The region exprs must be evaluated before this assignment; the
            // shared instr_seq takes care of that downstream.
            assign(RbrVar::stack(top - 1),
                RbrExpr::opaque(op, {stack_var(top), stack_var(top - 1)}));
            --height;
            // move the nop after the assignment to keep the paper's order
            std::swap(rule.body[rule.body.size() - 2], rule.body.back());
            return true;
        }
        case Opcode::ADDRESS:
        case Opcode::ORIGIN:
        case Opcode::CALLER:
        case Opcode::CALLVALUE:
        case Opcode::CALLDATASIZE:
        case Opcode::GASPRICE:
        case Opcode::COINBASE:
        case Opcode::TIMESTAMP:
        case Opcode::NUMBER:
        case Opcode::DIFFICULTY:
        case Opcode::GASLIMIT:
        {
            std::string name(evm::mnemonic(op));
            std::transform(name.begin(), name.end(), name.begin(),
                [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            push_value(RbrExpr::variable(RbrVar::blockchain(name)));
            nop(instr);
            return true;
        }
        case Opcode::BALANCE:
            if (is_self_address(top))
                assign(RbrVar::stack(top),
                    RbrExpr::variable(RbrVar::blockchain("balance")));
            else
                assign_fresh(RbrVar::stack(top));
            nop(instr);
            return true;
        case Opcode::CALLDATALOAD:
        {
            const auto offset = const_at(top);
            if (offset.has_value() && *offset < 1 << 16)
                assign(RbrVar::stack(top), RbrExpr::variable(RbrVar::blockchain(
                                               "in" + offset->str())));
            else
                assign_fresh(RbrVar::stack(top));
            nop(instr);
            return true;
        }
        case Opcode::CODESIZE:
            push_value(RbrExpr::constant(cfg.program.code_size));
            nop(instr);
            return true;
        case Opcode::PC:
            push_value(RbrExpr::constant(instr.offset));
            nop(instr);
            return true;
        case Opcode::MSIZE:
        case Opcode::GAS:
        case Opcode::RETURNDATASIZE:
        {
            assign(RbrVar::stack(height), RbrExpr::variable(fresh()));
            ++height;
            nop(instr);
            return true;
        }
        case Opcode::EXTCODESIZE:
        case Opcode::BLOCKHASH:
            assign_fresh(RbrVar::stack(top));
            nop(instr);
            return true;
        case Opcode::POP:
            --height;
            nop(instr);
            return true;
        case Opcode::JUMPDEST:
        case Opcode::STOP:
        case Opcode::INVALID:
            nop(instr);
            return true;
        case Opcode::MLOAD:
        {
            const auto* accesses = mem_annotation(instr);
            auto& n = nop(instr);
            n.regions.push_back({stack_var(top), RbrExpr::constant(32), false});
            const auto addr = accesses != nullptr && !accesses->empty() ?
                                  (*accesses)[0].start :
                                  std::nullopt;
            if (addr.has_value() && (*addr & 31) == 0)
                assign(RbrVar::stack(top), RbrExpr::variable(RbrVar::mem_word(
                                               static_cast<uint32_t>(*addr >> 5))));
            else
                assign_fresh(RbrVar::stack(top));
            std::swap(rule.body[rule.body.size() - 2], rule.body.back());
            return true;
        }
        case Opcode::MSTORE:
        case Opcode::MSTORE8:
        {
            const auto* accesses = mem_annotation(instr);
            const auto addr = accesses != nullptr && !accesses->empty() ?
                                  (*accesses)[0].start :
                                  std::nullopt;
            if (op == Opcode::MSTORE && addr.has_value() && (*addr & 31) == 0)
                assign(RbrVar::mem_word(static_cast<uint32_t>(*addr >> 5)),
                    stack_var(top - 1));
            else if (op == Opcode::MSTORE8 && addr.has_value())
                assign_fresh(RbrVar::mem_word(static_cast<uint32_t>(*addr >> 5)));
            else if (addr.has_value())
            {
                // concrete but unaligned: the write straddles two words
                assign_fresh(RbrVar::mem_word(static_cast<uint32_t>(*addr >> 5)));
                assign_fresh(RbrVar::mem_word(static_cast<uint32_t>(*addr >> 5) + 1));
            }
            else
                rule.body.push_back(RbrStatement::unknown_store(seq));
            height -= 2;
            auto& n = nop(instr);
            n.regions.push_back({stack_var(height + 1),
                RbrExpr::constant(op == Opcode::MSTORE ? 32 : 1), true});
            return true;
        }
        case Opcode::SLOAD:
        {
            const auto slot = storage_slot(instr);
            if (slot.has_value() && *slot < 1 << 24)
                assign(RbrVar::stack(top), RbrExpr::variable(RbrVar::state(
                                               static_cast<uint32_t>(*slot))));
            else
                assign_fresh(RbrVar::stack(top));
            nop(instr);
            return true;
        }
        case Opcode::SSTORE:
        {
            const auto slot = storage_slot(instr);
            if (slot.has_value() && *slot < 1 << 24)
                assign(RbrVar::state(static_cast<uint32_t>(*slot)), stack_var(top - 1));
            height -= 2;
            nop(instr);
            return true;
        }
        case Opcode::CALLDATACOPY:
        case Opcode::CODECOPY:
        case Opcode::RETURNDATACOPY:
        {
            const auto* accesses = mem_annotation(instr);
            auto& n = nop(instr);
            n.cost_operand = stack_var(top - 2);
            n.regions.push_back({stack_var(top), stack_var(top - 2), true});
            clobber_region(
                accesses != nullptr && !accesses->empty() ? &(*accesses)[0] : nullptr);
            height -= 3;
            return true;
        }
        case Opcode::EXTCODECOPY:
        {
            const auto* accesses = mem_annotation(instr);
            auto& n = nop(instr);
            n.cost_operand = stack_var(top - 3);
            n.regions.push_back({stack_var(top - 1), stack_var(top - 3), true});
            clobber_region(
                accesses != nullptr && !accesses->empty() ? &(*accesses)[0] : nullptr);
            height -= 4;
            return true;
        }
        case Opcode::LOG0:
        case Opcode::LOG1:
        case Opcode::LOG2:
        case Opcode::LOG3:
        case Opcode::LOG4:
        {
            auto& n = nop(instr);
            n.cost_operand = stack_var(top - 1);
            n.regions.push_back({stack_var(top), stack_var(top - 1), false});
            height -= 2 + evm::opcode_index(op);
            return true;
        }
        case Opcode::CREATE:
        {
            auto& n = nop(instr);
            n.regions.push_back({stack_var(top - 1), stack_var(top - 2), false});
            assign_fresh(RbrVar::stack(top - 2));
            height -= 2;
            std::swap(rule.body[rule.body.size() - 2], rule.body.back());
            return true;
        }
        case Opcode::CALL:
        case Opcode::CALLCODE:
        {
            const auto* accesses = mem_annotation(instr);
            auto& n = nop(instr);
            n.cost_operand = stack_var(top);  // gas forwarded
            n.regions.push_back({stack_var(top - 3), stack_var(top - 4), false});
            n.regions.push_back({stack_var(top - 5), stack_var(top - 6), true});
            clobber_region(
                accesses != nullptr && accesses->size() > 1 ? &(*accesses)[1] : nullptr);
            assign_fresh(RbrVar::stack(top - 6));
            height -= 6;
            return true;
        }
        case Opcode::DELEGATECALL:
        case Opcode::STATICCALL:
        {
            const auto* accesses = mem_annotation(instr);
            auto& n = nop(instr);
            n.regions.push_back({stack_var(top - 2), stack_var(top - 3), false});
            n.regions.push_back({stack_var(top - 4), stack_var(top - 5), true});
            clobber_region(
                accesses != nullptr && accesses->size() > 1 ? &(*accesses)[1] : nullptr);
            assign_fresh(RbrVar::stack(top - 5));
            height -= 5;
            return true;
        }
        case Opcode::RETURN:
        case Opcode::REVERT:
        {
            auto& n = nop(instr);
            n.regions.push_back({stack_var(top), stack_var(top - 1), false});
            height -= 2;
            return true;
        }
        case Opcode::SELFDESTRUCT:
            --height;
            nop(instr);
            return true;
        case Opcode::JUMP:
            --height;
            nop(instr);
            return true;
        case Opcode::JUMPI:
            height -= 2;
            nop(instr);
            return true;
        default:
            return false;
        }
    }
};

struct BaseCondition
{
    // Comparison base: op in {LT, GT, SLT, SGT, EQ}; otherwise a truthiness
    // test of `expr`.
    std::optional<Opcode> cmp;
    RbrExpr lhs;  // cmp: both sides; truthy: lhs only
    RbrExpr rhs;
    bool negated = false;
};

std::optional<RbrGuard> truth_guard(const BaseCondition& base)
{
    if (base.cmp.has_value())
    {
        switch (*base.cmp)
        {
        case Opcode::LT:
        case Opcode::SLT:
            return RbrGuard{base.lhs, Rel::lt, base.rhs};
        case Opcode::GT:
        case Opcode::SGT:
            return RbrGuard{base.lhs, Rel::gt, base.rhs};
        case Opcode::EQ:
            return RbrGuard{base.lhs, Rel::eq, base.rhs};
        default:
            return std::nullopt;
        }
    }
    return RbrGuard{base.lhs, Rel::gt, RbrExpr::constant(0)};
}

std::optional<RbrGuard> false_guard(const BaseCondition& base)
{
    if (base.cmp.has_value())
    {
        switch (*base.cmp)
        {
        case Opcode::LT:
        case Opcode::SLT:
            return RbrGuard{base.lhs, Rel::ge, base.rhs};
        case Opcode::GT:
        case Opcode::SGT:
            return RbrGuard{base.lhs, Rel::le, base.rhs};
        case Opcode::EQ:
            return std::nullopt;  // a != b is not a single linear constraint
        default:
            return std::nullopt;
        }
    }
    return RbrGuard{base.lhs, Rel::eq, RbrExpr::constant(0)};
}

bool is_comparison(Opcode op)
{
    return op == Opcode::LT || op == Opcode::GT || op == Opcode::SLT ||
           op == Opcode::SGT || op == Opcode::EQ;
}

/// Chases the defining expression of a stack slot backwards through the
/// rule body, unwrapping ISZERO (eq(x,0)) layers. Gives up unless the
/// definition's operands survive unmodified to the end of the body.
std::optional<BaseCondition> chase_condition(
    const std::vector<RbrStatement>& body, uint32_t slot)
{
    bool negated = false;
    RbrExpr current = RbrExpr::variable(RbrVar::stack(slot));
    for (int depth = 0; depth < 8; ++depth)
    {
        if (current.kind == RbrExpr::Kind::var)
        {
            if (current.var.kind != RbrVar::Kind::stack)
                return BaseCondition{std::nullopt, current, {}, negated};
            // find the last assignment to this slot
            long def = -1;
            for (long i = static_cast<long>(body.size()) - 1; i >= 0; --i)
            {
                if (body[i].kind == RbrStatement::Kind::assign &&
                    body[i].target == current.var)
                {
                    def = i;
                    break;
                }
            }
            if (def < 0)
                return BaseCondition{std::nullopt, current, {}, negated};
            // operands of the definition must not be reassigned afterwards
            std::set<RbrVar> used;
            body[def].value.collect_vars(used);
            for (size_t i = static_cast<size_t>(def) + 1; i < body.size(); ++i)
                if (body[i].kind == RbrStatement::Kind::assign &&
                    used.contains(body[i].target))
                    return BaseCondition{std::nullopt, current, {}, negated};
            current = body[def].value;
            continue;
        }
        if (current.kind == RbrExpr::Kind::opaque && current.op == Opcode::EQ &&
            current.children.size() == 2 &&
            current.children[1].kind == RbrExpr::Kind::constant &&
            current.children[1].value == 0)
        {
            negated = !negated;
            current = current.children[0];
            continue;
        }
        if (current.kind == RbrExpr::Kind::opaque && is_comparison(current.op) &&
            current.children.size() == 2)
            return BaseCondition{
                current.op, current.children[0], current.children[1], negated};
        return BaseCondition{std::nullopt, current, {}, negated};
    }
    return std::nullopt;
}
}  // namespace

RbrProgram translate(const Cfg& cfg)
{
    RbrProgram program;
    program.entry_blocks.insert(cfg.entry);
    const auto& instrs = cfg.program.instructions;

    std::set<RbrVar> universe;  // non-stack variables seen anywhere

    for (const auto& [id, block] : cfg.blocks)
    {
        if (!block.entry_height.has_value())
            continue;  // never reached under the symbolic stack discipline
        if (block.height_conflict)
        {
            program.broken_blocks.insert(id);
            program.diagnostics.push_back(
                "stack height mismatch entering block " + std::to_string(id));
            continue;
        }

        BlockTranslator tr(cfg, program, block);

        // Conditional blocks ending [CMP] ISZERO* PUSH JUMPI keep the
        // comparison un-materialized so the guard can read its operands.
        uint32_t pattern_begin = block.end_instr;
        std::optional<Opcode> pattern_cmp;
        uint32_t pattern_iszeros = 0;
        if (block.terminator == TerminatorKind::jumpi && block.end_instr > block.first_instr)
        {
            uint32_t i = block.end_instr - 1;  // JUMPI
            if (i > block.first_instr && evm::is_push(instrs[i - 1].opcode))
            {
                uint32_t j = i - 1;  // PUSH
                pattern_begin = j;
                while (j > block.first_instr && instrs[j - 1].opcode == Opcode::ISZERO)
                {
                    --j;
                    ++pattern_iszeros;
                    pattern_begin = j;
                }
                if (j > block.first_instr && is_comparison(instrs[j - 1].opcode))
                {
                    pattern_cmp = instrs[j - 1].opcode;
                    pattern_begin = j - 1;
                }
            }
        }

        bool ok = true;
        for (uint32_t i = block.first_instr; i < block.end_instr && ok; ++i)
        {
            if (block.terminator == TerminatorKind::jumpi && i >= pattern_begin)
                break;
            ok = tr.emit(instrs[i]);
            ++tr.seq;
        }
        if (!ok)
        {
            program.broken_blocks.insert(id);
            program.diagnostics.push_back(
                "stack underflow translating block " + std::to_string(id));
            continue;
        }

        // Successor bookkeeping shared by all terminators.
        const auto fall_id = [&]() -> std::optional<uint32_t> {
            if (block.end_instr < instrs.size())
                return instrs[block.end_instr].offset;
            return std::nullopt;
        }();

        switch (block.terminator)
        {
        case TerminatorKind::halt:
            tr.rule.continuation_height = tr.height;
            break;
        case TerminatorKind::fallthrough:
            tr.rule.continuation_height = tr.height;
            for (const uint32_t succ : block.successors)
                tr.rule.continuations.push_back({block_rule_name(succ), {}});
            break;
        case TerminatorKind::jump:
            tr.rule.continuation_height = tr.height - 1;
            for (const uint32_t succ : block.successors)
                tr.rule.continuations.push_back({block_rule_name(succ), {}});
            break;
        case TerminatorKind::jumpi:
        {
            uint32_t pre_height = tr.height;
            std::optional<BaseCondition> base;
            uint32_t consumed = 2;  // stack slots the tail consumes overall

            if (pattern_begin < block.end_instr)
            {
                // Tail pattern: guard reads the un-materialized operands.
                if (pattern_cmp.has_value())
                {
                    base = BaseCondition{*pattern_cmp,
                        RbrExpr::variable(RbrVar::stack(pre_height - 1)),
                        RbrExpr::variable(RbrVar::stack(pre_height - 2)),
                        pattern_iszeros % 2 != 0};
                    consumed = 2;
                }
                else
                {
                    auto chased = chase_condition(tr.rule.body, pre_height - 1);
                    if (chased.has_value())
                    {
                        chased->negated ^= pattern_iszeros % 2 != 0;
                        base = chased;
                    }
                    consumed = 1;
                }
                // The tail instructions surface as trailing nops only.
                for (uint32_t i = pattern_begin; i < block.end_instr; ++i)
                {
                    tr.rule.body.push_back(RbrStatement::nop(instrs[i].opcode, tr.seq));
                    ++tr.seq;
                }
            }
            else
            {
                // Generic JUMPI: everything materialized; the condition slot
                // sits just above the surviving stack.
                base = chase_condition(tr.rule.body, tr.height);
                pre_height = tr.height;
                consumed = 0;
            }

            if (pre_height < consumed)
            {
                program.broken_blocks.insert(id);
                program.diagnostics.push_back(
                    "stack underflow translating block " + std::to_string(id));
                program.rules.erase(tr.rule.name);
                continue;
            }
            const uint32_t next_height = pre_height - consumed;

            Rule jump;
            jump.name = jump_rule_name(id);
            jump.block_id = id;
            jump.is_jump_rule = true;
            jump.stack_params = pre_height;
            jump.continuation_height = next_height;

            std::optional<uint32_t> taken;
            for (const uint32_t succ : block.successors)
            {
                if (fall_id.has_value() && succ == *fall_id)
                    continue;
                taken = succ;
            }
            const auto valid_guard = [&](std::optional<RbrGuard> g) -> std::optional<RbrGuard> {
                if (!g.has_value())
                    return g;
                // Guards may only mention surviving stack slots.
                std::set<RbrVar> vars;
                g->lhs.collect_vars(vars);
                g->rhs.collect_vars(vars);
                for (const auto& v : vars)
                    if (v.kind == RbrVar::Kind::stack && v.index >= jump.stack_params)
                        return std::nullopt;
                return g;
            };
            std::optional<RbrGuard> taken_guard;
            std::optional<RbrGuard> fall_guard;
            if (base.has_value())
            {
                taken_guard = valid_guard(
                    base->negated ? false_guard(*base) : truth_guard(*base));
                fall_guard = valid_guard(
                    base->negated ? truth_guard(*base) : false_guard(*base));
            }
            if (taken.has_value())
                jump.continuations.push_back({block_rule_name(*taken), taken_guard});
            if (fall_id.has_value() &&
                std::find(block.successors.begin(), block.successors.end(), *fall_id) !=
                    block.successors.end())
                jump.continuations.push_back({block_rule_name(*fall_id), fall_guard});

            tr.rule.continuations.push_back({jump.name, {}});
            tr.rule.continuation_height = pre_height;
            program.rules.emplace(jump.name, std::move(jump));
            break;
        }
        }

        for (const auto& v : tr.rule.used_vars())
            universe.insert(v);
        program.rules.emplace(tr.rule.name, std::move(tr.rule));
    }

    // Jump-rule guards contribute to the variable universe too.
    for (const auto& [name, rule] : program.rules)
        for (const auto& v : rule.used_vars())
            universe.insert(v);

    // Before slimming, every rule carries the whole non-stack universe.
    for (auto& [name, rule] : program.rules)
    {
        rule.params.clear();
        for (uint32_t i = rule.stack_params; i > 0; --i)
            rule.params.push_back(RbrVar::stack(i - 1));
        for (const auto& v : universe)
            rule.params.push_back(v);
    }
    return program;
}

// ---------------------------------------------------------------------------
// extension 1: call-site cloning
// ---------------------------------------------------------------------------

namespace
{
std::set<std::string> forward_region(const RbrProgram& rbr, const std::string& from,
    const std::string& stop)
{
    // Rules reachable from `from` without traversing `stop`'s continuations.
    std::set<std::string> seen;
    std::deque<std::string> queue{from};
    while (!queue.empty())
    {
        const std::string name = queue.front();
        queue.pop_front();
        const Rule* rule = rbr.find(name);
        if (rule == nullptr || !seen.insert(name).second)
            continue;
        if (name == stop)
            continue;
        for (const auto& cont : rule->continuations)
            queue.push_back(cont.callee);
    }
    return seen;
}

std::set<std::string> union_reachable(const RbrProgram& rbr)
{
    std::set<std::string> reach;
    for (const uint32_t entry : rbr.entry_blocks)
        reach.merge(rbr.reachable_rules(entry));
    return reach;
}
}  // namespace

void clone_internal_calls(RbrProgram& rbr, const Cfg& cfg)
{
    const auto& instrs = cfg.program.instructions;

    for (int round = 0; round < 64; ++round)
    {
        const auto reach = union_reachable(rbr);

        // Multi-target unconditional jumps are the return jumps of shared
        // internal functions.
        std::vector<std::string> candidates;
        for (const auto& name : reach)
        {
            const Rule& rule = rbr.rules.at(name);
            if (!rule.is_jump_rule && rule.continuations.size() > 1 &&
                !rbr.unlinked_rules.contains(name))
                candidates.push_back(name);
        }
        if (candidates.empty())
            break;

        bool progress = false;
        for (const auto& name : candidates)
        {
            const Rule& ret_rule = rbr.rules.at(name);
            const auto block_it = cfg.blocks.find(ret_rule.block_id);
            if (block_it == cfg.blocks.end() || block_it->second.empty())
            {
                rbr.unlinked_rules.insert(name);
                continue;
            }
            const uint32_t jump_offset =
                instrs[block_it->second.end_instr - 1].offset;
            const auto targets_it = cfg.jump_targets.find(jump_offset);
            if (targets_it == cfg.jump_targets.end())
            {
                rbr.unlinked_rules.insert(name);
                continue;
            }

            struct Site
            {
                uint32_t return_block;
                std::string call_rule;
                std::string entry_rule;
                std::set<std::string> region;
            };
            std::vector<Site> sites;
            bool ok = true;
            for (const auto& [target, provenance] : targets_it->second)
            {
                if (!provenance.has_value())
                {
                    ok = false;
                    break;
                }
                const uint32_t call_block = cfg.block_of_offset(*provenance).id;
                const std::string call_rule = block_rule_name(call_block);
                const Rule* caller = rbr.find(call_rule);
                if (caller == nullptr || caller->continuations.size() != 1 ||
                    call_rule == name)
                {
                    ok = false;
                    break;
                }
                const std::string entry_rule = caller->continuations[0].callee;
                auto fwd = forward_region(rbr, entry_rule, name);
                if (!fwd.contains(name) || fwd.contains(call_rule))
                {
                    ok = false;
                    break;
                }
                // Keep only rules that can still reach the return jump.
                std::set<std::string> region;
                for (const auto& r : fwd)
                    if (r == name || forward_region(rbr, r, name).contains(name))
                        region.insert(r);
                // A region nesting another unresolved return jump is handled
                // in a later round, innermost first.
                for (const auto& r : region)
                {
                    const Rule& rr = rbr.rules.at(r);
                    if (r != name && !rr.is_jump_rule && rr.continuations.size() > 1)
                    {
                        ok = false;
                        break;
                    }
                }
                if (!ok)
                    break;
                sites.push_back({target, call_rule, entry_rule, std::move(region)});
            }
            if (!ok || sites.empty())
                continue;  // try another candidate this round

            for (const auto& site : sites)
            {
                const uint32_t clone_id = ++rbr.next_clone;
                std::map<std::string, std::string> rename;
                for (const auto& r : site.region)
                    rename[r] = r + "_c" + std::to_string(clone_id);
                for (const auto& r : site.region)
                {
                    Rule clone = rbr.rules.at(r);
                    clone.name = rename.at(r);
                    if (r == name)
                        clone.continuations = {
                            {block_rule_name(site.return_block), {}}};
                    else
                        for (auto& cont : clone.continuations)
                        {
                            const auto it = rename.find(cont.callee);
                            if (it != rename.end())
                                cont.callee = it->second;
                        }
                    rbr.rules.emplace(clone.name, std::move(clone));
                }
                rbr.rules.at(site.call_rule).continuations[0].callee =
                    rename.at(site.entry_rule);
            }
            progress = true;
            break;  // recompute reachability before the next region
        }
        if (!progress)
        {
            for (const auto& name : candidates)
                if (!rbr.unlinked_rules.contains(name))
                    rbr.unlinked_rules.insert(name);
            break;
        }
    }

    // Anything no entry can reach any more was fully cloned away.
    const auto reach = union_reachable(rbr);
    std::erase_if(rbr.rules,
        [&](const auto& kv) { return !reach.contains(kv.first); });
}

// ---------------------------------------------------------------------------
// extension 3: forgetting unknown memory
// ---------------------------------------------------------------------------

void forget_unknown_memory(RbrProgram& rbr)
{
    std::set<uint32_t> words;
    for (const auto& [name, rule] : rbr.rules)
    {
        for (const auto& v : rule.params)
            if (v.kind == RbrVar::Kind::mem_word)
                words.insert(v.index);
        for (const auto& stmt : rule.body)
        {
            if (stmt.kind != RbrStatement::Kind::assign)
                continue;
            std::set<RbrVar> vars;
            vars.insert(stmt.target);
            stmt.value.collect_vars(vars);
            for (const auto& v : vars)
                if (v.kind == RbrVar::Kind::mem_word)
                    words.insert(v.index);
        }
    }
    if (words.empty())
    {
        for (auto& [name, rule] : rbr.rules)
            std::erase_if(rule.body, [](const RbrStatement& s) {
                return s.kind == RbrStatement::Kind::unknown_store;
            });
        return;
    }

    for (auto& [name, rule] : rbr.rules)
    {
        std::vector<RbrStatement> body;
        body.reserve(rule.body.size());
        for (size_t i = 0; i < rule.body.size(); ++i)
        {
            const RbrStatement& stmt = rule.body[i];
            if (stmt.kind != RbrStatement::Kind::unknown_store)
            {
                body.push_back(stmt);
                continue;
            }
            const uint32_t seq = stmt.instr_seq;
            // Copy the rest of this instruction (its nop), then havoc every
            // tracked memory word.
            size_t j = i + 1;
            for (; j < rule.body.size() && rule.body[j].instr_seq == seq; ++j)
                body.push_back(rule.body[j]);
            for (const uint32_t w : words)
                body.push_back(RbrStatement::assign(RbrVar::mem_word(w),
                    RbrExpr::variable(RbrVar::fresh(rbr.next_fresh++)), seq));
            i = j - 1;
        }
        rule.body = std::move(body);
    }
}

// ---------------------------------------------------------------------------
// string/bytes length-pattern rewrite
// ---------------------------------------------------------------------------

namespace
{
struct PatternStep
{
    Opcode nop_op;
    int assigns;  // number of assign statements before the nop
};

bool is_const_assign(const RbrStatement& s, uint32_t slot, const u256& value)
{
    return s.kind == RbrStatement::Kind::assign &&
           s.target == RbrVar::stack(slot) &&
           s.value.kind == RbrExpr::Kind::constant && s.value.value == value;
}

bool is_var_assign(const RbrStatement& s, uint32_t slot, uint32_t src)
{
    return s.kind == RbrStatement::Kind::assign &&
           s.target == RbrVar::stack(slot) && s.value.kind == RbrExpr::Kind::var &&
           s.value.var == RbrVar::stack(src);
}

bool is_nop(const RbrStatement& s, Opcode op)
{
    return s.kind == RbrStatement::Kind::nop && s.nop_op == op;
}

bool is_binary_assign(const RbrStatement& s, uint32_t slot, RbrExpr::Kind kind,
    uint32_t a, uint32_t b)
{
    return s.kind == RbrStatement::Kind::assign &&
           s.target == RbrVar::stack(slot) && s.value.kind == kind &&
           s.value.children.size() == 2 &&
           s.value.children[0].kind == RbrExpr::Kind::var &&
           s.value.children[0].var == RbrVar::stack(a) &&
           s.value.children[1].kind == RbrExpr::Kind::var &&
           s.value.children[1].var == RbrVar::stack(b);
}

bool is_opaque_assign(const RbrStatement& s, uint32_t slot, Opcode op, uint32_t a,
    uint32_t b)
{
    return s.kind == RbrStatement::Kind::assign &&
           s.target == RbrVar::stack(slot) && s.value.kind == RbrExpr::Kind::opaque &&
           s.value.op == op && s.value.children.size() == 2 &&
           s.value.children[0].kind == RbrExpr::Kind::var &&
           s.value.children[0].var == RbrVar::stack(a) &&
           s.value.children[1].kind == RbrExpr::Kind::var &&
           s.value.children[1].var == RbrVar::stack(b);
}

bool is_iszero_assign(const RbrStatement& s, uint32_t slot)
{
    return s.kind == RbrStatement::Kind::assign &&
           s.target == RbrVar::stack(slot) && s.value.kind == RbrExpr::Kind::opaque &&
           s.value.op == Opcode::EQ && s.value.children.size() == 2 &&
           s.value.children[0].kind == RbrExpr::Kind::var &&
           s.value.children[0].var == RbrVar::stack(slot) &&
           s.value.children[1].kind == RbrExpr::Kind::constant &&
           s.value.children[1].value == 0;
}

/// Tries to match the 22-statement length-decoding pattern starting at
/// position p with stack base i (the slot holding the string/bytes word);
/// returns the end position on success.
std::optional<size_t> match_length_pattern(
    const std::vector<RbrStatement>& body, size_t p, uint32_t i)
{
    constexpr size_t kPatternLength = 26;  // 14 assignments + 12 nops
    if (p + kPatternLength > body.size())
        return std::nullopt;
    const auto& b = body;
    size_t k = p;
    auto need = [](bool condition) { return condition; };

    if (!need(is_const_assign(b[k], i + 1, 1)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::PUSH1)))
        return std::nullopt;
    if (!need(is_var_assign(b[++k], i + 2, i)))
        return std::nullopt;
    if (!need(is_nop(b[++k], static_cast<Opcode>(0x81))))  // DUP2
        return std::nullopt;
    if (!need(is_const_assign(b[++k], i + 3, 1)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::PUSH1)))
        return std::nullopt;
    if (!need(is_opaque_assign(b[++k], i + 2, Opcode::AND, i + 3, i + 2)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::AND)))
        return std::nullopt;
    if (!need(is_iszero_assign(b[++k], i + 2)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::ISZERO)))
        return std::nullopt;
    if (!need(is_const_assign(b[++k], i + 3, 256)))
        return std::nullopt;
    if (!need(is_nop(b[++k], static_cast<Opcode>(0x61))))  // PUSH2
        return std::nullopt;
    if (!need(is_binary_assign(b[++k], i + 2, RbrExpr::Kind::mul, i + 3, i + 2)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::MUL)))
        return std::nullopt;
    if (!need(is_binary_assign(b[++k], i + 1, RbrExpr::Kind::sub, i + 2, i + 1)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::SUB)))
        return std::nullopt;
    if (!need(is_opaque_assign(b[++k], i, Opcode::AND, i + 1, i)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::AND)))
        return std::nullopt;
    if (!need(is_const_assign(b[++k], i + 1, 2)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::PUSH1)))
        return std::nullopt;
    if (!need(is_var_assign(b[++k], i + 2, i)))
        return std::nullopt;
    if (!need(is_var_assign(b[++k], i, i + 1)))
        return std::nullopt;
    if (!need(is_var_assign(b[++k], i + 1, i + 2)))
        return std::nullopt;
    if (!need(is_nop(b[++k], static_cast<Opcode>(0x90))))  // SWAP1
        return std::nullopt;
    if (!need(is_binary_assign(b[++k], i, RbrExpr::Kind::div, i + 1, i)))
        return std::nullopt;
    if (!need(is_nop(b[++k], Opcode::DIV)))
        return std::nullopt;
    return k + 1;
}
}  // namespace

void rewrite_length_pattern(RbrProgram& rbr)
{
    for (auto& [name, rule] : rbr.rules)
    {
        std::vector<RbrStatement> body;
        body.reserve(rule.body.size());
        size_t p = 0;
        while (p < rule.body.size())
        {
            const RbrStatement& s = rule.body[p];
            std::optional<size_t> end;
            if (s.kind == RbrStatement::Kind::assign &&
                s.target.kind == RbrVar::Kind::stack && s.target.index >= 1)
                end = match_length_pattern(rule.body, p, s.target.index - 1);
            if (!end.has_value())
            {
                body.push_back(s);
                ++p;
                continue;
            }
            for (size_t k = p; k < *end; ++k)
                if (rule.body[k].kind == RbrStatement::Kind::nop)
                    body.push_back(rule.body[k]);
            p = *end;
        }
        rule.body = std::move(body);
    }
}

// ---------------------------------------------------------------------------
// extension 2: parameter slimming
// ---------------------------------------------------------------------------

void slim_parameters(RbrProgram& rbr)
{
    std::map<std::string, std::set<RbrVar>> needed;
    for (const auto& [name, rule] : rbr.rules)
        needed[name] = rule.used_vars();

    bool changed = true;
    while (changed)
    {
        changed = false;
        for (auto& [name, rule] : rbr.rules)
        {
            auto& mine = needed[name];
            const size_t before = mine.size();
            for (const auto& cont : rule.continuations)
            {
                const auto it = needed.find(cont.callee);
                if (it == needed.end())
                    continue;
                mine.insert(it->second.begin(), it->second.end());
            }
            changed |= mine.size() != before;
        }
    }

    for (auto& [name, rule] : rbr.rules)
    {
        rule.params.clear();
        for (uint32_t i = rule.stack_params; i > 0; --i)
            rule.params.push_back(RbrVar::stack(i - 1));
        for (const auto& v : needed[name])
            rule.params.push_back(v);
    }
}

// ---------------------------------------------------------------------------
// textual dump
// ---------------------------------------------------------------------------

std::string dump(const RbrProgram& rbr)
{
    std::vector<const Rule*> order;
    order.reserve(rbr.rules.size());
    for (const auto& [name, rule] : rbr.rules)
        order.push_back(&rule);
    std::sort(order.begin(), order.end(), [](const Rule* a, const Rule* b) {
        return std::tuple(a->block_id, a->is_jump_rule, a->name) <
               std::tuple(b->block_id, b->is_jump_rule, b->name);
    });

    std::ostringstream out;
    const auto params_of = [&](const std::string& name) {
        std::string text;
        const Rule* rule = rbr.find(name);
        if (rule == nullptr)
            return text;
        for (size_t i = 0; i < rule->params.size(); ++i)
        {
            if (i > 0)
                text += ", ";
            text += rule->params[i].str();
        }
        return text;
    };

    for (const Rule* rule : order)
    {
        if (rule->is_jump_rule)
        {
            for (const auto& cont : rule->continuations)
            {
                out << rule->name << '(' << params_of(rule->name) << ") => ";
                if (cont.guard.has_value())
                    out << "guard(" << cont.guard->str() << "), ";
                out << "call(" << cont.callee << '(' << params_of(cont.callee)
                    << "))\n";
            }
            if (rule->continuations.empty())
                out << rule->name << '(' << params_of(rule->name) << ") =>\n";
            continue;
        }
        out << rule->name << '(' << params_of(rule->name) << ") =>\n  ";
        bool first = true;
        for (const auto& stmt : rule->body)
        {
            if (!first)
                out << ", ";
            switch (stmt.kind)
            {
            case RbrStatement::Kind::assign:
                out << stmt.target.str() << " = " << stmt.value.str();
                break;
            case RbrStatement::Kind::nop:
                out << "nop(" << evm::mnemonic(stmt.nop_op) << ')';
                break;
            case RbrStatement::Kind::unknown_store:
                out << "mem(?) = *";
                break;
            }
            first = false;
        }
        for (const auto& cont : rule->continuations)
        {
            if (!first)
                out << ", ";
            out << "call(" << cont.callee << '(' << params_of(cont.callee) << "))";
            first = false;
        }
        out << '\n';
    }
    return out.str();
}
}  // namespace gasbound::rbr
