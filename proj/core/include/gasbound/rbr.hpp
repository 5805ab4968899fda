// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/cfg.hpp>
#include <gasbound/linear.hpp>

namespace gasbound::rbr
{
/// Variable of the rule-based representation.
///  - stack s_i (i counted from the bottom of the EVM stack)
///  - mem_word l_i (the i-th 32-byte word of local memory)
///  - state g_i (contract storage slot i; for storage arrays the slot holds
///    the length, so its size abstraction is the array length)
///  - blockchain named environment values (address, timestamp, ...) and
///    calldata words (in<offset>)
///  - fresh f_k: an unknown introduced by the translation
struct RbrVar
{
    enum class Kind
    {
        stack,
        mem_word,
        state,
        blockchain,
        fresh,
    };

    Kind kind = Kind::stack;
    uint32_t index = 0;
    std::string name;  // blockchain only

    static RbrVar stack(uint32_t i) { return {Kind::stack, i, {}}; }
    static RbrVar mem_word(uint32_t i) { return {Kind::mem_word, i, {}}; }
    static RbrVar state(uint32_t i) { return {Kind::state, i, {}}; }
    static RbrVar blockchain(std::string n) { return {Kind::blockchain, 0, std::move(n)}; }
    static RbrVar fresh(uint32_t i) { return {Kind::fresh, i, {}}; }

    std::string str() const;

    friend auto operator<=>(const RbrVar&, const RbrVar&) = default;
};

/// Expression over RBR variables. add/sub/mul/div keep enough structure for
/// the size analysis; everything else is an opaque application that
/// remembers its opcode (and(x,y), eq(x,0), sha3(a,b), ...).
struct RbrExpr
{
    enum class Kind
    {
        constant,
        var,
        add,
        sub,
        mul,
        div,
        opaque,
    };

    Kind kind = Kind::constant;
    u256 value = 0;
    RbrVar var;
    evm::Opcode op = evm::Opcode::INVALID;  // opaque only
    std::vector<RbrExpr> children;

    static RbrExpr constant(u256 v);
    static RbrExpr variable(RbrVar v);
    static RbrExpr binary(Kind kind, RbrExpr a, RbrExpr b);
    static RbrExpr opaque(evm::Opcode op, std::vector<RbrExpr> operands);

    std::string str() const;
    /// Variables referenced anywhere in the expression.
    void collect_vars(std::set<RbrVar>& out) const;
};

/// One statement. `nop` wraps the original bytecode mnemonic purely for gas
/// accounting and carries the operand summary needed to instantiate
/// parametric cost templates and memory extents at this program point.
struct RbrStatement
{
    enum class Kind
    {
        assign,
        nop,
        unknown_store,  // memory store to a "?" address; the forget pass
                        // rewrites tracked memory after it
    };

    struct Region
    {
        std::optional<RbrExpr> start;   // byte address; nullopt = "?"
        std::optional<RbrExpr> length;  // bytes; nullopt = "?"
        bool write = false;
    };

    Kind kind = Kind::assign;
    uint32_t instr_seq = 0;  // groups statements of one bytecode instruction

    // assign
    RbrVar target;
    RbrExpr value;

    // nop
    evm::Opcode nop_op = evm::Opcode::INVALID;
    std::optional<RbrExpr> cost_operand;  // EXP exponent, copy/log length, CALL gas
    std::vector<Region> regions;          // memory ranges the opcode touches

    static RbrStatement assign(RbrVar target, RbrExpr value, uint32_t seq);
    static RbrStatement nop(evm::Opcode op, uint32_t seq);
    static RbrStatement unknown_store(uint32_t seq);
};

/// Guard of a conditional continuation; absent means `true` (the sound
/// degradation when the branch condition is not a linear comparison).
struct RbrGuard
{
    RbrExpr lhs;
    Rel rel = Rel::lt;
    RbrExpr rhs;

    std::string str() const;
};

struct Continuation
{
    std::string callee;
    std::optional<RbrGuard> guard;
};

struct Rule
{
    std::string name;
    std::vector<RbrVar> params;  // stack slice (top first), then the rest
    uint32_t stack_params = 0;   // entry stack height
    std::vector<RbrStatement> body;
    std::vector<Continuation> continuations;
    uint32_t continuation_height = 0;  // stack height passed to callees

    uint32_t block_id = 0;
    bool is_jump_rule = false;

    /// Every non-stack variable mentioned by body, guards, or continuations.
    std::set<RbrVar> used_vars() const;
};

struct RbrProgram
{
    std::map<std::string, Rule> rules;
    /// Entry block ids: the contract entry plus one per public function.
    std::set<uint32_t> entry_blocks;
    /// Blocks whose rules could not be built (stack height conflicts).
    std::set<uint32_t> broken_blocks;
    /// Rules whose return-jump could not be linked to a unique call site.
    std::set<std::string> unlinked_rules;
    std::vector<std::string> diagnostics;
    uint32_t next_fresh = 0;
    uint32_t next_clone = 0;

    bool has_rule(const std::string& name) const { return rules.contains(name); }
    const Rule* find(const std::string& name) const;
    /// Rule names reachable from an entry block's rule.
    std::set<std::string> reachable_rules(uint32_t entry_block) const;
};

std::string block_rule_name(uint32_t block_id);
std::string jump_rule_name(uint32_t block_id);

/// One rule per reachable block (plus a guarded jump rule per conditional
/// branch); load/store become assignments, every bytecode instruction
/// appears as exactly one nop.
RbrProgram translate(const cfg::Cfg& cfg);

/// EthIR extension 1: duplicates the rules between an internal call's PUSH
/// of the return offset and the final return JUMP, once per call site, so
/// no rule is shared by two return paths.
void clone_internal_calls(RbrProgram& rbr, const cfg::Cfg& cfg);

/// EthIR extension 3: after each store to an unknown ("?") address, every
/// tracked memory word is reassigned a fresh variable.
void forget_unknown_memory(RbrProgram& rbr);

/// String/bytes length-decoding pattern: deletes the 12 assignments and
/// keeps their nops, so the size abstraction of the slot flows through
/// while full gas is still charged.
void rewrite_length_pattern(RbrProgram& rbr);

/// EthIR extension 2: shrinks each rule's parameters to its live stack
/// slice plus the variables used by the rule or anything reachable from it.
void slim_parameters(RbrProgram& rbr);

/// Textual dump, one rule per line group, in the nop-annotated style.
std::string dump(const RbrProgram& rbr);
}  // namespace gasbound::rbr
