// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/linear.hpp>
#include <gasbound/rbr.hpp>

namespace gasbound::sizes
{
/// Size abstraction of one variable at a program point: a linear expression
/// over the rule's parameters, either exactly or as an upper bound, or
/// nothing at all.
struct AbstractValue
{
    enum class Kind
    {
        exact,
        upper,         // value <= expr (division relaxation and friends)
        unconstrained,
    };

    Kind kind = Kind::unconstrained;
    LinearExpr expr;

    static AbstractValue exact(LinearExpr e) { return {Kind::exact, std::move(e)}; }
    static AbstractValue upper(LinearExpr e) { return {Kind::upper, std::move(e)}; }
    static AbstractValue none() { return {}; }
    bool usable() const { return kind != Kind::unconstrained; }
};

/// Size relations of one rule: per continuation, how callee arguments relate
/// to the rule's parameters (primed names are callee positions), plus the
/// guard when the continuation carries one.
struct SizeRelation
{
    struct ContinuationRelation
    {
        std::string callee;
        std::vector<LinearConstraint> constraints;
        std::set<std::string> unconstrained_args;  // primed names with no binding
        std::optional<LinearConstraint> guard;
        bool guard_degraded = false;  // guard existed but was not linear
    };

    std::string rule;
    std::vector<ContinuationRelation> continuations;
};

/// Forward propagation of linear assignments through the rule body (nops
/// ignored). Anything the analysis cannot track becomes unconstrained.
SizeRelation abstract_rule(const rbr::Rule& rule, const rbr::RbrProgram& program);

/// Size abstractions of a nop's cost operand and memory regions, evaluated
/// in the environment at that instruction (statements of the same
/// instruction see the pre-instruction snapshot).
struct NopSizes
{
    size_t body_index = 0;  // position of the nop in rule.body
    evm::Opcode op = evm::Opcode::INVALID;
    std::optional<AbstractValue> cost_operand;
    struct Region
    {
        AbstractValue start;
        AbstractValue length;
        bool write = false;
    };
    std::vector<Region> regions;
};

std::vector<NopSizes> instantiate_nops(const rbr::Rule& rule);

/// Textual dump of all size relations, one continuation per line.
std::string dump(const rbr::RbrProgram& program);
}  // namespace gasbound::sizes
