// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/bound_expr.hpp>
#include <gasbound/gas_schedule.hpp>
#include <gasbound/size_analysis.hpp>

namespace gasbound::crs
{
/// One equation of a cost relation system:
///   head(params) = cost + callee(args) {constraints}
/// At most one call appears because the RBR is tail-call shaped. Constraints
/// range over `params` and primed callee parameters; `unconstrained_args`
/// lists primed parameters with no binding at all.
struct CostEquation
{
    std::string head;
    std::vector<std::string> params;
    BoundExpr cost;

    struct Call
    {
        std::string callee;
        std::vector<std::string> args;  // primed names aligned to callee params
    };
    std::optional<Call> call;
    std::vector<LinearConstraint> constraints;
    std::set<std::string> unconstrained_args;
};

enum class Flavor
{
    opcode_gas,
    memory_slot,
};

struct CostRelationSystem
{
    Flavor flavor = Flavor::opcode_gas;
    std::string entry;
    std::vector<std::string> entry_params;
    std::vector<CostEquation> equations;

    std::vector<const CostEquation*> equations_of(const std::string& head) const;
    /// Callees referenced but never defined (broken pipeline upstream).
    std::vector<std::string> missing_callees() const;
};

/// Opcode-gas equations: one per rule body, cost = sum of per-nop costs with
/// parametric templates instantiated from the size abstraction at each nop.
CostRelationSystem generate_opcode_crs(const rbr::RbrProgram& rbr,
    uint32_t entry_block, const gas::GasSchedule& schedule);

/// Memory-slot equations: the solved value bounds the highest 32-byte word
/// index any instruction activates. Each access contributes a candidate
/// body (max is encoded as nondeterministic equations); continuations
/// thread through at cost 0.
CostRelationSystem generate_memory_crs(const rbr::RbrProgram& rbr, uint32_t entry_block);

/// Line-oriented serialization:
///   crs <opcode|memory> entry=<head>
///   eq <head>(<params>) = <cost> [+ <callee>(<args>)] { <constraints> }
/// Constraints use =, =<, <, >=, >; "free(x')" marks an unconstrained arg.
std::string serialize(const CostRelationSystem& crs);

struct ParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

CostRelationSystem parse(std::string_view text);

/// Parses a bound/cost expression ("1555+779*nat(g3)").
BoundExpr parse_bound_expr(std::string_view text);
}  // namespace gasbound::crs
