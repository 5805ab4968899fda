// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/crs.hpp>

#include <chrono>

namespace gasbound::solver
{
/// Linear ranking function of a recursive equation family: under the family
/// constraints the expression drops by at least `decrease` per application
/// and is >= 1 whenever a recursive body applies.
struct RankingFunction
{
    LinearExpr expr;
    rational decrease;
};

struct AnalysisOutcome
{
    enum class Kind
    {
        bound,
        finite_no_bound,      // maximization error; termination established
        termination_unknown,  // ranking function error
        cover_point_error,    // no single-entry recursive structure
        timeout,
    };

    Kind kind = Kind::bound;
    BoundExpr bound;  // only meaningful for Kind::bound
    std::string detail;
};

std::string_view outcome_name(AnalysisOutcome::Kind kind);

struct SolveStats
{
    uint64_t ranking_searches = 0;  // families that ran a ranking search
    uint64_t unfolded_bodies = 0;
    uint64_t loops_solved = 0;
};

/// One recursive body of a direct-recursion family, for standalone ranking
/// work: `next[i]` names the value passed for `params[i]`.
struct LoopBody
{
    BoundExpr cost;
    std::vector<LinearConstraint> constraints;
    std::vector<std::string> next;
};

/// Deterministic search over single-parameter and pairwise-difference
/// candidates; entailments checked by exact rational reasoning over the
/// body constraints (plus implicit non-negativity).
std::optional<RankingFunction> find_linear_ranking(
    const std::vector<LoopBody>& bodies, const std::vector<std::string>& params);

/// Independent re-validation of a ranking function's two entailments.
bool verify_ranking(const RankingFunction& rf, const std::vector<LoopBody>& bodies,
    const std::vector<std::string>& params);

/// Rewrites `expr` into `entry_params` only, substituting equalities and
/// relaxing positively-occurring variables to derivable upper bounds.
/// Unresolvable parts become BoundExpr::unknown(); the first missing
/// variable is reported through `fail_detail` when given.
BoundExpr maximize_cost(const BoundExpr& expr,
    const std::vector<LinearConstraint>& context,
    const std::set<std::string>& entry_params, std::string* fail_detail = nullptr);

/// Call-graph feasibility of the direct-recursion transformation: every
/// recursive group, hierarchically, must be enterable through exactly one
/// head. Infeasibility is the cover point error.
struct DirectRecursionInfo
{
    bool feasible = true;
    std::string detail;
};
DirectRecursionInfo to_direct_recursion(const crs::CostRelationSystem& crs);

/// Solves a cost relation system into a closed-form upper bound of the
/// entry, or classifies the failure. Never throws on well-formed input.
AnalysisOutcome solve(const crs::CostRelationSystem& crs,
    std::chrono::milliseconds timeout = std::chrono::milliseconds{60000},
    SolveStats* stats = nullptr);
}  // namespace gasbound::solver
