// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/common.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>

namespace gasbound
{
/// Affine expression over named variables with rational coefficients.
struct LinearExpr
{
    rational constant;
    std::map<std::string, rational> coeffs;  // zero coefficients never stored

    LinearExpr() : constant(0) {}
    explicit LinearExpr(rational c) : constant(std::move(c)) {}
    static LinearExpr variable(const std::string& name);

    LinearExpr& operator+=(const LinearExpr& other);
    LinearExpr& operator-=(const LinearExpr& other);
    LinearExpr& operator*=(const rational& factor);
    friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
    friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
    friend LinearExpr operator*(LinearExpr a, const rational& f) { return a *= f; }

    bool is_constant() const { return coeffs.empty(); }
    rational coeff(const std::string& name) const;
    /// Replaces `name` by `replacement`.
    void substitute(const std::string& name, const LinearExpr& replacement);
    /// Renames every variable through `rename`.
    LinearExpr renamed(const std::map<std::string, std::string>& rename) const;

    rational evaluate(const std::map<std::string, rational>& env) const;
    std::string str() const;

    friend bool operator==(const LinearExpr&, const LinearExpr&) = default;
};

enum class Rel
{
    eq,
    le,
    lt,
    ge,
    gt,
};

std::string_view rel_str(Rel rel);
Rel rel_complement(Rel rel);  // negation: < -> >=, = has no single complement

/// lhs REL rhs over one rule's variables (primed names mark call arguments).
struct LinearConstraint
{
    LinearExpr lhs;
    Rel rel = Rel::eq;
    LinearExpr rhs;

    bool holds(const std::map<std::string, rational>& env) const;
    LinearConstraint renamed(const std::map<std::string, std::string>& rename) const;
    std::string str() const;

    friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// Conjunction of linear constraints with Fourier-Motzkin elimination over
/// the rationals. All variables are integer-valued by construction (EVM
/// words and sizes), which licenses tightening strict rows to non-strict
/// ones after integer scaling.
class LinearSystem
{
public:
    /// Hard cap on how many variables one projection may eliminate.
    static constexpr size_t kEliminationCap = 16;
    static constexpr size_t kRowCap = 4096;

    void add(const LinearConstraint& constraint);
    /// expr = 0 (equality) or expr <= 0.
    void add_row(LinearExpr expr, bool equality);

    std::set<std::string> variables() const;
    bool empty() const { return equalities_.empty() && inequalities_.empty(); }

    /// Eliminates all variables outside `keep`. Returns false when the
    /// elimination cap or row cap is hit (result then unusable).
    bool project_onto(const std::set<std::string>& keep);

    /// True when the conjunction has no rational solution. May return false
    /// negatives only if caps are hit (reported via `capped`).
    bool infeasible(bool* capped = nullptr) const;

    /// system |= (expr <= 0)?
    bool entails_le_zero(const LinearExpr& expr) const;

    /// Upper bounds "objective <= e" with e over `targets` only, derivable
    /// from the system. Equality-derived bounds come first.
    std::vector<LinearExpr> upper_bounds(
        const LinearExpr& objective, const std::set<std::string>& targets) const;

    const std::vector<LinearExpr>& equalities() const { return equalities_; }
    const std::vector<LinearExpr>& inequalities() const { return inequalities_; }

    std::string str() const;

private:
    // equalities: expr = 0; inequalities: expr <= 0 (integer-scaled).
    std::vector<LinearExpr> equalities_;
    std::vector<LinearExpr> inequalities_;

    bool eliminate(const std::string& name);
    void push_inequality(LinearExpr expr);
};
}  // namespace gasbound
