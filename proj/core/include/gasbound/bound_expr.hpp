// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/common.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gasbound
{
/// Closed-form bound algebra: non-negative rational constants, named
/// parameters, +, *, max, nat(l) = max(0, l), floor division by a positive
/// integer constant, and bytes(v) = byte width of v (0 for v <= 0, else
/// 1 + floor(log256 v)). `unknown` marks a value the analysis lost; it is
/// absorbing and turns into a maximization error when it survives to the
/// entry expression.
class BoundExpr
{
public:
    enum class Kind
    {
        constant,
        param,
        add,
        mul,
        max,
        nat,
        floor_div,
        byte_width,
        unknown,
    };

    BoundExpr() : kind_(Kind::constant), value_(0) {}

    static BoundExpr constant(rational value);
    static BoundExpr param(std::string name);
    static BoundExpr add(std::vector<BoundExpr> terms);
    static BoundExpr mul(std::vector<BoundExpr> factors);
    static BoundExpr max(std::vector<BoundExpr> choices);
    static BoundExpr nat(BoundExpr arg);
    static BoundExpr floor_div(BoundExpr numerator, bigint divisor);
    static BoundExpr byte_width(BoundExpr arg);
    static BoundExpr unknown();

    Kind kind() const { return kind_; }
    const rational& value() const { return value_; }
    const std::string& name() const { return name_; }
    const std::vector<BoundExpr>& children() const { return children_; }
    const bigint& divisor() const { return divisor_; }

    bool is_constant() const { return kind_ == Kind::constant; }
    bool contains_unknown() const;
    /// Collects every parameter name referenced, in sorted order.
    std::vector<std::string> params() const;

    /// Evaluates at a concrete assignment; parameters default to 0.
    rational evaluate(const std::map<std::string, rational>& env) const;

    /// Affine view {constant, coefficients} when the expression is a linear
    /// combination of parameters (no max/nat/div/bytes).
    std::optional<std::pair<rational, std::map<std::string, rational>>> to_linear()
        const;

    /// Constant folding, flattening, like-term collection, nat/max pruning,
    /// deterministic child ordering. Evaluation-equivalent at all
    /// non-negative parameter points.
    BoundExpr simplified() const;

    /// Cheap lower bound assuming all parameters are >= 0.
    rational lower_bound() const;

    std::string str() const;

    static int compare(const BoundExpr& a, const BoundExpr& b);
    friend bool operator==(const BoundExpr& a, const BoundExpr& b)
    {
        return compare(a, b) == 0;
    }

private:
    Kind kind_;
    rational value_;
    std::string name_;
    std::vector<BoundExpr> children_;
    bigint divisor_{1};
};

/// floor of a rational toward negative infinity.
bigint rational_floor(const rational& value);
/// Byte width of the integer part: 0 for v <= 0, else ceil(bits/8).
bigint rational_byte_width(const rational& value);
}  // namespace gasbound
