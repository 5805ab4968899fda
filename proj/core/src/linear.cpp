// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/linear.hpp>

#include <algorithm>
#include <sstream>

namespace gasbound
{
LinearExpr LinearExpr::variable(const std::string& name)
{
    LinearExpr e;
    e.coeffs[name] = 1;
    return e;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other)
{
    constant += other.constant;
    for (const auto& [name, c] : other.coeffs)
    {
        auto& mine = coeffs[name];
        mine += c;
        if (mine == 0)
            coeffs.erase(name);
    }
    return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other)
{
    constant -= other.constant;
    for (const auto& [name, c] : other.coeffs)
    {
        auto& mine = coeffs[name];
        mine -= c;
        if (mine == 0)
            coeffs.erase(name);
    }
    return *this;
}

LinearExpr& LinearExpr::operator*=(const rational& factor)
{
    if (factor == 0)
    {
        coeffs.clear();
        constant = 0;
        return *this;
    }
    constant *= factor;
    for (auto& [name, c] : coeffs)
        c *= factor;
    return *this;
}

rational LinearExpr::coeff(const std::string& name) const
{
    const auto it = coeffs.find(name);
    return it == coeffs.end() ? rational(0) : it->second;
}

void LinearExpr::substitute(const std::string& name, const LinearExpr& replacement)
{
    const auto it = coeffs.find(name);
    if (it == coeffs.end())
        return;
    const rational c = it->second;
    coeffs.erase(it);
    LinearExpr scaled = replacement;
    scaled *= c;
    *this += scaled;
}

LinearExpr LinearExpr::renamed(const std::map<std::string, std::string>& rename) const
{
    LinearExpr out;
    out.constant = constant;
    for (const auto& [name, c] : coeffs)
    {
        const auto it = rename.find(name);
        const std::string& target = it == rename.end() ? name : it->second;
        out.coeffs[target] += c;
        if (out.coeffs[target] == 0)
            out.coeffs.erase(target);
    }
    return out;
}

rational LinearExpr::evaluate(const std::map<std::string, rational>& env) const
{
    rational value = constant;
    for (const auto& [name, c] : coeffs)
    {
        const auto it = env.find(name);
        if (it != env.end())
            value += c * it->second;
    }
    return value;
}

std::string LinearExpr::str() const
{
    std::ostringstream out;
    bool first = true;
    auto print_coeff = [&](const rational& c, bool lead) {
        if (c < 0)
            out << '-';
        else if (!lead)
            out << '+';
        const rational a = c < 0 ? rational(-c) : c;
        if (a != 1)
        {
            if (denominator(a) == 1)
                out << numerator(a) << '*';
            else
                out << numerator(a) << '/' << denominator(a) << '*';
        }
    };
    for (const auto& [name, c] : coeffs)
    {
        print_coeff(c, first);
        out << name;
        first = false;
    }
    if (constant != 0 || first)
    {
        if (constant >= 0 && !first)
            out << '+';
        if (denominator(constant) == 1)
            out << numerator(constant);
        else
            out << numerator(constant) << '/' << denominator(constant);
    }
    return out.str();
}

std::string_view rel_str(Rel rel)
{
    switch (rel)
    {
    case Rel::eq:
        return "=";
    case Rel::le:
        return "=<";
    case Rel::lt:
        return "<";
    case Rel::ge:
        return ">=";
    case Rel::gt:
        return ">";
    }
    return "?";
}

Rel rel_complement(Rel rel)
{
    switch (rel)
    {
    case Rel::le:
        return Rel::gt;
    case Rel::lt:
        return Rel::ge;
    case Rel::ge:
        return Rel::lt;
    case Rel::gt:
        return Rel::le;
    case Rel::eq:
        break;
    }
    return Rel::eq;
}

bool LinearConstraint::holds(const std::map<std::string, rational>& env) const
{
    const rational l = lhs.evaluate(env);
    const rational r = rhs.evaluate(env);
    switch (rel)
    {
    case Rel::eq:
        return l == r;
    case Rel::le:
        return l <= r;
    case Rel::lt:
        return l < r;
    case Rel::ge:
        return l >= r;
    case Rel::gt:
        return l > r;
    }
    return false;
}

LinearConstraint LinearConstraint::renamed(
    const std::map<std::string, std::string>& rename) const
{
    return {lhs.renamed(rename), rel, rhs.renamed(rename)};
}

std::string LinearConstraint::str() const
{
    return lhs.str() + std::string(rel_str(rel)) + rhs.str();
}

namespace
{
/// Scales to integer coefficients with gcd 1. Returns the scale factor used
/// (always > 0).
void integer_normalize(LinearExpr& e)
{
    bigint lcm = 1;
    auto fold = [&](const rational& r) {
        const bigint den = denominator(r);
        lcm = lcm / gcd(lcm, den) * den;
    };
    fold(e.constant);
    for (const auto& [_, c] : e.coeffs)
        fold(c);
    if (lcm != 1)
        e *= rational(lcm);

    bigint g = 0;
    auto fold_gcd = [&](const rational& r) { g = gcd(g, numerator(r)); };
    for (const auto& [_, c] : e.coeffs)
        fold_gcd(c);
    if (g > 1)
    {
        // Keep the constant exact: divide only if it stays integral, else
        // scale coefficients only is unsound -- so skip entirely.
        if (numerator(e.constant) % g == 0)
            e *= rational(rational(1) / rational(g));
    }
}
}  // namespace

void LinearSystem::add(const LinearConstraint& constraint)
{
    LinearExpr diff = constraint.lhs - constraint.rhs;  // lhs - rhs REL 0
    switch (constraint.rel)
    {
    case Rel::eq:
        add_row(std::move(diff), true);
        return;
    case Rel::le:
        add_row(std::move(diff), false);
        return;
    case Rel::ge:
        add_row(LinearExpr() - diff, false);
        return;
    case Rel::lt:
    case Rel::gt:
    {
        if (constraint.rel == Rel::gt)
            diff = LinearExpr() - diff;
        // Strict over integers: scale to integer coefficients, then
        // tighten diff < 0 into diff + 1 <= 0.
        integer_normalize(diff);
        diff.constant += 1;
        add_row(std::move(diff), false);
        return;
    }
    }
}

void LinearSystem::add_row(LinearExpr expr, bool equality)
{
    if (equality)
    {
        if (expr.is_constant())
        {
            if (expr.constant != 0)
                inequalities_.push_back(LinearExpr(rational(1)));  // 1 <= 0: absurd
            return;
        }
        equalities_.push_back(std::move(expr));
        return;
    }
    push_inequality(std::move(expr));
}

void LinearSystem::push_inequality(LinearExpr expr)
{
    if (expr.is_constant())
    {
        if (expr.constant > 0)
            inequalities_.push_back(LinearExpr(rational(1)));
        return;  // trivially true rows are dropped
    }
    // Cheap dedup against existing rows.
    for (const auto& row : inequalities_)
        if (row == expr)
            return;
    inequalities_.push_back(std::move(expr));
}

std::set<std::string> LinearSystem::variables() const
{
    std::set<std::string> vars;
    for (const auto& row : equalities_)
        for (const auto& [name, _] : row.coeffs)
            vars.insert(name);
    for (const auto& row : inequalities_)
        for (const auto& [name, _] : row.coeffs)
            vars.insert(name);
    return vars;
}

bool LinearSystem::eliminate(const std::string& name)
{
    // Prefer Gaussian substitution through an equality.
    for (size_t i = 0; i < equalities_.size(); ++i)
    {
        const rational c = equalities_[i].coeff(name);
        if (c == 0)
            continue;
        LinearExpr solution = equalities_[i];  // c*name + rest = 0
        solution.coeffs.erase(name);
        solution *= rational(-1) / c;  // name = solution
        equalities_.erase(equalities_.begin() + static_cast<long>(i));
        for (auto& row : equalities_)
            row.substitute(name, solution);
        std::vector<LinearExpr> old;
        old.swap(inequalities_);
        for (auto& row : old)
        {
            row.substitute(name, solution);
            push_inequality(std::move(row));
        }
        std::erase_if(
            equalities_, [](const LinearExpr& e) { return e == LinearExpr(); });
        return true;
    }

    std::vector<LinearExpr> uppers, lowers, rest;
    for (auto& row : inequalities_)
    {
        const rational c = row.coeff(name);
        if (c > 0)
            uppers.push_back(std::move(row));
        else if (c < 0)
            lowers.push_back(std::move(row));
        else
            rest.push_back(std::move(row));
    }
    inequalities_ = std::move(rest);
    for (const auto& up : uppers)
    {
        for (const auto& lo : lowers)
        {
            // up: cu*name + ru <= 0 (cu > 0); lo: cl*name + rl <= 0 (cl < 0)
            const rational cu = up.coeff(name);
            const rational cl = lo.coeff(name);
            LinearExpr combined = up * rational(-cl) + lo * cu;
            combined.coeffs.erase(name);
            push_inequality(std::move(combined));
            if (inequalities_.size() > kRowCap)
                return false;
        }
    }
    return true;
}

bool LinearSystem::project_onto(const std::set<std::string>& keep)
{
    std::set<std::string> victims;
    for (const auto& v : variables())
        if (!keep.contains(v))
            victims.insert(v);
    if (victims.size() > kEliminationCap)
        return false;
    for (const auto& v : victims)
        if (!eliminate(v))
            return false;
    return true;
}

bool LinearSystem::infeasible(bool* capped) const
{
    if (capped != nullptr)
        *capped = false;
    LinearSystem copy = *this;
    const auto vars = copy.variables();
    size_t count = 0;
    for (const auto& v : vars)
    {
        if (++count > kEliminationCap * 4 || !copy.eliminate(v))
        {
            if (capped != nullptr)
                *capped = true;
            return false;
        }
    }
    for (const auto& row : copy.inequalities_)
        if (row.is_constant() && row.constant > 0)
            return true;
    for (const auto& row : copy.equalities_)
        if (row.is_constant() && row.constant != 0)
            return true;
    return false;
}

bool LinearSystem::entails_le_zero(const LinearExpr& expr) const
{
    LinearSystem copy = *this;
    // not(expr <= 0) is expr > 0.
    LinearExpr neg = LinearExpr() - expr;
    integer_normalize(neg);
    neg.constant += 1;  // expr >= 1 over integers
    copy.push_inequality(std::move(neg));
    bool capped = false;
    const bool result = copy.infeasible(&capped);
    return result && !capped;
}

std::vector<LinearExpr> LinearSystem::upper_bounds(
    const LinearExpr& objective, const std::set<std::string>& targets) const
{
    static const std::string kObj = "!objective";
    LinearSystem copy = *this;
    LinearExpr def = objective;
    def.coeffs[kObj] -= 1;  // objective - obj_var = 0
    copy.add_row(std::move(def), true);

    std::set<std::string> keep = targets;
    keep.insert(kObj);
    if (!copy.project_onto(keep))
        return {};

    std::vector<LinearExpr> bounds;
    // Equalities give exact rewrites; order them first.
    for (const auto& row : copy.equalities_)
    {
        const rational c = row.coeff(kObj);
        if (c == 0)
            continue;
        LinearExpr bound = row;
        bound.coeffs.erase(kObj);
        bound *= rational(-1) / c;
        bounds.push_back(std::move(bound));
    }
    for (const auto& row : copy.inequalities_)
    {
        const rational c = row.coeff(kObj);
        if (c <= 0)
            continue;  // lower bound or unrelated
        LinearExpr bound = row;  // c*obj + rest <= 0  ->  obj <= -rest/c
        bound.coeffs.erase(kObj);
        bound *= rational(-1) / c;
        bounds.push_back(std::move(bound));
    }
    return bounds;
}

std::string LinearSystem::str() const
{
    std::ostringstream out;
    bool first = true;
    for (const auto& row : equalities_)
    {
        if (!first)
            out << ", ";
        out << row.str() << "=0";
        first = false;
    }
    for (const auto& row : inequalities_)
    {
        if (!first)
            out << ", ";
        out << row.str() << "=<0";
        first = false;
    }
    return out.str();
}
}  // namespace gasbound
