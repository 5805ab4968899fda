// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/bound_expr.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace gasbound
{
bigint rational_floor(const rational& value)
{
    const bigint num = numerator(value);
    const bigint den = denominator(value);  // > 0 by cpp_rational invariant
    bigint q = num / den;
    if (num % den != 0 && num < 0)
        --q;
    return q;
}

bigint rational_byte_width(const rational& value)
{
    bigint v = rational_floor(value);
    if (v <= 0)
        return 0;
    bigint width = 0;
    while (v > 0)
    {
        v >>= 8;
        ++width;
    }
    return width;
}

BoundExpr BoundExpr::constant(rational value)
{
    BoundExpr e;
    e.kind_ = Kind::constant;
    e.value_ = std::move(value);
    return e;
}

BoundExpr BoundExpr::param(std::string name)
{
    BoundExpr e;
    e.kind_ = Kind::param;
    e.name_ = std::move(name);
    return e;
}

BoundExpr BoundExpr::add(std::vector<BoundExpr> terms)
{
    BoundExpr e;
    e.kind_ = Kind::add;
    e.children_ = std::move(terms);
    return e;
}

BoundExpr BoundExpr::mul(std::vector<BoundExpr> factors)
{
    BoundExpr e;
    e.kind_ = Kind::mul;
    e.children_ = std::move(factors);
    return e;
}

BoundExpr BoundExpr::max(std::vector<BoundExpr> choices)
{
    BoundExpr e;
    e.kind_ = Kind::max;
    e.children_ = std::move(choices);
    return e;
}

BoundExpr BoundExpr::nat(BoundExpr arg)
{
    BoundExpr e;
    e.kind_ = Kind::nat;
    e.children_.push_back(std::move(arg));
    return e;
}

BoundExpr BoundExpr::floor_div(BoundExpr numerator, bigint divisor)
{
    BoundExpr e;
    e.kind_ = Kind::floor_div;
    e.children_.push_back(std::move(numerator));
    e.divisor_ = std::move(divisor);
    return e;
}

BoundExpr BoundExpr::byte_width(BoundExpr arg)
{
    BoundExpr e;
    e.kind_ = Kind::byte_width;
    e.children_.push_back(std::move(arg));
    return e;
}

BoundExpr BoundExpr::unknown()
{
    BoundExpr e;
    e.kind_ = Kind::unknown;
    return e;
}

bool BoundExpr::contains_unknown() const
{
    if (kind_ == Kind::unknown)
        return true;
    return std::any_of(children_.begin(), children_.end(),
        [](const BoundExpr& c) { return c.contains_unknown(); });
}

namespace
{
void collect_params(const BoundExpr& e, std::set<std::string>& out)
{
    if (e.kind() == BoundExpr::Kind::param)
        out.insert(e.name());
    for (const auto& c : e.children())
        collect_params(c, out);
}
}  // namespace

std::vector<std::string> BoundExpr::params() const
{
    std::set<std::string> set;
    collect_params(*this, set);
    return {set.begin(), set.end()};
}

rational BoundExpr::evaluate(const std::map<std::string, rational>& env) const
{
    switch (kind_)
    {
    case Kind::constant:
        return value_;
    case Kind::param:
    {
        const auto it = env.find(name_);
        return it == env.end() ? rational(0) : it->second;
    }
    case Kind::add:
    {
        rational sum = 0;
        for (const auto& c : children_)
            sum += c.evaluate(env);
        return sum;
    }
    case Kind::mul:
    {
        rational product = 1;
        for (const auto& c : children_)
            product *= c.evaluate(env);
        return product;
    }
    case Kind::max:
    {
        rational best = children_.empty() ? rational(0) : children_[0].evaluate(env);
        for (size_t i = 1; i < children_.size(); ++i)
            best = std::max(best, children_[i].evaluate(env));
        return best;
    }
    case Kind::nat:
        return std::max(rational(0), children_[0].evaluate(env));
    case Kind::floor_div:
        return rational(rational_floor(children_[0].evaluate(env) / rational(divisor_)));
    case Kind::byte_width:
        return rational(rational_byte_width(children_[0].evaluate(env)));
    case Kind::unknown:
        throw std::logic_error("evaluate() on an expression containing unknown");
    }
    return 0;
}

std::optional<std::pair<rational, std::map<std::string, rational>>>
BoundExpr::to_linear() const
{
    rational constant = 0;
    std::map<std::string, rational> coeffs;

    // Accepts constant, param, add of linear, mul with at most one
    // non-constant factor that is itself linear.
    struct Walker
    {
        static bool walk(const BoundExpr& e, const rational& scale, rational& constant,
            std::map<std::string, rational>& coeffs)
        {
            switch (e.kind())
            {
            case Kind::constant:
                constant += scale * e.value();
                return true;
            case Kind::param:
                coeffs[e.name()] += scale;
                return true;
            case Kind::add:
                for (const auto& c : e.children())
                    if (!walk(c, scale, constant, coeffs))
                        return false;
                return true;
            case Kind::mul:
            {
                rational factor = scale;
                const BoundExpr* nonconst = nullptr;
                for (const auto& c : e.children())
                {
                    if (c.is_constant())
                        factor *= c.value();
                    else if (nonconst == nullptr)
                        nonconst = &c;
                    else
                        return false;
                }
                if (nonconst == nullptr)
                {
                    constant += factor;
                    return true;
                }
                return walk(*nonconst, factor, constant, coeffs);
            }
            default:
                return false;
            }
        }
    };

    if (!Walker::walk(*this, 1, constant, coeffs))
        return std::nullopt;
    std::erase_if(coeffs, [](const auto& kv) { return kv.second == 0; });
    return std::pair{constant, coeffs};
}

rational BoundExpr::lower_bound() const
{
    switch (kind_)
    {
    case Kind::constant:
        return value_;
    case Kind::param:
        return 0;
    case Kind::add:
    {
        rational sum = 0;
        for (const auto& c : children_)
            sum += c.lower_bound();
        return sum;
    }
    case Kind::mul:
    {
        // All factors the solver builds are non-negative; a negative lower
        // bound on any factor degrades the product bound to 0.
        rational product = 1;
        for (const auto& c : children_)
        {
            const rational lb = c.lower_bound();
            if (lb < 0)
                return 0;
            product *= lb;
        }
        return product;
    }
    case Kind::max:
    {
        rational best = 0;
        bool first = true;
        for (const auto& c : children_)
        {
            const rational lb = c.lower_bound();
            if (first || lb > best)
                best = lb;
            first = false;
        }
        return best;
    }
    case Kind::nat:
        return std::max(rational(0), children_[0].lower_bound());
    case Kind::floor_div:
        return rational(rational_floor(children_[0].lower_bound() / rational(divisor_)));
    case Kind::byte_width:
        return 0;
    case Kind::unknown:
        return 0;
    }
    return 0;
}

int BoundExpr::compare(const BoundExpr& a, const BoundExpr& b)
{
    if (a.kind_ != b.kind_)
        return a.kind_ < b.kind_ ? -1 : 1;
    switch (a.kind_)
    {
    case Kind::constant:
        if (a.value_ != b.value_)
            return a.value_ < b.value_ ? -1 : 1;
        return 0;
    case Kind::param:
        return a.name_.compare(b.name_);
    case Kind::unknown:
        return 0;
    default:
        break;
    }
    if (a.kind_ == Kind::floor_div && a.divisor_ != b.divisor_)
        return a.divisor_ < b.divisor_ ? -1 : 1;
    if (a.children_.size() != b.children_.size())
        return a.children_.size() < b.children_.size() ? -1 : 1;
    for (size_t i = 0; i < a.children_.size(); ++i)
        if (const int c = compare(a.children_[i], b.children_[i]); c != 0)
            return c;
    return 0;
}

namespace
{
using Kind = BoundExpr::Kind;

BoundExpr simplify(const BoundExpr& e);

// Splits a product into (constant coefficient, remaining factors).
std::pair<rational, std::vector<BoundExpr>> split_coeff(const BoundExpr& e)
{
    if (e.is_constant())
        return {e.value(), {}};
    if (e.kind() == Kind::mul)
    {
        rational coeff = 1;
        std::vector<BoundExpr> rest;
        for (const auto& c : e.children())
        {
            if (c.is_constant())
                coeff *= c.value();
            else
                rest.push_back(c);
        }
        return {coeff, rest};
    }
    return {1, {e}};
}

BoundExpr make_term(const rational& coeff, std::vector<BoundExpr> factors)
{
    if (coeff == 0)
        return BoundExpr::constant(0);
    if (factors.empty())
        return BoundExpr::constant(coeff);
    if (coeff != 1)
        factors.insert(factors.begin(), BoundExpr::constant(coeff));
    if (factors.size() == 1)
        return factors[0];
    return BoundExpr::mul(std::move(factors));
}

BoundExpr simplify_add(const BoundExpr& e)
{
    rational constant = 0;
    // term body (sorted factors) -> coefficient
    std::vector<std::pair<std::vector<BoundExpr>, rational>> terms;

    auto add_term = [&](const BoundExpr& term) {
        auto [coeff, factors] = split_coeff(term);
        if (factors.empty())
        {
            constant += coeff;
            return;
        }
        std::sort(factors.begin(), factors.end(),
            [](const BoundExpr& a, const BoundExpr& b) {
                return BoundExpr::compare(a, b) < 0;
            });
        for (auto& [body, c] : terms)
        {
            if (body.size() == factors.size() &&
                std::equal(body.begin(), body.end(), factors.begin(),
                    [](const BoundExpr& a, const BoundExpr& b) {
                        return BoundExpr::compare(a, b) == 0;
                    }))
            {
                c += coeff;
                return;
            }
        }
        terms.emplace_back(std::move(factors), coeff);
    };

    for (const auto& child : e.children())
    {
        const BoundExpr s = simplify(child);
        if (s.kind() == Kind::add)
            for (const auto& t : s.children())
                add_term(t);
        else
            add_term(s);
    }

    std::vector<BoundExpr> out;
    if (constant != 0)
        out.push_back(BoundExpr::constant(constant));
    std::vector<BoundExpr> built;
    for (auto& [body, coeff] : terms)
        if (coeff != 0)
            built.push_back(make_term(coeff, std::move(body)));
    std::sort(built.begin(), built.end(), [](const BoundExpr& a, const BoundExpr& b) {
        return BoundExpr::compare(a, b) < 0;
    });
    out.insert(out.end(), built.begin(), built.end());

    if (out.empty())
        return BoundExpr::constant(0);
    if (out.size() == 1)
        return out[0];
    return BoundExpr::add(std::move(out));
}

BoundExpr simplify_mul(const BoundExpr& e)
{
    rational coeff = 1;
    std::vector<BoundExpr> factors;
    for (const auto& child : e.children())
    {
        const BoundExpr s = simplify(child);
        if (s.is_constant())
            coeff *= s.value();
        else if (s.kind() == Kind::mul)
        {
            for (const auto& f : s.children())
            {
                if (f.is_constant())
                    coeff *= f.value();
                else
                    factors.push_back(f);
            }
        }
        else
            factors.push_back(s);
    }
    if (coeff == 0)
        return BoundExpr::constant(0);

    // Distribute a constant over a lone sum so c*(a+b) and c*a+c*b agree.
    if (factors.size() == 1 && factors[0].kind() == Kind::add && coeff != 1)
    {
        std::vector<BoundExpr> terms;
        for (const auto& t : factors[0].children())
            terms.push_back(BoundExpr::mul({BoundExpr::constant(coeff), t}));
        return simplify_add(BoundExpr::add(std::move(terms)));
    }

    std::sort(factors.begin(), factors.end(), [](const BoundExpr& a, const BoundExpr& b) {
        return BoundExpr::compare(a, b) < 0;
    });
    return make_term(coeff, std::move(factors));
}

BoundExpr simplify_max(const BoundExpr& e)
{
    std::vector<BoundExpr> choices;
    bool have_const = false;
    rational best_const = 0;

    auto add_choice = [&](const BoundExpr& c) {
        if (c.is_constant())
        {
            if (!have_const || c.value() > best_const)
                best_const = c.value();
            have_const = true;
            return;
        }
        for (const auto& existing : choices)
            if (BoundExpr::compare(existing, c) == 0)
                return;
        choices.push_back(c);
    };

    for (const auto& child : e.children())
    {
        const BoundExpr s = simplify(child);
        if (s.kind() == Kind::max)
            for (const auto& c : s.children())
                add_choice(c);
        else
            add_choice(s);
    }

    if (have_const)
    {
        const bool dominated = std::any_of(choices.begin(), choices.end(),
            [&](const BoundExpr& c) { return c.lower_bound() >= best_const; });
        if (!dominated || choices.empty())
            choices.push_back(BoundExpr::constant(best_const));
    }
    if (choices.empty())
        return BoundExpr::constant(0);
    std::sort(choices.begin(), choices.end(), [](const BoundExpr& a, const BoundExpr& b) {
        return BoundExpr::compare(a, b) < 0;
    });
    if (choices.size() == 1)
        return choices[0];
    return BoundExpr::max(std::move(choices));
}

BoundExpr simplify(const BoundExpr& e)
{
    switch (e.kind())
    {
    case Kind::constant:
    case Kind::param:
    case Kind::unknown:
        return e;
    case Kind::add:
        return simplify_add(e);
    case Kind::mul:
        return simplify_mul(e);
    case Kind::max:
        return simplify_max(e);
    case Kind::nat:
    {
        const BoundExpr arg = simplify(e.children()[0]);
        if (arg.is_constant())
            return BoundExpr::constant(std::max(rational(0), arg.value()));
        if (arg.kind() == Kind::nat)
            return arg;
        // nat(g) for a parameter g is kept: bounds are conventionally
        // reported with the clamp explicit, and it costs nothing.
        if (arg.params().empty() && arg.lower_bound() >= 0)
            return arg;
        return BoundExpr::nat(arg);
    }
    case Kind::floor_div:
    {
        const BoundExpr arg = simplify(e.children()[0]);
        if (e.divisor() == 1)
            return arg;
        if (arg.is_constant())
            return BoundExpr::constant(
                rational(rational_floor(arg.value() / rational(e.divisor()))));
        return BoundExpr::floor_div(arg, e.divisor());
    }
    case Kind::byte_width:
    {
        const BoundExpr arg = simplify(e.children()[0]);
        if (arg.is_constant())
            return BoundExpr::constant(rational(rational_byte_width(arg.value())));
        return BoundExpr::byte_width(arg);
    }
    }
    return e;
}

void render(const BoundExpr& e, std::ostringstream& out, bool parenthesize_add)
{
    switch (e.kind())
    {
    case Kind::constant:
    {
        const auto num = numerator(e.value());
        const auto den = denominator(e.value());
        if (den == 1)
            out << num;
        else
            out << num << '/' << den;
        return;
    }
    case Kind::param:
        out << e.name();
        return;
    case Kind::add:
    {
        if (parenthesize_add)
            out << '(';
        bool first = true;
        for (const auto& c : e.children())
        {
            if (!first)
                out << '+';
            render(c, out, false);
            first = false;
        }
        if (parenthesize_add)
            out << ')';
        return;
    }
    case Kind::mul:
    {
        // a*a renders as (a)^2
        if (e.children().size() == 2 &&
            BoundExpr::compare(e.children()[0], e.children()[1]) == 0)
        {
            out << '(';
            render(e.children()[0], out, false);
            out << ")^2";
            return;
        }
        bool first = true;
        for (const auto& c : e.children())
        {
            if (!first)
                out << '*';
            render(c, out, true);
            first = false;
        }
        return;
    }
    case Kind::max:
    {
        out << "max(";
        bool first = true;
        for (const auto& c : e.children())
        {
            if (!first)
                out << ',';
            render(c, out, false);
            first = false;
        }
        out << ')';
        return;
    }
    case Kind::nat:
        out << "nat(";
        render(e.children()[0], out, false);
        out << ')';
        return;
    case Kind::floor_div:
        out << "floor(";
        render(e.children()[0], out, e.children()[0].kind() == Kind::add);
        out << '/' << e.divisor() << ')';
        return;
    case Kind::byte_width:
        out << "bytes(";
        render(e.children()[0], out, false);
        out << ')';
        return;
    case Kind::unknown:
        out << '?';
        return;
    }
}
}  // namespace

BoundExpr BoundExpr::simplified() const
{
    return simplify(*this);
}

std::string BoundExpr::str() const
{
    std::ostringstream out;
    render(*this, out, false);
    return out.str();
}
}  // namespace gasbound
