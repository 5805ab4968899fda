// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/size_analysis.hpp>

#include <sstream>

namespace gasbound::sizes
{
using rbr::RbrExpr;
using rbr::RbrStatement;
using rbr::RbrVar;
using rbr::Rule;

namespace
{
class Env
{
public:
    explicit Env(const Rule& rule)
    {
        for (const auto& p : rule.params)
            values_[p.str()] = AbstractValue::exact(LinearExpr::variable(p.str()));
    }

    AbstractValue eval(const RbrExpr& e) const
    {
        switch (e.kind)
        {
        case RbrExpr::Kind::constant:
            return AbstractValue::exact(LinearExpr(rational(bigint(e.value))));
        case RbrExpr::Kind::var:
        {
            const auto it = values_.find(e.var.str());
            return it == values_.end() ? AbstractValue::none() : it->second;
        }
        case RbrExpr::Kind::add:
        {
            const AbstractValue a = eval(e.children[0]);
            const AbstractValue b = eval(e.children[1]);
            if (!a.usable() || !b.usable())
                return AbstractValue::none();
            const auto kind = a.kind == AbstractValue::Kind::upper ||
                                      b.kind == AbstractValue::Kind::upper ?
                                  AbstractValue::Kind::upper :
                                  AbstractValue::Kind::exact;
            return {kind, a.expr + b.expr};
        }
        case RbrExpr::Kind::sub:
        {
            const AbstractValue a = eval(e.children[0]);
            const AbstractValue b = eval(e.children[1]);
            if (!a.usable())
                return AbstractValue::none();
            // a - b <= a when b >= 0, which every modelled value is.
            if (b.kind != AbstractValue::Kind::exact)
                return AbstractValue::upper(a.expr);
            return {a.kind, a.expr - b.expr};
        }
        case RbrExpr::Kind::mul:
        {
            const AbstractValue a = eval(e.children[0]);
            const AbstractValue b = eval(e.children[1]);
            const AbstractValue* scalar = nullptr;
            const AbstractValue* other = nullptr;
            if (a.usable() && a.expr.is_constant() && a.kind == AbstractValue::Kind::exact)
            {
                scalar = &a;
                other = &b;
            }
            else if (b.usable() && b.expr.is_constant() &&
                     b.kind == AbstractValue::Kind::exact)
            {
                scalar = &b;
                other = &a;
            }
            if (scalar == nullptr || !other->usable())
                return AbstractValue::none();
            const rational c = scalar->expr.constant;
            if (c < 0 || (other->kind == AbstractValue::Kind::upper && c == 0))
                return AbstractValue::none();
            LinearExpr scaled = other->expr;
            scaled *= c;
            return {other->kind, std::move(scaled)};
        }
        case RbrExpr::Kind::div:
        {
            // x / c for a positive constant c relaxes to value <= x/c.
            const AbstractValue num = eval(e.children[0]);
            const AbstractValue den = eval(e.children[1]);
            if (!num.usable() || !den.usable() || !den.expr.is_constant() ||
                den.kind != AbstractValue::Kind::exact || den.expr.constant <= 0)
                return AbstractValue::none();
            LinearExpr scaled = num.expr;
            scaled *= rational(1) / den.expr.constant;
            return AbstractValue::upper(std::move(scaled));
        }
        case RbrExpr::Kind::opaque:
            return AbstractValue::none();
        }
        return AbstractValue::none();
    }

    void apply(const RbrStatement& stmt)
    {
        if (stmt.kind != RbrStatement::Kind::assign)
            return;
        values_[stmt.target.str()] = eval(stmt.value);
    }

private:
    std::map<std::string, AbstractValue> values_;
};

std::optional<LinearConstraint> linear_guard(const rbr::RbrGuard& guard, const Env& env)
{
    const AbstractValue lhs = env.eval(guard.lhs);
    const AbstractValue rhs = env.eval(guard.rhs);
    if (lhs.kind != AbstractValue::Kind::exact || rhs.kind != AbstractValue::Kind::exact)
        return std::nullopt;
    return LinearConstraint{lhs.expr, guard.rel, rhs.expr};
}
}  // namespace

SizeRelation abstract_rule(const Rule& rule, const rbr::RbrProgram& program)
{
    Env env(rule);
    for (const auto& stmt : rule.body)
        env.apply(stmt);

    SizeRelation relation;
    relation.rule = rule.name;
    for (const auto& cont : rule.continuations)
    {
        SizeRelation::ContinuationRelation rel;
        rel.callee = cont.callee;

        const rbr::Rule* callee = program.find(cont.callee);
        if (callee != nullptr)
        {
            for (const auto& param : callee->params)
            {
                const std::string primed = param.str() + "'";
                const AbstractValue value =
                    env.eval(RbrExpr::variable(param));
                if (!value.usable())
                {
                    rel.unconstrained_args.insert(primed);
                    continue;
                }
                const Rel op =
                    value.kind == AbstractValue::Kind::exact ? Rel::eq : Rel::le;
                rel.constraints.push_back(
                    {LinearExpr::variable(primed), op, value.expr});
            }
        }
        if (cont.guard.has_value())
        {
            rel.guard = linear_guard(*cont.guard, env);
            rel.guard_degraded = !rel.guard.has_value();
        }
        relation.continuations.push_back(std::move(rel));
    }
    return relation;
}

std::vector<NopSizes> instantiate_nops(const Rule& rule)
{
    std::vector<NopSizes> out;
    Env env(rule);

    size_t i = 0;
    while (i < rule.body.size())
    {
        const uint32_t seq = rule.body[i].instr_seq;
        size_t end = i;
        while (end < rule.body.size() && rule.body[end].instr_seq == seq)
            ++end;

        // Operand summaries see the state before this instruction executes.
        for (size_t k = i; k < end; ++k)
        {
            const RbrStatement& stmt = rule.body[k];
            if (stmt.kind != RbrStatement::Kind::nop)
                continue;
            NopSizes sizes;
            sizes.body_index = k;
            sizes.op = stmt.nop_op;
            if (stmt.cost_operand.has_value())
                sizes.cost_operand = env.eval(*stmt.cost_operand);
            for (const auto& region : stmt.regions)
            {
                NopSizes::Region r;
                r.write = region.write;
                r.start = region.start.has_value() ? env.eval(*region.start) :
                                                     AbstractValue::none();
                r.length = region.length.has_value() ? env.eval(*region.length) :
                                                       AbstractValue::none();
                sizes.regions.push_back(std::move(r));
            }
            out.push_back(std::move(sizes));
        }
        for (size_t k = i; k < end; ++k)
            env.apply(rule.body[k]);
        i = end;
    }
    return out;
}

std::string dump(const rbr::RbrProgram& program)
{
    std::ostringstream out;
    for (const auto& [name, rule] : program.rules)
    {
        const SizeRelation relation = abstract_rule(rule, program);
        for (const auto& cont : relation.continuations)
        {
            out << name << " -> " << cont.callee << " {";
            bool first = true;
            for (const auto& c : cont.constraints)
            {
                if (!first)
                    out << ", ";
                out << c.str();
                first = false;
            }
            if (cont.guard.has_value())
            {
                if (!first)
                    out << ", ";
                out << cont.guard->str();
                first = false;
            }
            for (const auto& u : cont.unconstrained_args)
            {
                if (!first)
                    out << ", ";
                out << "free(" << u << ")";
                first = false;
            }
            out << "}\n";
        }
    }
    return out.str();
}
}  // namespace gasbound::sizes
