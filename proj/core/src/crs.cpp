// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/crs.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>

namespace gasbound::crs
{
using rbr::RbrProgram;
using rbr::Rule;
using sizes::AbstractValue;

std::vector<const CostEquation*> CostRelationSystem::equations_of(
    const std::string& head) const
{
    std::vector<const CostEquation*> out;
    for (const auto& eq : equations)
        if (eq.head == head)
            out.push_back(&eq);
    return out;
}

std::vector<std::string> CostRelationSystem::missing_callees() const
{
    std::set<std::string> defined;
    for (const auto& eq : equations)
        defined.insert(eq.head);
    std::set<std::string> missing;
    for (const auto& eq : equations)
        if (eq.call.has_value() && !defined.contains(eq.call->callee))
            missing.insert(eq.call->callee);
    return {missing.begin(), missing.end()};
}

namespace
{
BoundExpr linear_to_bound(const LinearExpr& e)
{
    std::vector<BoundExpr> terms;
    if (e.constant != 0 || e.coeffs.empty())
        terms.push_back(BoundExpr::constant(e.constant));
    for (const auto& [name, c] : e.coeffs)
        terms.push_back(BoundExpr::mul({BoundExpr::constant(c), BoundExpr::param(name)}));
    if (terms.size() == 1)
        return terms[0];
    return BoundExpr::add(std::move(terms));
}

BoundExpr value_to_bound(const std::optional<AbstractValue>& value)
{
    if (!value.has_value() || !value->usable())
        return BoundExpr::unknown();
    return linear_to_bound(value->expr);
}

std::vector<std::string> param_names(const Rule& rule)
{
    std::vector<std::string> names;
    names.reserve(rule.params.size());
    for (const auto& p : rule.params)
        names.push_back(p.str());
    return names;
}

std::vector<std::string> primed_args(const RbrProgram& rbr, const std::string& callee)
{
    std::vector<std::string> args;
    const Rule* rule = rbr.find(callee);
    if (rule == nullptr)
        return args;
    for (const auto& p : rule->params)
        args.push_back(p.str() + "'");
    return args;
}

/// Builds the common skeleton: per continuation of `rule`, one equation with
/// the size-relation bindings and guard attached.
std::vector<CostEquation> continuation_equations(
    const RbrProgram& rbr, const Rule& rule, const sizes::SizeRelation& relation)
{
    std::vector<CostEquation> out;
    for (const auto& cont : relation.continuations)
    {
        CostEquation eq;
        eq.head = rule.name;
        eq.params = param_names(rule);
        eq.cost = BoundExpr::constant(0);
        eq.call = CostEquation::Call{cont.callee, primed_args(rbr, cont.callee)};
        eq.constraints = cont.constraints;
        if (cont.guard.has_value())
            eq.constraints.push_back(*cont.guard);
        eq.unconstrained_args = cont.unconstrained_args;
        out.push_back(std::move(eq));
    }
    return out;
}

BoundExpr nop_cost(const gas::GasSchedule& schedule, const sizes::NopSizes& sizes)
{
    const auto cls = schedule.cost_class(sizes.op);
    if (cls != gas::CostClass::parametric)
        return schedule.opcode_cost_upper(sizes.op);

    // Each template names the stack position of its measured operand; the
    // translation recorded that operand's size abstraction.
    const auto& tmpl = schedule.cost_template(sizes.op);
    size_t max_index = 0;
    for (const auto& term : tmpl.terms)
        max_index = std::max<size_t>(max_index, term.operand_index);
    std::vector<BoundExpr> operands(max_index + 1, BoundExpr::unknown());
    for (const auto& term : tmpl.terms)
        operands[term.operand_index] = value_to_bound(sizes.cost_operand);
    return schedule.opcode_cost_upper(sizes.op, operands);
}
}  // namespace

CostRelationSystem generate_opcode_crs(
    const RbrProgram& rbr, uint32_t entry_block, const gas::GasSchedule& schedule)
{
    CostRelationSystem crs;
    crs.flavor = Flavor::opcode_gas;
    crs.entry = rbr::block_rule_name(entry_block);

    const auto reachable = rbr.reachable_rules(entry_block);
    for (const auto& name : reachable)
    {
        const Rule& rule = rbr.rules.at(name);
        if (name == crs.entry)
            crs.entry_params = param_names(rule);
        const auto relation = sizes::abstract_rule(rule, rbr);

        std::vector<BoundExpr> cost_terms;
        for (const auto& nop : sizes::instantiate_nops(rule))
            cost_terms.push_back(nop_cost(schedule, nop));
        const BoundExpr cost =
            cost_terms.empty() ?
                BoundExpr::constant(0) :
                (cost_terms.size() == 1 ? cost_terms[0] :
                                          BoundExpr::add(std::move(cost_terms)))
                    .simplified();

        if (rule.continuations.empty())
        {
            CostEquation eq;
            eq.head = rule.name;
            eq.params = param_names(rule);
            eq.cost = cost;
            crs.equations.push_back(std::move(eq));
            continue;
        }
        for (auto& eq : continuation_equations(rbr, rule, relation))
        {
            eq.cost = cost;
            crs.equations.push_back(std::move(eq));
        }
    }
    return crs;
}

CostRelationSystem generate_memory_crs(const RbrProgram& rbr, uint32_t entry_block)
{
    CostRelationSystem crs;
    crs.flavor = Flavor::memory_slot;
    crs.entry = rbr::block_rule_name(entry_block);

    const auto reachable = rbr.reachable_rules(entry_block);
    for (const auto& name : reachable)
    {
        const Rule& rule = rbr.rules.at(name);
        if (name == crs.entry)
            crs.entry_params = param_names(rule);
        const auto relation = sizes::abstract_rule(rule, rbr);

        // One candidate body per memory access: its extent in words.
        for (const auto& nop : sizes::instantiate_nops(rule))
        {
            for (const auto& region : nop.regions)
            {
                // A concrete zero length touches nothing.
                if (region.length.kind == AbstractValue::Kind::exact &&
                    region.length.expr.is_constant() &&
                    region.length.expr.constant == 0)
                    continue;
                CostEquation eq;
                eq.head = rule.name;
                eq.params = param_names(rule);
                if (region.start.usable() && region.length.usable())
                {
                    // ceil((start + length) / 32)
                    const LinearExpr end = region.start.expr + region.length.expr;
                    eq.cost = BoundExpr::floor_div(
                        BoundExpr::add({linear_to_bound(end), BoundExpr::constant(31)}),
                        32)
                                  .simplified();
                }
                else
                    eq.cost = BoundExpr::unknown();  // "?" access: unknown extent
                crs.equations.push_back(std::move(eq));
            }
        }

        if (rule.continuations.empty())
        {
            // Zero-extent floor so every head has at least one equation.
            CostEquation eq;
            eq.head = rule.name;
            eq.params = param_names(rule);
            eq.cost = BoundExpr::constant(0);
            crs.equations.push_back(std::move(eq));
            continue;
        }
        for (auto& eq : continuation_equations(rbr, rule, relation))
            crs.equations.push_back(std::move(eq));
    }
    return crs;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string serialize(const CostRelationSystem& crs)
{
    std::ostringstream out;
    out << "crs " << (crs.flavor == Flavor::opcode_gas ? "opcode" : "memory")
        << " entry=" << crs.entry << '\n';
    for (const auto& eq : crs.equations)
    {
        out << "eq " << eq.head << '(';
        for (size_t i = 0; i < eq.params.size(); ++i)
        {
            if (i > 0)
                out << ',';
            out << eq.params[i];
        }
        out << ") = " << eq.cost.str();
        if (eq.call.has_value())
        {
            out << " + " << eq.call->callee << '(';
            for (size_t i = 0; i < eq.call->args.size(); ++i)
            {
                if (i > 0)
                    out << ',';
                out << eq.call->args[i];
            }
            out << ')';
        }
        out << " {";
        bool first = true;
        for (const auto& c : eq.constraints)
        {
            if (!first)
                out << "; ";
            out << c.str();
            first = false;
        }
        for (const auto& u : eq.unconstrained_args)
        {
            if (!first)
                out << "; ";
            out << "free(" << u << ')';
            first = false;
        }
        out << "}\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// parsing (expressions, constraints, whole systems)
// ---------------------------------------------------------------------------

namespace
{
struct Cursor
{
    std::string_view text;
    size_t pos = 0;

    void skip_ws()
    {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
    }
    bool eof()
    {
        skip_ws();
        return pos >= text.size();
    }
    char peek()
    {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool consume(char c)
    {
        skip_ws();
        if (pos < text.size() && text[pos] == c)
        {
            ++pos;
            return true;
        }
        return false;
    }
    bool consume_word(std::string_view word)
    {
        skip_ws();
        if (text.substr(pos, word.size()) == word)
        {
            pos += word.size();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what)
    {
        throw ParseError(what + " at position " + std::to_string(pos) + " in '" +
                         std::string(text) + "'");
    }
};

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
           c == '@' || c == '!';
}

std::string parse_ident(Cursor& c)
{
    c.skip_ws();
    size_t start = c.pos;
    while (c.pos < c.text.size() && ident_char(c.text[c.pos]))
        ++c.pos;
    if (c.pos == start)
        c.fail("expected identifier");
    return std::string(c.text.substr(start, c.pos - start));
}

rational parse_number(Cursor& c)
{
    c.skip_ws();
    size_t start = c.pos;
    while (c.pos < c.text.size() && std::isdigit(static_cast<unsigned char>(c.text[c.pos])))
        ++c.pos;
    if (c.pos == start)
        c.fail("expected number");
    bigint num(std::string(c.text.substr(start, c.pos - start)));
    if (c.pos < c.text.size() && c.text[c.pos] == '/')
    {
        ++c.pos;
        size_t dstart = c.pos;
        while (c.pos < c.text.size() &&
               std::isdigit(static_cast<unsigned char>(c.text[c.pos])))
            ++c.pos;
        if (c.pos == dstart)
            c.fail("expected denominator");
        const bigint den(std::string(c.text.substr(dstart, c.pos - dstart)));
        return rational(num, den);
    }
    return rational(num);
}

BoundExpr parse_expr(Cursor& c);

BoundExpr parse_atom(Cursor& c)
{
    c.skip_ws();
    if (c.consume('?'))
        return BoundExpr::unknown();
    if (c.consume('('))
    {
        BoundExpr e = parse_expr(c);
        if (!c.consume(')'))
            c.fail("expected ')'");
        return e;
    }
    const char ch = c.peek();
    if (std::isdigit(static_cast<unsigned char>(ch)))
        return BoundExpr::constant(parse_number(c));

    const std::string name = parse_ident(c);
    if (name == "nat" || name == "bytes" || name == "max" || name == "floor")
    {
        if (!c.consume('('))
            c.fail("expected '(' after " + name);
        if (name == "max")
        {
            std::vector<BoundExpr> choices;
            choices.push_back(parse_expr(c));
            while (c.consume(','))
                choices.push_back(parse_expr(c));
            if (!c.consume(')'))
                c.fail("expected ')'");
            return BoundExpr::max(std::move(choices));
        }
        BoundExpr arg = parse_expr(c);
        if (name == "floor")
        {
            if (!c.consume('/'))
                c.fail("expected '/' in floor()");
            const rational den = parse_number(c);
            if (!c.consume(')'))
                c.fail("expected ')'");
            if (denominator(den) != 1 || den <= 0)
                c.fail("floor divisor must be a positive integer");
            return BoundExpr::floor_div(std::move(arg), numerator(den));
        }
        if (!c.consume(')'))
            c.fail("expected ')'");
        return name == "nat" ? BoundExpr::nat(std::move(arg)) :
                               BoundExpr::byte_width(std::move(arg));
    }
    return BoundExpr::param(name);
}

BoundExpr parse_power(Cursor& c)
{
    BoundExpr base = parse_atom(c);
    c.skip_ws();
    if (c.pos < c.text.size() && c.text[c.pos] == '^')
    {
        ++c.pos;
        const rational exponent = parse_number(c);
        if (denominator(exponent) != 1 || exponent < 1 || exponent > 8)
            c.fail("unsupported exponent");
        std::vector<BoundExpr> factors(
            static_cast<size_t>(numerator(exponent)), base);
        return BoundExpr::mul(std::move(factors));
    }
    return base;
}

BoundExpr parse_product(Cursor& c)
{
    std::vector<BoundExpr> factors{parse_power(c)};
    while (c.consume('*'))
        factors.push_back(parse_power(c));
    if (factors.size() == 1)
        return factors[0];
    return BoundExpr::mul(std::move(factors));
}

BoundExpr parse_expr(Cursor& c)
{
    std::vector<BoundExpr> terms{parse_product(c)};
    while (true)
    {
        if (c.consume('+'))
        {
            terms.push_back(parse_product(c));
            continue;
        }
        c.skip_ws();
        if (c.pos < c.text.size() && c.text[c.pos] == '-')
        {
            ++c.pos;
            terms.push_back(
                BoundExpr::mul({BoundExpr::constant(-1), parse_product(c)}));
            continue;
        }
        break;
    }
    if (terms.size() == 1)
        return terms[0];
    return BoundExpr::add(std::move(terms));
}

LinearExpr parse_linear(Cursor& c)
{
    LinearExpr out;
    bool negative = false;
    bool first = true;
    while (true)
    {
        c.skip_ws();
        if (!first)
        {
            if (c.consume('+'))
                negative = false;
            else if (c.consume('-'))
                negative = true;
            else
                break;
        }
        else if (c.consume('-'))
            negative = true;

        rational coeff = 1;
        bool saw_coeff = false;
        c.skip_ws();
        if (c.pos < c.text.size() &&
            std::isdigit(static_cast<unsigned char>(c.text[c.pos])))
        {
            coeff = parse_number(c);
            saw_coeff = true;
        }
        if (negative)
            coeff = -coeff;

        c.skip_ws();
        const bool has_star = c.consume('*');
        c.skip_ws();
        if ((has_star || !saw_coeff) && c.pos < c.text.size() &&
            (std::isalpha(static_cast<unsigned char>(c.text[c.pos])) ||
                c.text[c.pos] == '_'))
        {
            const std::string name = parse_ident(c);
            out += LinearExpr::variable(name) * coeff;
        }
        else
            out += LinearExpr(coeff);
        first = false;
    }
    return out;
}

std::optional<Rel> parse_rel(Cursor& c)
{
    c.skip_ws();
    if (c.consume_word("=<"))
        return Rel::le;
    if (c.consume_word("<="))
        return Rel::le;
    if (c.consume_word(">="))
        return Rel::ge;
    if (c.consume_word("<"))
        return Rel::lt;
    if (c.consume_word(">"))
        return Rel::gt;
    if (c.consume_word("="))
        return Rel::eq;
    return std::nullopt;
}
}  // namespace

BoundExpr parse_bound_expr(std::string_view text)
{
    Cursor c{text};
    BoundExpr e = parse_expr(c);
    if (!c.eof())
        c.fail("trailing input");
    return e;
}

CostRelationSystem parse(std::string_view text)
{
    CostRelationSystem crs;
    std::istringstream stream{std::string(text)};
    std::string line;
    bool have_header = false;
    while (std::getline(stream, line))
    {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        Cursor c{line};
        if (c.eof())
            continue;
        if (!have_header)
        {
            if (!c.consume_word("crs"))
                c.fail("expected 'crs' header");
            if (c.consume_word(" opcode") || c.consume_word("opcode"))
                crs.flavor = Flavor::opcode_gas;
            else if (c.consume_word("memory"))
                crs.flavor = Flavor::memory_slot;
            else
                c.fail("expected flavor");
            if (!c.consume_word("entry="))
                c.fail("expected entry=");
            crs.entry = parse_ident(c);
            have_header = true;
            continue;
        }
        if (!c.consume_word("eq"))
            c.fail("expected 'eq'");
        CostEquation eq;
        eq.head = parse_ident(c);
        if (!c.consume('('))
            c.fail("expected '('");
        if (!c.consume(')'))
        {
            eq.params.push_back(parse_ident(c));
            while (c.consume(','))
                eq.params.push_back(parse_ident(c));
            if (!c.consume(')'))
                c.fail("expected ')'");
        }
        if (!c.consume('='))
            c.fail("expected '='");

        // Cost expression runs until an unparenthesized "+ callee(" or "{".
        // Parse the whole remainder up to '{' and split on the last
        // top-level "+ name(args)" tail when present.
        const size_t brace = line.find('{', c.pos);
        std::string middle = line.substr(
            c.pos, brace == std::string::npos ? std::string::npos : brace - c.pos);

        // find a top-level "+ ident(" suffix
        int depth = 0;
        size_t call_pos = std::string::npos;
        for (size_t i = 0; i < middle.size(); ++i)
        {
            if (middle[i] == '(')
                ++depth;
            else if (middle[i] == ')')
                --depth;
            else if (middle[i] == '+' && depth == 0)
            {
                // candidate: "+ ident ( ... )" with only the call after it
                size_t j = i + 1;
                while (j < middle.size() && middle[j] == ' ')
                    ++j;
                size_t k = j;
                while (k < middle.size() && ident_char(middle[k]))
                    ++k;
                size_t m = k;
                while (m < middle.size() && middle[m] == ' ')
                    ++m;
                if (k > j && m < middle.size() && middle[m] == '(' &&
                    middle.find_first_not_of(" \t\r",
                        middle.find_last_of(')')) == std::string::npos &&
                    middle.rfind(')') != std::string::npos)
                    call_pos = i;
            }
        }

        std::string cost_text = middle;
        if (call_pos != std::string::npos)
        {
            cost_text = middle.substr(0, call_pos);
            std::string call_text = middle.substr(call_pos + 1);
            Cursor cc{call_text};
            CostEquation::Call call;
            call.callee = parse_ident(cc);
            if (!cc.consume('('))
                cc.fail("expected '('");
            if (!cc.consume(')'))
            {
                call.args.push_back(parse_ident(cc));
                while (cc.consume(','))
                    call.args.push_back(parse_ident(cc));
                if (!cc.consume(')'))
                    cc.fail("expected ')'");
            }
            eq.call = std::move(call);
        }
        eq.cost = parse_bound_expr(cost_text);

        if (brace != std::string::npos)
        {
            const size_t close = line.rfind('}');
            if (close == std::string::npos || close < brace)
                throw ParseError("unterminated constraint block: " + line);
            std::string constraints = line.substr(brace + 1, close - brace - 1);
            std::istringstream parts{constraints};
            std::string part;
            while (std::getline(parts, part, ';'))
            {
                Cursor pc{part};
                if (pc.eof())
                    continue;
                if (pc.consume_word("free("))
                {
                    eq.unconstrained_args.insert(parse_ident(pc));
                    continue;
                }
                const LinearExpr lhs = parse_linear(pc);
                const auto rel = parse_rel(pc);
                if (!rel.has_value())
                    pc.fail("expected relation");
                const LinearExpr rhs = parse_linear(pc);
                eq.constraints.push_back({lhs, *rel, rhs});
            }
        }
        crs.equations.push_back(std::move(eq));
    }
    if (!have_header)
        throw ParseError("empty CRS input");
    if (crs.entry_params.empty())
        for (const auto& eq : crs.equations)
            if (eq.head == crs.entry)
            {
                crs.entry_params = eq.params;
                break;
            }
    return crs;
}
}  // namespace gasbound::crs
