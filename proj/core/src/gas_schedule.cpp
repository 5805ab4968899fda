// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/gas_schedule.hpp>

#include <sstream>
#include <stdexcept>

namespace gasbound::gas
{
using evm::Opcode;

namespace
{
// Fee-schedule groups of the pinned fork (EIP-150/-160 values, as served by
// geth 1.8.x before Constantinople).
constexpr int64_t g_zero = 0;
constexpr int64_t g_base = 2;
constexpr int64_t g_verylow = 3;
constexpr int64_t g_low = 5;
constexpr int64_t g_mid = 8;
constexpr int64_t g_high = 10;
constexpr int64_t g_jumpdest = 1;
constexpr int64_t g_sload = 200;       // G_sload
constexpr int64_t g_balance = 400;     // G_balance
constexpr int64_t g_extcode = 700;     // G_extcode, also the CALL family base
constexpr int64_t g_blockhash = 20;    // G_blockhash
constexpr int64_t g_create = 32000;    // G_create
constexpr int64_t g_sset = 20000;      // G_sset
constexpr int64_t g_sreset = 5000;     // G_sreset
constexpr int64_t g_callvalue = 9000;  // G_callvalue
constexpr int64_t g_newaccount = 25000;  // G_newaccount
constexpr int64_t g_selfdestruct = 5000;
constexpr int64_t g_log = 375;      // G_log and G_logtopic
constexpr int64_t g_logdata = 8;    // G_logdata, per byte
constexpr int64_t g_sha3 = 30;      // G_sha3
constexpr int64_t g_sha3word = 6;   // G_sha3word
constexpr int64_t g_copy = 3;       // G_copy, per word
constexpr int64_t g_exp = 10;       // G_exp
constexpr int64_t g_expbyte = 10;   // G_expbyte of this schedule era
}  // namespace

GasSchedule::GasSchedule()
{
    auto c = [&](Opcode op, int64_t gas) { constant_costs_[op] = gas; };

    c(Opcode::STOP, g_zero);
    c(Opcode::RETURN, g_zero);
    c(Opcode::REVERT, g_zero);
    c(Opcode::INVALID, g_zero);

    for (const Opcode op : {Opcode::ADDRESS, Opcode::ORIGIN, Opcode::CALLER,
             Opcode::CALLVALUE, Opcode::CALLDATASIZE, Opcode::CODESIZE,
             Opcode::GASPRICE, Opcode::COINBASE, Opcode::TIMESTAMP, Opcode::NUMBER,
             Opcode::DIFFICULTY, Opcode::GASLIMIT, Opcode::RETURNDATASIZE,
             Opcode::POP, Opcode::PC, Opcode::MSIZE, Opcode::GAS})
        c(op, g_base);

    for (const Opcode op : {Opcode::ADD, Opcode::SUB, Opcode::NOT, Opcode::LT,
             Opcode::GT, Opcode::SLT, Opcode::SGT, Opcode::EQ, Opcode::ISZERO,
             Opcode::AND, Opcode::OR, Opcode::XOR, Opcode::BYTE,
             Opcode::CALLDATALOAD, Opcode::MLOAD, Opcode::MSTORE, Opcode::MSTORE8})
        c(op, g_verylow);
    for (unsigned b = 0x60; b <= 0x9f; ++b)  // PUSH*, DUP*, SWAP*
        c(static_cast<Opcode>(b), g_verylow);

    for (const Opcode op : {Opcode::MUL, Opcode::DIV, Opcode::SDIV, Opcode::MOD,
             Opcode::SMOD, Opcode::SIGNEXTEND})
        c(op, g_low);

    c(Opcode::ADDMOD, g_mid);
    c(Opcode::MULMOD, g_mid);
    c(Opcode::JUMP, g_mid);
    c(Opcode::JUMPI, g_high);
    c(Opcode::JUMPDEST, g_jumpdest);

    c(Opcode::SLOAD, g_sload);
    c(Opcode::BALANCE, g_balance);
    c(Opcode::EXTCODESIZE, g_extcode);
    c(Opcode::BLOCKHASH, g_blockhash);
    c(Opcode::CREATE, g_create);
    // No value transfer is possible through these two, so the call base is
    // their whole opcode cost; forwarded gas is the callee's to spend.
    c(Opcode::DELEGATECALL, g_extcode);
    c(Opcode::STATICCALL, g_extcode);

    conditional_costs_[Opcode::SSTORE] = {g_sset, g_sreset};
    conditional_costs_[Opcode::CALLCODE] = {g_extcode + g_callvalue, g_extcode};
    conditional_costs_[Opcode::SELFDESTRUCT] = {
        g_selfdestruct + g_newaccount, g_selfdestruct};

    auto t = [&](Opcode op, CostTemplate tmpl) { parametric_costs_[op] = tmpl; };

    t(Opcode::EXP, {g_exp, {{g_expbyte, 1, Measure::byte_width}}});
    t(Opcode::SHA3, {g_sha3, {{g_sha3word, 1, Measure::words}}});
    t(Opcode::CALLDATACOPY, {g_verylow, {{g_copy, 2, Measure::words}}});
    t(Opcode::CODECOPY, {g_verylow, {{g_copy, 2, Measure::words}}});
    t(Opcode::RETURNDATACOPY, {g_verylow, {{g_copy, 2, Measure::words}}});
    t(Opcode::EXTCODECOPY, {g_extcode, {{g_copy, 3, Measure::words}}});
    for (unsigned n = 0; n <= 4; ++n)
        t(static_cast<Opcode>(0xa0 + n),
            {g_log + g_log * static_cast<int64_t>(n),
                {{g_logdata, 1, Measure::value}}});
    // CALL: worst-case conditional part (value transfer into a fresh
    // account) plus the forwarded-gas operand.
    t(Opcode::CALL, {g_extcode + g_callvalue + g_newaccount,
                        {{1, 0, Measure::value}}});
}

const GasSchedule& GasSchedule::pinned()
{
    static const GasSchedule schedule;
    return schedule;
}

CostClass GasSchedule::cost_class(Opcode op) const
{
    if (constant_costs_.contains(op))
        return CostClass::constant;
    if (conditional_costs_.contains(op))
        return CostClass::conditional;
    if (parametric_costs_.contains(op))
        return CostClass::parametric;
    throw std::out_of_range("opcode not in the pinned schedule");
}

int64_t GasSchedule::constant_cost(Opcode op) const
{
    return constant_costs_.at(op);
}

std::pair<int64_t, int64_t> GasSchedule::conditional_costs(Opcode op) const
{
    return conditional_costs_.at(op);
}

const CostTemplate& GasSchedule::cost_template(Opcode op) const
{
    return parametric_costs_.at(op);
}

namespace
{
BoundExpr measure_expr(Measure measure, const BoundExpr& operand)
{
    switch (measure)
    {
    case Measure::value:
        return operand;
    case Measure::words:
        return BoundExpr::floor_div(
            BoundExpr::add({operand, BoundExpr::constant(31)}), 32);
    case Measure::byte_width:
        return BoundExpr::byte_width(operand);
    }
    return BoundExpr::unknown();
}
}  // namespace

BoundExpr GasSchedule::opcode_cost_upper(
    Opcode op, std::span<const BoundExpr> operands) const
{
    switch (cost_class(op))
    {
    case CostClass::constant:
        return BoundExpr::constant(constant_costs_.at(op));
    case CostClass::conditional:
    {
        const auto [g1, g2] = conditional_costs_.at(op);
        return BoundExpr::constant(std::max(g1, g2));
    }
    case CostClass::parametric:
        break;
    }

    const CostTemplate& tmpl = parametric_costs_.at(op);
    std::vector<BoundExpr> terms;
    terms.push_back(BoundExpr::constant(tmpl.base));
    for (const auto& term : tmpl.terms)
    {
        BoundExpr operand = term.operand_index < operands.size() ?
                                operands[term.operand_index] :
                                BoundExpr::unknown();
        if (operand.contains_unknown())
        {
            if (term.measure == Measure::byte_width)
                operand = BoundExpr::constant(rational(bigint(1) << 255));  // cap: 32 bytes
            else
            {
                terms.push_back(BoundExpr::unknown());
                continue;
            }
        }
        terms.push_back(BoundExpr::mul({BoundExpr::constant(term.coefficient),
            measure_expr(term.measure, operand)}));
    }
    return BoundExpr::add(std::move(terms)).simplified();
}

bigint GasSchedule::concrete_cost(
    Opcode op, std::span<const u256> operands, bool first_branch) const
{
    switch (cost_class(op))
    {
    case CostClass::constant:
        return constant_costs_.at(op);
    case CostClass::conditional:
    {
        const auto [g1, g2] = conditional_costs_.at(op);
        return first_branch ? g1 : g2;
    }
    case CostClass::parametric:
        break;
    }

    std::vector<BoundExpr> sizes;
    sizes.reserve(operands.size());
    for (const u256& v : operands)
        sizes.push_back(BoundExpr::constant(rational(bigint(v))));
    const BoundExpr cost = opcode_cost_upper(op, sizes);
    return rational_floor(cost.evaluate({}));
}

bigint GasSchedule::mem_cost(const bigint& active_words) const
{
    if (active_words < 0)
        throw std::invalid_argument("mem_cost: negative active word count");
    return g_memory_ * active_words + (active_words * active_words) / 512;
}

bigint GasSchedule::mem_cost_delta(const bigint& before, const bigint& after) const
{
    if (after < before)
        throw std::invalid_argument("mem_cost_delta: shrinking active memory");
    return mem_cost(after) - mem_cost(before);
}

BoundExpr GasSchedule::mem_cost_expr(const BoundExpr& active_words) const
{
    return BoundExpr::add(
        {BoundExpr::mul({BoundExpr::constant(g_memory_), active_words}),
            BoundExpr::floor_div(BoundExpr::mul({active_words, active_words}), 512)})
        .simplified();
}

void GasSchedule::apply_overrides(std::string_view text)
{
    std::istringstream stream{std::string(text)};
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        // trim
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos)
            continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(
                "schedule override line " + std::to_string(line_no) + ": expected KEY=VALUE");
        std::string key = line.substr(0, eq);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
            key.pop_back();
        const auto op = evm::opcode_from_mnemonic(key);
        if (!op)
            throw std::invalid_argument("schedule override line " +
                                        std::to_string(line_no) + ": unknown mnemonic '" +
                                        key + "'");
        if (!constant_costs_.contains(*op))
            throw std::invalid_argument("schedule override line " +
                                        std::to_string(line_no) + ": " + key +
                                        " is not a class-1 (constant-cost) opcode");
        const std::string value = line.substr(eq + 1);
        int64_t gas = 0;
        try
        {
            size_t pos = 0;
            gas = std::stoll(value, &pos);
            while (pos < value.size() &&
                   (value[pos] == ' ' || value[pos] == '\t'))
                ++pos;
            if (pos != value.size())
                throw std::invalid_argument("trailing characters");
        }
        catch (const std::exception&)
        {
            throw std::invalid_argument("schedule override line " +
                                        std::to_string(line_no) + ": bad gas value '" +
                                        value + "'");
        }
        if (gas < 0)
            throw std::invalid_argument("schedule override line " +
                                        std::to_string(line_no) + ": negative gas");
        constant_costs_[*op] = gas;
    }
}
}  // namespace gasbound::gas
