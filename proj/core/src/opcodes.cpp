// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/opcodes.hpp>

#include <array>
#include <map>
#include <string>

namespace gasbound::evm
{
namespace
{
struct TableEntry
{
    bool known = false;
    OpcodeInfo info;
};

// pops/pushes follow the published opcode table for the pinned schedule,
// with DUP/SWAP expressed as in-place accesses (see OpcodeInfo).
constexpr TableEntry entry(std::string_view name, uint8_t pops, uint8_t pushes,
    uint8_t min_stack, bool term = false, bool jump = false, bool mem = false,
    bool storage = false)
{
    return {true, {name, pops, pushes, min_stack, term, jump, mem, storage}};
}

std::array<TableEntry, 256> build_table()
{
    std::array<TableEntry, 256> t{};
    auto set = [&](Opcode op, TableEntry e) { t[static_cast<uint8_t>(op)] = e; };

    set(Opcode::STOP, entry("STOP", 0, 0, 0, true));
    set(Opcode::ADD, entry("ADD", 2, 1, 2));
    set(Opcode::MUL, entry("MUL", 2, 1, 2));
    set(Opcode::SUB, entry("SUB", 2, 1, 2));
    set(Opcode::DIV, entry("DIV", 2, 1, 2));
    set(Opcode::SDIV, entry("SDIV", 2, 1, 2));
    set(Opcode::MOD, entry("MOD", 2, 1, 2));
    set(Opcode::SMOD, entry("SMOD", 2, 1, 2));
    set(Opcode::ADDMOD, entry("ADDMOD", 3, 1, 3));
    set(Opcode::MULMOD, entry("MULMOD", 3, 1, 3));
    set(Opcode::EXP, entry("EXP", 2, 1, 2));
    set(Opcode::SIGNEXTEND, entry("SIGNEXTEND", 2, 1, 2));

    set(Opcode::LT, entry("LT", 2, 1, 2));
    set(Opcode::GT, entry("GT", 2, 1, 2));
    set(Opcode::SLT, entry("SLT", 2, 1, 2));
    set(Opcode::SGT, entry("SGT", 2, 1, 2));
    set(Opcode::EQ, entry("EQ", 2, 1, 2));
    set(Opcode::ISZERO, entry("ISZERO", 1, 1, 1));
    set(Opcode::AND, entry("AND", 2, 1, 2));
    set(Opcode::OR, entry("OR", 2, 1, 2));
    set(Opcode::XOR, entry("XOR", 2, 1, 2));
    set(Opcode::NOT, entry("NOT", 1, 1, 1));
    set(Opcode::BYTE, entry("BYTE", 2, 1, 2));

    set(Opcode::SHA3, entry("SHA3", 2, 1, 2, false, false, true));

    set(Opcode::ADDRESS, entry("ADDRESS", 0, 1, 0));
    set(Opcode::BALANCE, entry("BALANCE", 1, 1, 1));
    set(Opcode::ORIGIN, entry("ORIGIN", 0, 1, 0));
    set(Opcode::CALLER, entry("CALLER", 0, 1, 0));
    set(Opcode::CALLVALUE, entry("CALLVALUE", 0, 1, 0));
    set(Opcode::CALLDATALOAD, entry("CALLDATALOAD", 1, 1, 1));
    set(Opcode::CALLDATASIZE, entry("CALLDATASIZE", 0, 1, 0));
    set(Opcode::CALLDATACOPY, entry("CALLDATACOPY", 3, 0, 3, false, false, true));
    set(Opcode::CODESIZE, entry("CODESIZE", 0, 1, 0));
    set(Opcode::CODECOPY, entry("CODECOPY", 3, 0, 3, false, false, true));
    set(Opcode::GASPRICE, entry("GASPRICE", 0, 1, 0));
    set(Opcode::EXTCODESIZE, entry("EXTCODESIZE", 1, 1, 1));
    set(Opcode::EXTCODECOPY, entry("EXTCODECOPY", 4, 0, 4, false, false, true));
    set(Opcode::RETURNDATASIZE, entry("RETURNDATASIZE", 0, 1, 0));
    set(Opcode::RETURNDATACOPY, entry("RETURNDATACOPY", 3, 0, 3, false, false, true));

    set(Opcode::BLOCKHASH, entry("BLOCKHASH", 1, 1, 1));
    set(Opcode::COINBASE, entry("COINBASE", 0, 1, 0));
    set(Opcode::TIMESTAMP, entry("TIMESTAMP", 0, 1, 0));
    set(Opcode::NUMBER, entry("NUMBER", 0, 1, 0));
    set(Opcode::DIFFICULTY, entry("DIFFICULTY", 0, 1, 0));
    set(Opcode::GASLIMIT, entry("GASLIMIT", 0, 1, 0));

    set(Opcode::POP, entry("POP", 1, 0, 1));
    set(Opcode::MLOAD, entry("MLOAD", 1, 1, 1, false, false, true));
    set(Opcode::MSTORE, entry("MSTORE", 2, 0, 2, false, false, true));
    set(Opcode::MSTORE8, entry("MSTORE8", 2, 0, 2, false, false, true));
    set(Opcode::SLOAD, entry("SLOAD", 1, 1, 1, false, false, false, true));
    set(Opcode::SSTORE, entry("SSTORE", 2, 0, 2, false, false, false, true));
    set(Opcode::JUMP, entry("JUMP", 1, 0, 1, true, true));
    set(Opcode::JUMPI, entry("JUMPI", 2, 0, 2, false, true));
    set(Opcode::PC, entry("PC", 0, 1, 0));
    set(Opcode::MSIZE, entry("MSIZE", 0, 1, 0));
    set(Opcode::GAS, entry("GAS", 0, 1, 0));
    set(Opcode::JUMPDEST, entry("JUMPDEST", 0, 0, 0));

    for (unsigned n = 1; n <= 32; ++n)
    {
        static std::array<std::string, 33> push_names;
        push_names[n] = "PUSH" + std::to_string(n);
        set(static_cast<Opcode>(0x5f + n), entry(push_names[n], 0, 1, 0));
    }
    for (unsigned n = 1; n <= 16; ++n)
    {
        static std::array<std::string, 17> dup_names;
        static std::array<std::string, 17> swap_names;
        dup_names[n] = "DUP" + std::to_string(n);
        swap_names[n] = "SWAP" + std::to_string(n);
        set(static_cast<Opcode>(0x7f + n),
            entry(dup_names[n], 0, 1, static_cast<uint8_t>(n)));
        set(static_cast<Opcode>(0x8f + n),
            entry(swap_names[n], 0, 0, static_cast<uint8_t>(n + 1)));
    }
    for (unsigned n = 0; n <= 4; ++n)
    {
        static std::array<std::string, 5> log_names;
        log_names[n] = "LOG" + std::to_string(n);
        set(static_cast<Opcode>(0xa0 + n), entry(log_names[n],
            static_cast<uint8_t>(2 + n), 0, static_cast<uint8_t>(2 + n), false,
            false, true));
    }

    set(Opcode::CREATE, entry("CREATE", 3, 1, 3, false, false, true));
    set(Opcode::CALL, entry("CALL", 7, 1, 7, false, false, true));
    set(Opcode::CALLCODE, entry("CALLCODE", 7, 1, 7, false, false, true));
    set(Opcode::RETURN, entry("RETURN", 2, 0, 2, true, false, true));
    set(Opcode::DELEGATECALL, entry("DELEGATECALL", 6, 1, 6, false, false, true));
    set(Opcode::STATICCALL, entry("STATICCALL", 6, 1, 6, false, false, true));
    set(Opcode::REVERT, entry("REVERT", 2, 0, 2, true, false, true));
    set(Opcode::INVALID, entry("INVALID", 0, 0, 0, true));
    set(Opcode::SELFDESTRUCT, entry("SELFDESTRUCT", 1, 0, 1, true));

    return t;
}

const std::array<TableEntry, 256>& table()
{
    static const std::array<TableEntry, 256> t = build_table();
    return t;
}
}  // namespace

bool is_known_opcode(uint8_t byte)
{
    return table()[byte].known;
}

const OpcodeInfo& opcode_info(Opcode op)
{
    return table()[static_cast<uint8_t>(op)].info;
}

std::string_view mnemonic(Opcode op)
{
    return table()[static_cast<uint8_t>(op)].info.mnemonic;
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view name)
{
    static const std::map<std::string_view, Opcode> index = [] {
        std::map<std::string_view, Opcode> m;
        for (unsigned b = 0; b < 256; ++b)
            if (table()[b].known)
                m.emplace(table()[b].info.mnemonic, static_cast<Opcode>(b));
        return m;
    }();
    const auto it = index.find(name);
    if (it == index.end())
        return std::nullopt;
    return it->second;
}
}  // namespace gasbound::evm
