// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/symbolic.hpp>

#include <map>
#include <set>

namespace gasbound::cfg
{
enum class TerminatorKind
{
    fallthrough,
    jump,
    jumpi,
    halt,
};

/// One memory access of an instruction: a byte range [start, start+length).
/// nullopt fields are the "?" of the annotation scheme: the symbolic
/// executor could not make the operand concrete on every path.
struct MemAccess
{
    std::optional<u256> start;
    std::optional<u256> length;
    bool write = false;
};

struct BasicBlock
{
    uint32_t id = 0;           // entry byte offset
    uint32_t first_instr = 0;  // index range into DecodedProgram::instructions
    uint32_t end_instr = 0;    // exclusive
    TerminatorKind terminator = TerminatorKind::halt;
    std::vector<uint32_t> successors;  // for jumpi: [taken, fallthrough]
    std::optional<uint32_t> entry_height;
    bool height_conflict = false;

    bool empty() const { return first_instr == end_instr; }
};

struct Cfg
{
    evm::DecodedProgram program;
    std::map<uint32_t, BasicBlock> blocks;
    uint32_t entry = 0;

    /// instruction offset -> state-variable slot; nullopt means "?".
    std::map<uint32_t, std::optional<u256>> storage_annotations;
    /// instruction offset -> the memory ranges the opcode touches.
    std::map<uint32_t, std::vector<MemAccess>> memory_annotations;
    /// (latch block, loop head) pairs discovered by the path-stop rule.
    std::set<std::pair<uint32_t, uint32_t>> back_edges;
    /// JUMP/JUMPI offsets whose target stayed symbolic on some path.
    std::set<uint32_t> unresolved_jumps;
    /// jump offset -> target block -> offset of the PUSH that supplied the
    /// target (nullopt when the constant was computed, not pushed).
    std::map<uint32_t, std::map<uint32_t, std::optional<uint32_t>>> jump_targets;

    std::vector<std::string> diagnostics;

    struct Stats
    {
        uint64_t paths = 0;
        uint64_t blocks_executed = 0;
        bool budget_exhausted = false;
    } stats;

    const BasicBlock& block_of_offset(uint32_t instr_offset) const;
    /// Blocks reachable from `from` along successor edges (inclusive).
    std::set<uint32_t> reachable_from(uint32_t from) const;
};

/// Recovers the complete CFG by symbolic execution without an iteration
/// bound: whenever a new jump targets a block already on the current path,
/// the edge is recorded and that trace stops.
Cfg build_cfg(evm::DecodedProgram program);

struct PublicFunctions
{
    std::map<uint32_t, uint32_t> selectors;  // 4-byte selector -> entry block
    std::optional<uint32_t> fallback;        // dispatcher default branch
    std::vector<std::string> diagnostics;
};

/// Walks the dispatcher spine (PUSH4 / EQ / JUMPI chains) from the entry
/// block. An unmatched dispatcher yields an empty map plus a diagnostic.
PublicFunctions discover_public_functions(const Cfg& cfg);

/// Locates the constructor's CODECOPY/RETURN idiom and returns the runtime
/// slice, or nullopt when the input already looks like runtime code.
std::optional<bytes> extract_runtime_code(std::span<const uint8_t> creation_code);
}  // namespace gasbound::cfg
