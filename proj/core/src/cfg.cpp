// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/cfg.hpp>

#include <algorithm>
#include <deque>

namespace gasbound::cfg
{
using evm::Instruction;
using evm::Opcode;

namespace
{
constexpr uint64_t kStepBudget = 1 << 22;

std::vector<MemAccess> memory_accesses(
    const Instruction& instr, const std::vector<SymWord>& stack)
{
    // stack.back() is operand 0.
    const auto operand = [&](size_t i) -> std::optional<u256> {
        if (i >= stack.size())
            return std::nullopt;
        const SymWord& w = stack[stack.size() - 1 - i];
        if (w.is_concrete())
            return w.value();
        return std::nullopt;
    };
    const auto range = [&](size_t start_idx, size_t len_idx, bool write) {
        return MemAccess{operand(start_idx), operand(len_idx), write};
    };
    const auto word = [&](size_t addr_idx, unsigned len, bool write) {
        return MemAccess{operand(addr_idx), u256(len), write};
    };

    switch (instr.opcode)
    {
    case Opcode::MLOAD:
        return {word(0, 32, false)};
    case Opcode::MSTORE:
        return {word(0, 32, true)};
    case Opcode::MSTORE8:
        return {word(0, 1, true)};
    case Opcode::SHA3:
        return {range(0, 1, false)};
    case Opcode::CALLDATACOPY:
    case Opcode::CODECOPY:
    case Opcode::RETURNDATACOPY:
        return {range(0, 2, true)};
    case Opcode::EXTCODECOPY:
        return {range(1, 3, true)};
    case Opcode::CREATE:
        return {range(1, 2, false)};
    case Opcode::CALL:
    case Opcode::CALLCODE:
        return {range(3, 4, false), range(5, 6, true)};
    case Opcode::DELEGATECALL:
    case Opcode::STATICCALL:
        return {range(2, 3, false), range(4, 5, true)};
    case Opcode::RETURN:
    case Opcode::REVERT:
        return {range(0, 1, false)};
    default:
        if (evm::is_log(instr.opcode))
            return {range(0, 1, false)};
        return {};
    }
}

void merge_optional(std::optional<u256>& into, const std::optional<u256>& from)
{
    if (into != from)
        into = std::nullopt;
}

TerminatorKind terminator_kind(const Instruction& instr)
{
    if (instr.opcode == Opcode::JUMP)
        return TerminatorKind::jump;
    if (instr.opcode == Opcode::JUMPI)
        return TerminatorKind::jumpi;
    if (evm::opcode_info(instr.opcode).is_terminator)
        return TerminatorKind::halt;
    return TerminatorKind::fallthrough;
}

void add_successor(BasicBlock& block, uint32_t succ)
{
    if (std::find(block.successors.begin(), block.successors.end(), succ) ==
        block.successors.end())
        block.successors.push_back(succ);
}
}  // namespace

const BasicBlock& Cfg::block_of_offset(uint32_t instr_offset) const
{
    auto it = blocks.upper_bound(instr_offset);
    if (it == blocks.begin())
        throw std::out_of_range("no block at offset");
    return std::prev(it)->second;
}

std::set<uint32_t> Cfg::reachable_from(uint32_t from) const
{
    std::set<uint32_t> seen;
    std::deque<uint32_t> queue{from};
    while (!queue.empty())
    {
        const uint32_t id = queue.front();
        queue.pop_front();
        if (!seen.insert(id).second)
            continue;
        const auto it = blocks.find(id);
        if (it == blocks.end())
            continue;
        for (const uint32_t succ : it->second.successors)
            queue.push_back(succ);
    }
    return seen;
}

Cfg build_cfg(evm::DecodedProgram program)
{
    Cfg cfg;
    cfg.program = std::move(program);
    const auto& instrs = cfg.program.instructions;

    // Static block structure: leaders are offset 0, every JUMPDEST, and the
    // instruction after a jump or halting opcode.
    std::set<uint32_t> leaders{0};
    for (size_t i = 0; i < instrs.size(); ++i)
    {
        if (instrs[i].opcode == Opcode::JUMPDEST)
            leaders.insert(instrs[i].offset);
        const auto kind = terminator_kind(instrs[i]);
        if (kind != TerminatorKind::fallthrough && i + 1 < instrs.size())
            leaders.insert(instrs[i + 1].offset);
    }

    for (auto it = leaders.begin(); it != leaders.end(); ++it)
    {
        BasicBlock block;
        block.id = *it;
        const auto next_leader =
            std::next(it) == leaders.end() ? UINT32_MAX : *std::next(it);
        uint32_t index = 0;
        while (index < instrs.size() && instrs[index].offset < *it)
            ++index;
        block.first_instr = index;
        while (index < instrs.size() && instrs[index].offset < next_leader)
        {
            const auto kind = terminator_kind(instrs[index]);
            ++index;
            if (kind != TerminatorKind::fallthrough)
                break;
        }
        block.end_instr = index;
        block.terminator = block.empty() ?
                               TerminatorKind::halt :
                               terminator_kind(instrs[block.end_instr - 1]);
        if (block.terminator == TerminatorKind::fallthrough &&
            block.end_instr == instrs.size())
            block.terminator = TerminatorKind::halt;  // runs off the code end
        cfg.blocks.emplace(block.id, block);
    }
    if (cfg.blocks.empty())
        cfg.blocks.emplace(0, BasicBlock{});

    const auto is_jumpdest = [&](uint32_t offset) {
        const Instruction* instr = cfg.program.at_offset(offset);
        return instr != nullptr && instr->opcode == Opcode::JUMPDEST;
    };

    struct Frame
    {
        uint32_t block;
        std::vector<SymWord> stack;
        std::vector<uint32_t> path;
    };

    std::vector<Frame> worklist;
    worklist.push_back({cfg.entry, {}, {}});
    cfg.blocks.at(cfg.entry).entry_height = 0;

    uint64_t steps = 0;
    while (!worklist.empty())
    {
        Frame frame = std::move(worklist.back());
        worklist.pop_back();

        BasicBlock& block = cfg.blocks.at(frame.block);
        frame.path.push_back(frame.block);
        ++cfg.stats.blocks_executed;

        bool path_dead = false;
        std::optional<SymWord> jump_target;
        std::optional<SymWord> jump_condition;

        for (uint32_t i = block.first_instr; i < block.end_instr && !path_dead; ++i)
        {
            const Instruction& instr = instrs[i];
            if (++steps > kStepBudget)
            {
                if (!cfg.stats.budget_exhausted)
                    cfg.diagnostics.push_back("symbolic exploration budget exhausted");
                cfg.stats.budget_exhausted = true;
                worklist.clear();
                path_dead = true;
                break;
            }

            // Annotations are captured before the stack effect is applied.
            const auto& info = evm::opcode_info(instr.opcode);
            if (info.touches_storage && !frame.stack.empty())
            {
                const SymWord& slot = frame.stack.back();
                const std::optional<u256> value =
                    slot.is_concrete() ? std::optional<u256>(slot.value()) : std::nullopt;
                auto [it, inserted] = cfg.storage_annotations.emplace(instr.offset, value);
                if (!inserted)
                    merge_optional(it->second, value);
            }
            if (info.touches_memory)
            {
                auto accesses = memory_accesses(instr, frame.stack);
                auto [it, inserted] =
                    cfg.memory_annotations.emplace(instr.offset, accesses);
                if (!inserted && it->second.size() == accesses.size())
                {
                    for (size_t k = 0; k < accesses.size(); ++k)
                    {
                        merge_optional(it->second[k].start, accesses[k].start);
                        merge_optional(it->second[k].length, accesses[k].length);
                    }
                }
            }
            if (instr.opcode == Opcode::JUMP || instr.opcode == Opcode::JUMPI)
            {
                jump_target = frame.stack.empty() ? SymWord::fresh() : frame.stack.back();
                if (instr.opcode == Opcode::JUMPI)
                    jump_condition = frame.stack.size() < 2 ?
                                         SymWord::fresh() :
                                         frame.stack[frame.stack.size() - 2];
            }

            if (!symbolic_step(instr, frame.stack))
            {
                cfg.diagnostics.push_back("stack underflow/overflow at offset " +
                                          std::to_string(instr.offset));
                path_dead = true;
            }
        }
        if (path_dead)
        {
            ++cfg.stats.paths;
            continue;
        }

        const uint32_t last_offset =
            block.empty() ? block.id : instrs[block.end_instr - 1].offset;

        // continue_to: records the edge and either keeps exploring or, when
        // the target is already on this path, notes the back edge and stops.
        const auto continue_to = [&](uint32_t target, const std::vector<SymWord>& stack) {
            add_successor(block, target);
            BasicBlock& succ = cfg.blocks.at(target);
            const auto height = static_cast<uint32_t>(stack.size());
            if (!succ.entry_height.has_value())
                succ.entry_height = height;
            else if (*succ.entry_height != height && !succ.height_conflict)
            {
                succ.height_conflict = true;
                cfg.diagnostics.push_back(
                    "inconsistent stack height entering block " + std::to_string(target));
            }
            if (std::find(frame.path.begin(), frame.path.end(), target) !=
                frame.path.end())
            {
                cfg.back_edges.emplace(frame.block, target);
                ++cfg.stats.paths;
                return;
            }
            worklist.push_back({target, stack, frame.path});
        };

        const auto resolve_jump = [&](const SymWord& target) -> std::optional<uint32_t> {
            if (!target.is_concrete())
            {
                cfg.unresolved_jumps.insert(last_offset);
                cfg.diagnostics.push_back(
                    "unresolved jump target at offset " + std::to_string(last_offset));
                return std::nullopt;
            }
            if (target.value() > UINT32_MAX || !is_jumpdest(static_cast<uint32_t>(target.value())))
            {
                cfg.diagnostics.push_back(
                    "jump to invalid destination at offset " + std::to_string(last_offset));
                return std::nullopt;
            }
            const auto t = static_cast<uint32_t>(target.value());
            cfg.jump_targets[last_offset][t] = target.push_origin();
            return t;
        };

        switch (block.terminator)
        {
        case TerminatorKind::halt:
            ++cfg.stats.paths;
            break;
        case TerminatorKind::fallthrough:
        {
            const uint32_t next = instrs[block.end_instr].offset;
            continue_to(next, frame.stack);
            break;
        }
        case TerminatorKind::jump:
        {
            const auto target = resolve_jump(*jump_target);
            if (!target)
            {
                ++cfg.stats.paths;
                break;
            }
            continue_to(*target, frame.stack);
            break;
        }
        case TerminatorKind::jumpi:
        {
            const auto target = resolve_jump(*jump_target);
            if (target)
                continue_to(*target, frame.stack);
            if (block.end_instr < instrs.size())
            {
                const uint32_t next = instrs[block.end_instr].offset;
                continue_to(next, frame.stack);
            }
            else
                ++cfg.stats.paths;
            break;
        }
        }
    }
    return cfg;
}

PublicFunctions discover_public_functions(const Cfg& cfg)
{
    PublicFunctions result;
    const auto& instrs = cfg.program.instructions;

    const auto is_trivial_halt = [&](uint32_t block_id) {
        const auto it = cfg.blocks.find(block_id);
        if (it == cfg.blocks.end())
            return true;
        const BasicBlock& b = it->second;
        if (b.terminator == TerminatorKind::jump ||
            b.terminator == TerminatorKind::fallthrough)
            return false;
        for (uint32_t i = b.first_instr; i < b.end_instr; ++i)
        {
            const Opcode op = instrs[i].opcode;
            if (op == Opcode::JUMPDEST || evm::is_push(op) || evm::is_dup(op) ||
                op == Opcode::POP || op == Opcode::REVERT || op == Opcode::INVALID ||
                op == Opcode::STOP)
                continue;
            return false;
        }
        return true;
    };

    uint32_t spine = cfg.entry;
    std::set<uint32_t> visited;
    bool saw_push4 = false;
    while (visited.insert(spine).second && visited.size() <= 256)
    {
        const auto block_it = cfg.blocks.find(spine);
        if (block_it == cfg.blocks.end())
            break;
        const BasicBlock& block = block_it->second;
        if (block.terminator != TerminatorKind::jumpi || block.successors.empty())
            break;

        // Compare idiom: PUSH4 <selector> directly followed by EQ, block
        // ending in JUMPI whose taken branch is the function body.
        std::optional<uint32_t> selector;
        for (uint32_t i = block.first_instr; i + 1 < block.end_instr; ++i)
        {
            if (evm::is_push(instrs[i].opcode) &&
                evm::immediate_size(instrs[i].opcode) == 4 &&
                instrs[i + 1].opcode == Opcode::EQ)
            {
                selector = static_cast<uint32_t>(instrs[i].immediate_value());
                saw_push4 = true;
            }
        }

        const uint32_t fall_id =
            block.end_instr < instrs.size() ? instrs[block.end_instr].offset : 0;
        std::optional<uint32_t> taken;
        std::optional<uint32_t> fall;
        for (const uint32_t succ : block.successors)
        {
            if (succ == fall_id)
                fall = succ;
            else
                taken = succ;
        }
        if (selector.has_value() && taken.has_value())
            result.selectors.emplace(*selector, *taken);
        // Non-matching JUMPI (e.g. the calldatasize guard): keep walking the
        // fallthrough; its taken branch is dispatcher plumbing.
        if (!fall.has_value())
            break;
        spine = *fall;
    }

    if (result.selectors.empty())
    {
        result.diagnostics.push_back(saw_push4 ?
                "dispatcher shape not recognized" :
                "no dispatcher found (no PUSH4/EQ/JUMPI chain)");
    }
    if (!is_trivial_halt(spine) && !cfg.blocks.at(cfg.entry).empty())
        result.fallback = spine;
    return result;
}

std::optional<bytes> extract_runtime_code(std::span<const uint8_t> creation_code)
{
    const auto program = evm::decode(creation_code);
    if (program.empty())
        return std::nullopt;

    std::vector<SymWord> stack;
    std::set<uint32_t> visited;
    struct Copy
    {
        u256 dest, src, len;
        size_t step;
    };
    std::optional<Copy> last_copy;

    const auto operand = [&](size_t i) -> std::optional<u256> {
        if (i >= stack.size())
            return std::nullopt;
        const SymWord& w = stack[stack.size() - 1 - i];
        return w.is_concrete() ? std::optional<u256>(w.value()) : std::nullopt;
    };

    size_t index = 0;
    for (size_t step = 0; step < 4096; ++step)
    {
        if (index >= program.instructions.size())
            return std::nullopt;
        const Instruction& instr = program.instructions[index];
        if (!visited.insert(instr.offset).second)
            return std::nullopt;

        if (instr.opcode == Opcode::CODECOPY)
        {
            const auto dest = operand(0), src = operand(1), len = operand(2);
            if (dest && src && len)
                last_copy = Copy{*dest, *src, *len, step};
        }
        else if (instr.opcode == Opcode::RETURN)
        {
            const auto start = operand(0), len = operand(1);
            if (!last_copy || !start || !len || *len == 0)
                return std::nullopt;
            if (step - last_copy->step > 8)
                return std::nullopt;  // not the deployment idiom
            if (*start < last_copy->dest || *len > last_copy->len)
                return std::nullopt;
            const u256 begin = last_copy->src + (*start - last_copy->dest);
            if (begin + *len > creation_code.size())
                return std::nullopt;
            const auto b = static_cast<size_t>(begin);
            const auto n = static_cast<size_t>(*len);
            return bytes(creation_code.begin() + b, creation_code.begin() + b + n);
        }
        else if (instr.opcode == Opcode::JUMP || instr.opcode == Opcode::JUMPI)
        {
            const auto target = operand(0);
            const bool take = target.has_value() && *target <= UINT32_MAX &&
                program.at_offset(static_cast<uint32_t>(*target)) != nullptr &&
                program.at_offset(static_cast<uint32_t>(*target))->opcode ==
                    Opcode::JUMPDEST;
            if (instr.opcode == Opcode::JUMP && !take)
                return std::nullopt;
            if (!symbolic_step(instr, stack))
                return std::nullopt;
            if (take)
            {
                const auto* t = program.at_offset(static_cast<uint32_t>(*target));
                index = static_cast<size_t>(t - program.instructions.data());
                continue;
            }
            ++index;
            continue;
        }
        else if (evm::opcode_info(instr.opcode).is_terminator)
            return std::nullopt;

        if (!symbolic_step(instr, stack))
            return std::nullopt;
        ++index;
    }
    return std::nullopt;
}
}  // namespace gasbound::cfg
