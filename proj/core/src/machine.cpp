// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/evm_math.hpp>
#include <gasbound/machine.hpp>

namespace gasbound::meter
{
using evm::Instruction;
using evm::Opcode;

std::string_view status_name(Status status)
{
    switch (status)
    {
    case Status::success:
        return "success";
    case Status::revert:
        return "revert";
    case Status::unsupported_opcode:
        return "unsupported opcode";
    case Status::invalid_instruction:
        return "invalid instruction";
    case Status::step_limit_exceeded:
        return "step limit exceeded";
    case Status::stack_underflow:
        return "stack underflow";
    case Status::stack_overflow:
        return "stack overflow";
    case Status::bad_jump_dest:
        return "bad jump destination";
    }
    return "?";
}

u256 stand_in_hash(std::span<const uint8_t> data)
{
    u256 h = u256("0x9e3779b97f4a7c15f39cc0605cedc8341082276bf3a27251f86c6a11d0c18e95");
    for (const uint8_t b : data)
    {
        h ^= b;
        h *= u256("0x100000001b3");
        h ^= h >> 131;
        h *= 0x9e3779b1;
    }
    return h;
}

namespace
{
struct ExecState
{
    std::vector<u256> stack;
    bytes memory;
    uint64_t active_words = 0;
    std::map<u256, u256> storage;
    const bytes* calldata;
    bigint gas_used = 0;
    bigint mem_gas = 0;
};

class Machine
{
public:
    Machine(const evm::DecodedProgram& program, std::span<const uint8_t> code,
        const bytes& calldata, std::map<u256, u256> storage,
        const gas::GasSchedule& schedule, const TestContext& context,
        uint64_t step_limit)
        : program_(program), code_(code), schedule_(schedule), context_(context),
          step_limit_(step_limit)
    {
        state_.storage = std::move(storage);
        state_.calldata = &calldata;
    }

    Result run()
    {
        size_t index = 0;
        while (true)
        {
            if (index >= program_.instructions.size())
                return finish(Status::success);  // ran off the code end: implicit STOP
            if (++steps_ > step_limit_)
                return finish(Status::step_limit_exceeded);
            const Instruction& instr = program_.instructions[index];
            const auto& info = evm::opcode_info(instr.opcode);
            if (instr.raw_byte != static_cast<uint8_t>(instr.opcode) ||
                instr.opcode == Opcode::INVALID)
                return finish(Status::invalid_instruction);
            if (state_.stack.size() < std::max<size_t>(info.stack_pops, info.min_stack))
                return finish(Status::stack_underflow);

            const auto outcome = step(instr, index);
            if (outcome.has_value())
                return finish(*outcome);
            if (state_.stack.size() > 1024)
                return finish(Status::stack_overflow);
        }
    }

private:
    const evm::DecodedProgram& program_;
    std::span<const uint8_t> code_;
    const gas::GasSchedule& schedule_;
    const TestContext& context_;
    uint64_t step_limit_;
    ExecState state_;
    uint64_t steps_ = 0;
    bytes return_data_;

    Result finish(Status status)
    {
        Result r;
        r.status = status;
        r.gas_used = state_.gas_used;
        r.mem_gas = state_.mem_gas;
        r.active_words = state_.active_words;
        r.steps = steps_;
        r.storage = state_.storage;
        r.return_data = return_data_;
        return r;
    }

    u256 pop()
    {
        u256 v = state_.stack.back();
        state_.stack.pop_back();
        return v;
    }
    void push(const u256& v) { state_.stack.push_back(v); }

    /// Charges expansion to cover [offset, offset+size) and grows memory.
    /// A zero-size access neither expands nor charges.
    bool expand(const u256& offset, const u256& size)
    {
        if (size == 0)
            return true;
        if (offset > (u256(1) << 40) || size > (u256(1) << 40))
            return false;  // fixture-absurd; would overflow the arena
        const uint64_t needed =
            static_cast<uint64_t>((offset + size + 31) >> 5);
        if (needed > state_.active_words)
        {
            state_.mem_gas +=
                schedule_.mem_cost_delta(state_.active_words, needed);
            state_.active_words = needed;
            state_.memory.resize(needed * 32, 0);
        }
        return true;
    }

    u256 read_word(const u256& offset)
    {
        u256 v = 0;
        const auto base = static_cast<uint64_t>(offset);
        for (unsigned i = 0; i < 32; ++i)
            v = (v << 8) | state_.memory[base + i];
        return v;
    }

    void write_word(const u256& offset, const u256& value)
    {
        const auto base = static_cast<uint64_t>(offset);
        u256 v = value;
        for (unsigned i = 0; i < 32; ++i)
        {
            state_.memory[base + 31 - i] = static_cast<uint8_t>(v & 0xff);
            v >>= 8;
        }
    }

    u256 calldata_word(const u256& offset) const
    {
        u256 v = 0;
        for (unsigned i = 0; i < 32; ++i)
        {
            const u256 pos = offset + i;
            const uint8_t byte = pos < state_.calldata->size() ?
                                     (*state_.calldata)[static_cast<size_t>(pos)] :
                                     0;
            v = (v << 8) | byte;
        }
        return v;
    }

    void charge(const Instruction& instr, std::span<const u256> operands,
        bool first_branch = true)
    {
        state_.gas_used +=
            schedule_.concrete_cost(instr.opcode, operands, first_branch);
    }

    std::optional<size_t> jump_to(const u256& target)
    {
        if (target > UINT32_MAX)
            return std::nullopt;
        const auto* instr = program_.at_offset(static_cast<uint32_t>(target));
        if (instr == nullptr || instr->opcode != Opcode::JUMPDEST)
            return std::nullopt;
        return static_cast<size_t>(instr - program_.instructions.data());
    }

    // Returns a status to halt with, or nullopt to continue. `index` is
    // advanced (or redirected for jumps).
    std::optional<Status> step(const Instruction& instr, size_t& index)
    {
        const Opcode op = instr.opcode;
        const auto& info = evm::opcode_info(op);
        ++index;

        if (evm::is_push(op))
        {
            charge(instr, {});
            push(instr.immediate_value());
            return std::nullopt;
        }
        if (evm::is_dup(op))
        {
            charge(instr, {});
            push(state_.stack[state_.stack.size() - evm::opcode_index(op)]);
            return std::nullopt;
        }
        if (evm::is_swap(op))
        {
            charge(instr, {});
            std::swap(state_.stack.back(),
                state_.stack[state_.stack.size() - 1 - evm::opcode_index(op)]);
            return std::nullopt;
        }

        std::vector<u256> ops(info.stack_pops);
        for (auto& v : ops)
            v = pop();

        // Pure stack arithmetic shares fold_constant with the symbolic path.
        if (const auto folded = evm::fold_constant(op, ops))
        {
            charge(instr, ops);
            push(*folded);
            return std::nullopt;
        }

        switch (op)
        {
        case Opcode::STOP:
            charge(instr, ops);
            return Status::success;
        case Opcode::SHA3:
        {
            if (!expand(ops[0], ops[1]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            const auto base = static_cast<size_t>(ops[0]);
            const auto len = static_cast<size_t>(ops[1]);
            push(stand_in_hash(std::span(state_.memory).subspan(base, len)));
            return std::nullopt;
        }
        case Opcode::ADDRESS:
            charge(instr, ops);
            push(context_.address);
            return std::nullopt;
        case Opcode::BALANCE:
            charge(instr, ops);
            push(context_.balance);
            return std::nullopt;
        case Opcode::ORIGIN:
            charge(instr, ops);
            push(context_.origin);
            return std::nullopt;
        case Opcode::CALLER:
            charge(instr, ops);
            push(context_.caller);
            return std::nullopt;
        case Opcode::CALLVALUE:
            charge(instr, ops);
            push(context_.callvalue);
            return std::nullopt;
        case Opcode::CALLDATALOAD:
            charge(instr, ops);
            push(calldata_word(ops[0]));
            return std::nullopt;
        case Opcode::CALLDATASIZE:
            charge(instr, ops);
            push(u256(state_.calldata->size()));
            return std::nullopt;
        case Opcode::CALLDATACOPY:
        {
            if (!expand(ops[0], ops[2]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            for (u256 i = 0; i < ops[2]; ++i)
            {
                const u256 src = ops[1] + i;
                state_.memory[static_cast<size_t>(ops[0] + i)] =
                    src < state_.calldata->size() ?
                        (*state_.calldata)[static_cast<size_t>(src)] :
                        0;
            }
            return std::nullopt;
        }
        case Opcode::CODESIZE:
            charge(instr, ops);
            push(u256(code_.size()));
            return std::nullopt;
        case Opcode::CODECOPY:
        {
            if (!expand(ops[0], ops[2]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            for (u256 i = 0; i < ops[2]; ++i)
            {
                const u256 src = ops[1] + i;
                state_.memory[static_cast<size_t>(ops[0] + i)] =
                    src < code_.size() ? code_[static_cast<size_t>(src)] : 0;
            }
            return std::nullopt;
        }
        case Opcode::GASPRICE:
            charge(instr, ops);
            push(context_.gasprice);
            return std::nullopt;
        case Opcode::EXTCODESIZE:
            charge(instr, ops);
            push(0);
            return std::nullopt;
        case Opcode::EXTCODECOPY:
        {
            if (!expand(ops[1], ops[3]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            for (u256 i = 0; i < ops[3]; ++i)
                state_.memory[static_cast<size_t>(ops[1] + i)] = 0;
            return std::nullopt;
        }
        case Opcode::RETURNDATASIZE:
            charge(instr, ops);
            push(u256(return_data_.size()));
            return std::nullopt;
        case Opcode::RETURNDATACOPY:
        {
            if (!expand(ops[0], ops[2]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            for (u256 i = 0; i < ops[2]; ++i)
            {
                const u256 src = ops[1] + i;
                state_.memory[static_cast<size_t>(ops[0] + i)] =
                    src < return_data_.size() ?
                        return_data_[static_cast<size_t>(src)] :
                        0;
            }
            return std::nullopt;
        }
        case Opcode::BLOCKHASH:
        {
            charge(instr, ops);
            bytes seed(32);
            u256 n = ops[0];
            for (int i = 31; i >= 0; --i)
            {
                seed[i] = static_cast<uint8_t>(n & 0xff);
                n >>= 8;
            }
            push(stand_in_hash(seed));
            return std::nullopt;
        }
        case Opcode::COINBASE:
            charge(instr, ops);
            push(context_.coinbase);
            return std::nullopt;
        case Opcode::TIMESTAMP:
            charge(instr, ops);
            push(context_.timestamp);
            return std::nullopt;
        case Opcode::NUMBER:
            charge(instr, ops);
            push(context_.block_number);
            return std::nullopt;
        case Opcode::DIFFICULTY:
            charge(instr, ops);
            push(context_.difficulty);
            return std::nullopt;
        case Opcode::GASLIMIT:
            charge(instr, ops);
            push(context_.gaslimit);
            return std::nullopt;
        case Opcode::POP:
            charge(instr, ops);
            return std::nullopt;
        case Opcode::MLOAD:
            if (!expand(ops[0], 32))
                return Status::unsupported_opcode;
            charge(instr, ops);
            push(read_word(ops[0]));
            return std::nullopt;
        case Opcode::MSTORE:
            if (!expand(ops[0], 32))
                return Status::unsupported_opcode;
            charge(instr, ops);
            write_word(ops[0], ops[1]);
            return std::nullopt;
        case Opcode::MSTORE8:
            if (!expand(ops[0], 1))
                return Status::unsupported_opcode;
            charge(instr, ops);
            state_.memory[static_cast<size_t>(ops[0])] =
                static_cast<uint8_t>(ops[1] & 0xff);
            return std::nullopt;
        case Opcode::SLOAD:
        {
            charge(instr, ops);
            const auto it = state_.storage.find(ops[0]);
            push(it == state_.storage.end() ? u256(0) : it->second);
            return std::nullopt;
        }
        case Opcode::SSTORE:
        {
            const auto it = state_.storage.find(ops[0]);
            const u256 current = it == state_.storage.end() ? u256(0) : it->second;
            const bool first_assignment = current == 0 && ops[1] != 0;
            charge(instr, ops, first_assignment);
            if (ops[1] == 0)
                state_.storage.erase(ops[0]);
            else
                state_.storage[ops[0]] = ops[1];
            return std::nullopt;
        }
        case Opcode::JUMP:
        {
            charge(instr, ops);
            const auto target = jump_to(ops[0]);
            if (!target)
                return Status::bad_jump_dest;
            index = *target;
            return std::nullopt;
        }
        case Opcode::JUMPI:
        {
            charge(instr, ops);
            if (ops[1] != 0)
            {
                const auto target = jump_to(ops[0]);
                if (!target)
                    return Status::bad_jump_dest;
                index = *target;
            }
            return std::nullopt;
        }
        case Opcode::PC:
            charge(instr, ops);
            push(instr.offset);
            return std::nullopt;
        case Opcode::MSIZE:
            charge(instr, ops);
            push(u256(state_.active_words) * 32);
            return std::nullopt;
        case Opcode::GAS:
            charge(instr, ops);
            push(0);  // metering has no gas limit; nothing sensible to report
            return std::nullopt;
        case Opcode::JUMPDEST:
            charge(instr, ops);
            return std::nullopt;
        case Opcode::CREATE:
            if (!expand(ops[1], ops[2]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            push(0);  // stub: creation result address unmodelled
            return std::nullopt;
        case Opcode::CALL:
        case Opcode::CALLCODE:
        {
            if (!expand(ops[3], ops[4]) || !expand(ops[5], ops[6]))
                return Status::unsupported_opcode;
            // Stub callee: the worst-case template cost is charged, nothing
            // executes. CALLCODE's branch is the concrete value transfer.
            charge(instr, ops, op == Opcode::CALL || ops[2] != 0);
            return_data_.clear();
            push(1);
            return std::nullopt;
        }
        case Opcode::DELEGATECALL:
        case Opcode::STATICCALL:
            if (!expand(ops[2], ops[3]) || !expand(ops[4], ops[5]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            return_data_.clear();
            push(1);
            return std::nullopt;
        case Opcode::RETURN:
        case Opcode::REVERT:
        {
            if (!expand(ops[0], ops[1]))
                return Status::unsupported_opcode;
            charge(instr, ops);
            const auto base = static_cast<size_t>(ops[0]);
            const auto len = static_cast<size_t>(ops[1]);
            return_data_.assign(state_.memory.begin() + base,
                state_.memory.begin() + base + len);
            return op == Opcode::RETURN ? Status::success : Status::revert;
        }
        case Opcode::SELFDESTRUCT:
            charge(instr, ops);  // conservative branch: beneficiary is new
            return Status::success;
        default:
            return Status::unsupported_opcode;
        }
    }
};
}  // namespace

Result execute(std::span<const uint8_t> code, const bytes& calldata,
    std::map<u256, u256> storage, uint64_t step_limit,
    const gas::GasSchedule& schedule, const TestContext& context)
{
    const auto program = evm::decode(code);
    Machine machine(program, code, calldata, std::move(storage), schedule, context,
        step_limit);
    return machine.run();
}
}  // namespace gasbound::meter
