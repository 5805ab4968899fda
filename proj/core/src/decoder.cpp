// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/decoder.hpp>

#include <algorithm>

namespace gasbound::evm
{
u256 Instruction::immediate_value() const
{
    u256 v = 0;
    for (const uint8_t b : immediate)
        v = (v << 8) | b;
    return v;
}

const Instruction* DecodedProgram::at_offset(uint32_t offset) const
{
    const auto it = std::lower_bound(instructions.begin(), instructions.end(),
        offset, [](const Instruction& i, uint32_t o) { return i.offset < o; });
    if (it == instructions.end() || it->offset != offset)
        return nullptr;
    return &*it;
}

DecodedProgram decode(std::span<const uint8_t> code)
{
    DecodedProgram program;
    program.code_size = static_cast<uint32_t>(code.size());
    program.instructions.reserve(code.size());

    uint32_t pos = 0;
    while (pos < code.size())
    {
        Instruction instr;
        instr.offset = pos;
        instr.raw_byte = code[pos];
        instr.opcode =
            is_known_opcode(code[pos]) ? static_cast<Opcode>(code[pos]) : Opcode::INVALID;

        const auto imm = immediate_size(instr.opcode);
        if (imm > 0)
        {
            const auto available =
                std::min<uint32_t>(imm, static_cast<uint32_t>(code.size()) - pos - 1);
            instr.immediate.assign(code.begin() + pos + 1,
                code.begin() + pos + 1 + available);
            instr.present = static_cast<uint8_t>(available);
            if (available < imm)
            {
                instr.immediate.resize(imm, 0);  // zero-pad
                instr.truncated = true;
            }
        }
        pos = instr.next_offset();
        program.instructions.push_back(std::move(instr));
    }
    return program;
}

bytes serialize(const DecodedProgram& program)
{
    bytes out;
    out.reserve(program.code_size);
    for (const auto& instr : program.instructions)
    {
        out.push_back(instr.raw_byte);
        out.insert(out.end(), instr.immediate.begin(),
            instr.immediate.begin() + instr.present);
    }
    return out;
}
}  // namespace gasbound::evm
