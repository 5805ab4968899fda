// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/decoder.hpp>

#include <stdexcept>

namespace gasbound::evm
{
struct AssemblyError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Assembles a textual program into bytecode.
///
/// Accepted line shapes (comments start with ';' or '#'):
///   [offset:] MNEMONIC [0xIMMEDIATE]     -- disassembler output; offsets ignored
///   label:                               -- label at the next instruction
///   PUSHn :label                         -- immediate patched to the label offset
/// Multiple instructions may share a line.
bytes assemble(std::string_view text);

/// Renders a decoded program one instruction per line ("offset: MNEMONIC imm").
std::string disassemble(const DecodedProgram& program);
}  // namespace gasbound::evm
