// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gasbound/decoder.hpp>
#include <gasbound/gas_schedule.hpp>

#include <map>

namespace gasbound::meter
{
/// Fixed environment the metering interpreter runs in. Values are
/// arbitrary but deterministic; only gas is the point.
struct TestContext
{
    u256 address = 0xA11CE;
    u256 origin = 0x0121617;
    u256 caller = 0xCA11E4;
    u256 callvalue = 0;
    u256 gasprice = 1;
    u256 coinbase = 0xC01B;
    u256 timestamp = 1514764800;
    u256 block_number = 4832686;
    u256 difficulty = 1719271086123456ULL;
    u256 gaslimit = 8000000;
    u256 balance = 1000000000;
};

enum class Status
{
    success,
    revert,
    unsupported_opcode,
    invalid_instruction,
    step_limit_exceeded,
    stack_underflow,
    stack_overflow,
    bad_jump_dest,
};

struct Result
{
    Status status = Status::success;
    bigint gas_used = 0;  // opcode gas, refunds excluded
    bigint mem_gas = 0;   // memory expansion gas
    uint64_t active_words = 0;
    uint64_t steps = 0;
    std::map<u256, u256> storage;
    bytes return_data;

    bool ok() const { return status == Status::success || status == Status::revert; }
};

std::string_view status_name(Status status);

/// Deterministic stand-in for keccak used by SHA3 metering fixtures; gas is
/// what matters, not preimage resistance.
u256 stand_in_hash(std::span<const uint8_t> data);

/// Executes `code` concretely and meters exact gas through the shared
/// schedule. External calls are stubs that charge their cost template and
/// consume no callee gas; SSTORE charges 20000/5000 by the real condition.
Result execute(std::span<const uint8_t> code, const bytes& calldata = {},
    std::map<u256, u256> storage = {}, uint64_t step_limit = 1 << 20,
    const gas::GasSchedule& schedule = gas::GasSchedule::pinned(),
    const TestContext& context = {});
}  // namespace gasbound::meter
