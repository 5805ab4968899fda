// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/keccak.hpp>

#include <cstring>

namespace gasbound::evm
{
namespace
{
constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr uint64_t rotl(uint64_t x, unsigned n)
{
    return (x << n) | (x >> (64 - n));
}

void keccak_f1600(uint64_t s[25])
{
    for (int round = 0; round < 24; ++round)
    {
        uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = s[x] ^ s[x + 5] ^ s[x + 10] ^ s[x + 15] ^ s[x + 20];
        for (int x = 0; x < 5; ++x)
        {
            const uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 5; ++y)
                s[x + 5 * y] ^= d;
        }

        // rho + pi
        uint64_t current = s[1];
        int x = 1, y = 0;
        for (int t = 0; t < 24; ++t)
        {
            const int nx = y;
            const int ny = (2 * x + 3 * y) % 5;
            const unsigned rot = static_cast<unsigned>((t + 1) * (t + 2) / 2 % 64);
            const uint64_t tmp = s[nx + 5 * ny];
            s[nx + 5 * ny] = rotl(current, rot);
            current = tmp;
            x = nx;
            y = ny;
        }

        // chi
        for (int j = 0; j < 25; j += 5)
        {
            uint64_t row[5];
            std::memcpy(row, s + j, sizeof(row));
            for (int i = 0; i < 5; ++i)
                s[j + i] = row[i] ^ (~row[(i + 1) % 5] & row[(i + 2) % 5]);
        }

        s[0] ^= kRoundConstants[round];
    }
}
}  // namespace

std::array<uint8_t, 32> keccak256(std::span<const uint8_t> data)
{
    constexpr size_t rate = 136;  // 1600/8 - 2*256/8
    uint64_t state[25] = {};

    size_t offset = 0;
    while (data.size() - offset >= rate)
    {
        for (size_t i = 0; i < rate / 8; ++i)
        {
            uint64_t lane;
            std::memcpy(&lane, data.data() + offset + i * 8, 8);
            state[i] ^= lane;
        }
        keccak_f1600(state);
        offset += rate;
    }

    uint8_t block[rate] = {};
    const size_t remaining = data.size() - offset;
    std::memcpy(block, data.data() + offset, remaining);
    block[remaining] = 0x01;  // Keccak (not SHA-3) domain padding
    block[rate - 1] |= 0x80;
    for (size_t i = 0; i < rate / 8; ++i)
    {
        uint64_t lane;
        std::memcpy(&lane, block + i * 8, 8);
        state[i] ^= lane;
    }
    keccak_f1600(state);

    std::array<uint8_t, 32> digest;
    std::memcpy(digest.data(), state, 32);
    return digest;
}

uint32_t selector(std::string_view signature)
{
    const auto digest = keccak256(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(signature.data()), signature.size()));
    return static_cast<uint32_t>(digest[0]) << 24 | static_cast<uint32_t>(digest[1]) << 16 |
           static_cast<uint32_t>(digest[2]) << 8 | static_cast<uint32_t>(digest[3]);
}
}  // namespace gasbound::evm
