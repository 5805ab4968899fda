// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/common.hpp>

#include <cctype>

namespace gasbound
{
namespace
{
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string hex(const bytes& data)
{
    std::string out;
    out.reserve(data.size() * 2);
    for (const uint8_t b : data)
    {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

std::string hex(const u256& value)
{
    if (value == 0)
        return "0x0";
    std::string digits;
    u256 v = value;
    while (v != 0)
    {
        digits.push_back(kHexDigits[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    return "0x" + std::string(digits.rbegin(), digits.rend());
}

bool from_hex(std::string_view text, bytes& out)
{
    std::string compact;
    compact.reserve(text.size());
    for (const char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            compact.push_back(c);

    std::string_view body = compact;
    if (body.starts_with("0x") || body.starts_with("0X"))
        body.remove_prefix(2);
    if (body.size() % 2 != 0)
        return false;

    out.clear();
    out.reserve(body.size() / 2);
    for (size_t i = 0; i < body.size(); i += 2)
    {
        const int hi = hex_digit(body[i]);
        const int lo = hex_digit(body[i + 1]);
        if (hi < 0 || lo < 0)
            return false;
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return true;
}

uint64_t content_hash(const bytes& data)
{
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const uint8_t b : data)
    {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace gasbound
