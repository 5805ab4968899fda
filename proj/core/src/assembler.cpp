// gasbound: gas upper-bound analysis for EVM bytecode
// Copyright 2026 The gasbound Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gasbound/assembler.hpp>

#include <cctype>
#include <map>
#include <sstream>

namespace gasbound::evm
{
namespace
{
struct Token
{
    std::string text;
    size_t line;
};

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> tokens;
    size_t line = 1;
    std::string current;
    bool in_comment = false;
    auto flush = [&] {
        if (!current.empty())
        {
            tokens.push_back({current, line});
            current.clear();
        }
    };
    for (const char c : text)
    {
        if (c == '\n')
        {
            flush();
            in_comment = false;
            ++line;
            continue;
        }
        if (in_comment)
            continue;
        if (c == ';' || c == '#')
        {
            flush();
            in_comment = true;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',')
        {
            flush();
            continue;
        }
        current.push_back(c);
    }
    flush();
    return tokens;
}

bool parse_number(const std::string& text, u256& out)
{
    if (text.empty())
        return false;
    u256 value = 0;
    if (text.starts_with("0x") || text.starts_with("0X"))
    {
        if (text.size() == 2)
            return false;
        for (size_t i = 2; i < text.size(); ++i)
        {
            const char c = static_cast<char>(std::tolower(text[i]));
            int digit;
            if (c >= '0' && c <= '9')
                digit = c - '0';
            else if (c >= 'a' && c <= 'f')
                digit = c - 'a' + 10;
            else
                return false;
            value = (value << 4) | digit;
        }
    }
    else
    {
        for (const char c : text)
        {
            if (c < '0' || c > '9')
                return false;
            value = value * 10 + (c - '0');
        }
    }
    out = value;
    return true;
}

bytes immediate_bytes(const u256& value, unsigned width, size_t line)
{
    u256 v = value;
    bytes out(width, 0);
    for (unsigned i = 0; i < width; ++i)
    {
        out[width - 1 - i] = static_cast<uint8_t>(v & 0xff);
        v >>= 8;
    }
    if (v != 0)
        throw AssemblyError(
            "line " + std::to_string(line) + ": immediate does not fit PUSH width");
    return out;
}

bool looks_like_offset_prefix(const std::string& token)
{
    if (token.size() < 2 || token.back() != ':')
        return false;
    for (size_t i = 0; i + 1 < token.size(); ++i)
        if (!std::isxdigit(static_cast<unsigned char>(token[i])))
            return false;
    return true;
}
}  // namespace

bytes assemble(std::string_view text)
{
    const auto tokens = tokenize(text);

    struct Pending
    {
        size_t byte_pos;   // first immediate byte
        unsigned width;
        std::string label;
        size_t line;
    };

    bytes code;
    std::map<std::string, uint32_t> labels;
    std::vector<Pending> fixups;

    for (size_t i = 0; i < tokens.size(); ++i)
    {
        const auto& [text_, line] = tokens[i];
        if (looks_like_offset_prefix(text_))
            continue;  // leading "1f:" offsets from disassembly
        if (text_.size() > 1 && text_.back() == ':')
        {
            const std::string name = text_.substr(0, text_.size() - 1);
            if (!labels.emplace(name, static_cast<uint32_t>(code.size())).second)
                throw AssemblyError("line " + std::to_string(line) +
                                    ": duplicate label '" + name + "'");
            continue;
        }

        std::string name = text_;
        for (auto& c : name)
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        const auto op = opcode_from_mnemonic(name);
        if (!op)
            throw AssemblyError(
                "line " + std::to_string(line) + ": unknown mnemonic '" + text_ + "'");
        code.push_back(static_cast<uint8_t>(*op));

        const unsigned width = immediate_size(*op);
        if (width == 0)
            continue;
        if (i + 1 >= tokens.size())
            throw AssemblyError(
                "line " + std::to_string(line) + ": missing immediate for " + name);
        const std::string arg = tokens[++i].text;
        if (arg.starts_with(':'))
        {
            fixups.push_back({code.size(), width, arg.substr(1), line});
            code.insert(code.end(), width, 0);
        }
        else
        {
            u256 value;
            if (!parse_number(arg, value))
                throw AssemblyError(
                    "line " + std::to_string(line) + ": bad immediate '" + arg + "'");
            const auto imm = immediate_bytes(value, width, line);
            code.insert(code.end(), imm.begin(), imm.end());
        }
    }

    for (const auto& fix : fixups)
    {
        const auto it = labels.find(fix.label);
        if (it == labels.end())
            throw AssemblyError("line " + std::to_string(fix.line) +
                                ": undefined label '" + fix.label + "'");
        const auto imm = immediate_bytes(it->second, fix.width, fix.line);
        std::copy(imm.begin(), imm.end(), code.begin() + fix.byte_pos);
    }
    return code;
}

std::string disassemble(const DecodedProgram& program)
{
    std::ostringstream out;
    for (const auto& instr : program.instructions)
    {
        out << instr.offset << ": " << mnemonic(instr.opcode);
        if (!instr.immediate.empty())
            out << " 0x" << hex(instr.immediate);
        if (instr.truncated)
            out << " (truncated)";
        out << '\n';
    }
    return out.str();
}
}  // namespace gasbound::evm
